use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use groupchoice::{EvalReport, StrategyKind};
use groupchoice_cli::commands;
use groupchoice_cli::config::{GridPreset, RunConfig};
use groupchoice_cli::server;
use groupchoice_cli::study::{Reference, Study};
use tracing_subscriber::EnvFilter;

#[derive(Parser)]
#[command(name = "groupchoice", version, about = "Predict group choices from members' ratings")]
struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Base seed for every random stream.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Directory with ratings.csv, groups.csv and choices.csv.
    #[arg(long, global = true)]
    data: Option<PathBuf>,
    /// Square ratings before building profiles.
    #[arg(long, global = true)]
    square: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a dataset and write a summary.
    Ingest(IngestArgs),
    /// Generate a synthetic dataset.
    Synth(SynthArgs),
    /// Write normalized group profiles.
    Profiles(ProfilesArgs),
    /// Cross-validated evaluation of PACP and LCP variants.
    Eval(EvalArgs),
    /// Accuracy of PACP and LCP as ratings are removed.
    Sparsity(SparsityArgs),
    /// Serve the human prediction study.
    Serve(ServeArgs),
}

#[derive(Args)]
struct IngestArgs {
    #[arg(long)]
    ratings: Option<PathBuf>,
    #[arg(long)]
    groups: Option<PathBuf>,
    #[arg(long)]
    choices: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long = "groups")]
    n_groups: Option<usize>,
    #[arg(long = "options")]
    n_options: Option<usize>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    top_k: Option<usize>,
}

#[derive(Args)]
struct ProfilesArgs {
    /// Strategy to compute; repeat for several. Defaults to the configured strategies.
    #[arg(long = "strategy")]
    strategies: Vec<StrategyKind>,
}

#[derive(Args)]
struct EvalArgs {
    /// Comma-separated variant names such as PACP-AVE,LCP-AVE-P.
    #[arg(long, value_delimiter = ',')]
    variants: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    strategies: Vec<StrategyKind>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long, value_enum)]
    grid: Option<GridPreset>,
    #[arg(long)]
    permutations: Option<usize>,
}

#[derive(Args)]
struct SparsityArgs {
    #[arg(long)]
    strategy: Option<StrategyKind>,
    #[arg(long)]
    p_max: Option<f64>,
    #[arg(long)]
    step: Option<f64>,
    /// Sparsified matrices per level.
    #[arg(long)]
    draws: Option<usize>,
    /// Cross-validation repetitions per matrix.
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long, value_enum)]
    grid: Option<GridPreset>,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long)]
    host: Option<String>,
    #[arg(long)]
    port: Option<u16>,
    /// Directory of static UI assets.
    #[arg(long = "static")]
    static_dir: Option<PathBuf>,
    /// report.json from `eval`, used for the reference accuracies.
    #[arg(long)]
    reference: Option<PathBuf>,
    /// Session event log.
    #[arg(long)]
    log: Option<PathBuf>,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn base_config(cli: &Cli) -> anyhow::Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    set(&mut cfg.seed, cli.seed);
    set(&mut cfg.output.dir, cli.out.clone());
    if cli.data.is_some() {
        cfg.data.dir = cli.data.clone();
    }
    if cli.square {
        cfg.data.square_ratings = true;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let mut cfg = base_config(&cli)?;
    match cli.command {
        Command::Ingest(a) => {
            if a.ratings.is_some() {
                cfg.data.ratings = a.ratings;
            }
            if a.groups.is_some() {
                cfg.data.groups = a.groups;
            }
            if a.choices.is_some() {
                cfg.data.choices = a.choices;
            }
            let summary = commands::cmd_ingest(&cfg)?;
            println!("{}", serde_json::to_string_pretty(&summary)?);
        }
        Command::Synth(a) => {
            set(&mut cfg.synth.n_groups, a.n_groups);
            set(&mut cfg.synth.n_options, a.n_options);
            set(&mut cfg.synth.tau, a.tau);
            set(&mut cfg.synth.top_k, a.top_k);
            commands::cmd_synth(&cfg)?;
        }
        Command::Profiles(a) => {
            let path = commands::cmd_profiles(&cfg, &a.strategies)?;
            println!("{}", path.display());
        }
        Command::Eval(a) => {
            if !a.variants.is_empty() {
                cfg.eval.variants = a.variants;
            }
            if !a.strategies.is_empty() {
                cfg.eval.strategies = a.strategies;
            }
            set(&mut cfg.eval.folds, a.folds);
            set(&mut cfg.eval.repetitions, a.reps);
            set(&mut cfg.grid.preset, a.grid);
            set(&mut cfg.augmentation.n_permutations, a.permutations);
            let report = commands::cmd_eval(&cfg)?;
            print_report(&report);
        }
        Command::Sparsity(a) => {
            set(&mut cfg.sparsity.strategy, a.strategy);
            set(&mut cfg.sparsity.p_max, a.p_max);
            set(&mut cfg.sparsity.step, a.step);
            set(&mut cfg.sparsity.reps, a.draws);
            set(&mut cfg.eval.repetitions, a.reps);
            set(&mut cfg.grid.preset, a.grid);
            for p in commands::cmd_sparsity(&cfg)? {
                println!(
                    "p={:.2} achieved={:.3} PACP={:.3} LCP={:.3}",
                    p.nominal_p, p.achieved_sparsity, p.pacp_accuracy, p.lcp_accuracy
                );
            }
        }
        Command::Serve(a) => {
            set(&mut cfg.serve.host, a.host);
            set(&mut cfg.serve.port, a.port);
            if a.static_dir.is_some() {
                cfg.serve.static_dir = a.static_dir;
            }
            if a.reference.is_some() {
                cfg.serve.reference_report = a.reference;
            }
            if a.log.is_some() {
                cfg.serve.session_log = a.log;
            }
            serve(&cfg)?;
        }
    }
    Ok(())
}

fn print_report(report: &EvalReport) {
    for v in &report.variants {
        println!(
            "{:<14} accuracy {:.3}  KL {:.3}",
            v.spec().to_string(),
            v.mean_accuracy,
            v.kl
        );
    }
    for s in &report.significance {
        match s.p {
            Some(p) => println!("{} > {}: p = {p:.4}", s.a, s.b),
            None => println!("{} > {}: p undefined", s.a, s.b),
        }
    }
}

fn serve(cfg: &RunConfig) -> anyhow::Result<()> {
    // participants see the ratings as collected, never squared
    let dataset = Arc::new(commands::load_raw(cfg)?);
    let reference = match &cfg.serve.reference_report {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let report: EvalReport =
                serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
            Reference::from_report(&report)
        }
        None => Reference::none(),
    };
    let study = Study::with_log(dataset, reference, cfg.seeds().study, &cfg.session_log())?;
    let addr: SocketAddr = format!("{}:{}", cfg.serve.host, cfg.serve.port)
        .parse()
        .context("invalid host/port")?;
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(server::serve(Arc::new(study), cfg.serve.static_dir.clone(), addr))
}

fn main() -> std::process::ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::ExitCode::FAILURE
        }
    }
}
