//! Run configuration, read from a TOML file and overridden by command-line flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use groupchoice::augmentation::AugmentationSpec;
use groupchoice::dataset::{SchemeKind, SyntheticSchemeSpec};
use groupchoice::evalharness::SparsitySweepSpec;
use groupchoice::seeds::derive_seed;
use groupchoice::{GridSearchSpec, StrategyKind, VariantSpec};
use serde::{Deserialize, Serialize};

/// Strategies evaluated when the config does not list any.
pub const DEFAULT_STRATEGIES: [StrategyKind; 6] = [
    StrategyKind::Ave,
    StrategyKind::Mult,
    StrategyKind::Lm,
    StrategyKind::Sds1,
    StrategyKind::Sds3,
    StrategyKind::Cope,
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Base seed. Component seeds that are not set explicitly are derived from it.
    pub seed: u64,
    pub data: DataConfig,
    pub synth: SynthConfig,
    pub eval: EvalConfig,
    pub augmentation: AugmentationConfig,
    pub grid: GridConfig,
    pub sparsity: SparsityConfig,
    pub output: OutputConfig,
    pub serve: ServeConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            data: DataConfig::default(),
            synth: SynthConfig::default(),
            eval: EvalConfig::default(),
            augmentation: AugmentationConfig::default(),
            grid: GridConfig::default(),
            sparsity: SparsityConfig::default(),
            output: OutputConfig::default(),
            serve: ServeConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    /// Directory holding `ratings.csv`, `groups.csv` and `choices.csv`.
    pub dir: Option<PathBuf>,
    pub ratings: Option<PathBuf>,
    pub groups: Option<PathBuf>,
    pub choices: Option<PathBuf>,
    /// Square every rating before building profiles.
    pub square_ratings: bool,
    pub rating_min: f64,
    pub rating_max: f64,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            dir: None,
            ratings: None,
            groups: None,
            choices: None,
            square_ratings: false,
            rating_min: 1.0,
            rating_max: 10.0,
        }
    }
}

impl DataConfig {
    /// `(ratings, groups, choices)`; explicit paths win over `dir`.
    pub fn paths(&self) -> anyhow::Result<(PathBuf, PathBuf, PathBuf)> {
        let pick = |explicit: &Option<PathBuf>, name: &str| -> anyhow::Result<PathBuf> {
            match (explicit, &self.dir) {
                (Some(p), _) => Ok(p.clone()),
                (None, Some(d)) => Ok(d.join(name)),
                (None, None) => bail!("no dataset given: set data.dir or pass --data <dir>"),
            }
        };
        Ok((
            pick(&self.ratings, "ratings.csv")?,
            pick(&self.groups, "groups.csv")?,
            pick(&self.choices, "choices.csv")?,
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub n_groups: usize,
    pub n_options: usize,
    pub kind: SchemeKind,
    pub tau: f64,
    pub top_k: usize,
    pub min_group_size: usize,
    pub max_group_size: usize,
    pub rating_noise: f64,
    pub seed: Option<u64>,
}

impl Default for SynthConfig {
    fn default() -> Self {
        let d = SyntheticSchemeSpec::default();
        Self {
            n_groups: 79,
            n_options: 10,
            kind: d.kind,
            tau: d.tau,
            top_k: d.top_k,
            min_group_size: d.min_group_size,
            max_group_size: d.max_group_size,
            rating_noise: d.rating_noise,
            seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub strategies: Vec<StrategyKind>,
    /// Explicit variant names such as `LCP-AVE-P`; when empty every PACP/LCP
    /// variant of `strategies` is run.
    pub variants: Vec<String>,
    pub folds: usize,
    pub repetitions: usize,
    pub seed: Option<u64>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            strategies: DEFAULT_STRATEGIES.to_vec(),
            variants: Vec::new(),
            folds: 4,
            repetitions: 10,
            seed: None,
        }
    }
}

impl EvalConfig {
    pub fn variant_specs(&self) -> anyhow::Result<Vec<VariantSpec>> {
        if self.variants.is_empty() {
            if self.strategies.is_empty() {
                bail!("eval.strategies is empty");
            }
            return Ok(VariantSpec::full_grid(&self.strategies));
        }
        self.variants
            .iter()
            .map(|v| v.parse().with_context(|| format!("bad variant `{v}`")))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AugmentationConfig {
    pub n_permutations: usize,
    pub target_distribution: Option<Vec<f64>>,
    pub seed: Option<u64>,
}

impl Default for AugmentationConfig {
    fn default() -> Self {
        Self {
            n_permutations: AugmentationSpec::default().n_permutations,
            target_distribution: None,
            seed: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum GridPreset {
    Coarse,
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub preset: GridPreset,
    /// Overrides the preset when non-empty.
    pub candidates: Vec<f64>,
    pub inner_folds: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            preset: GridPreset::Coarse,
            candidates: Vec::new(),
            inner_folds: GridSearchSpec::DEFAULT_INNER_FOLDS,
        }
    }
}

impl GridConfig {
    pub fn spec(&self) -> GridSearchSpec {
        let mut spec = if !self.candidates.is_empty() {
            GridSearchSpec::with_candidates(self.candidates.clone())
        } else {
            match self.preset {
                GridPreset::Coarse => GridSearchSpec::coarse(),
                GridPreset::Full => GridSearchSpec::full(),
            }
        };
        spec.inner_folds = self.inner_folds;
        spec
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SparsityConfig {
    pub strategy: StrategyKind,
    pub p_max: f64,
    pub step: f64,
    pub reps: usize,
    pub seed: Option<u64>,
}

impl Default for SparsityConfig {
    fn default() -> Self {
        let d = SparsitySweepSpec::default();
        Self {
            strategy: d.strategy,
            p_max: d.p_max,
            step: d.step,
            reps: d.reps,
            seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServeConfig {
    pub host: String,
    pub port: u16,
    pub static_dir: Option<PathBuf>,
    /// An `eval` report.json whose AVE accuracies are shown as references.
    pub reference_report: Option<PathBuf>,
    /// Append-only session log; defaults to `<output.dir>/sessions.ndjson`.
    pub session_log: Option<PathBuf>,
    pub seed: Option<u64>,
}

impl Default for ServeConfig {
    fn default() -> Self {
        Self {
            host: "127.0.0.1".into(),
            port: 8080,
            static_dir: None,
            reference_report: None,
            session_log: None,
            seed: None,
        }
    }
}

/// Every seed a run uses, after derivation from the base seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolvedSeeds {
    pub base: u64,
    pub synth: u64,
    pub plan: u64,
    pub augmentation: u64,
    pub sparsity: u64,
    pub study: u64,
}

const SYNTH_STREAM: u64 = 1;
const PLAN_STREAM: u64 = 2;
const AUGMENTATION_STREAM: u64 = 3;
const SPARSITY_STREAM: u64 = 4;
const STUDY_STREAM: u64 = 5;

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn seeds(&self) -> ResolvedSeeds {
        let or = |explicit: Option<u64>, stream| explicit.unwrap_or_else(|| derive_seed(self.seed, &[stream]));
        ResolvedSeeds {
            base: self.seed,
            synth: or(self.synth.seed, SYNTH_STREAM),
            plan: or(self.eval.seed, PLAN_STREAM),
            augmentation: or(self.augmentation.seed, AUGMENTATION_STREAM),
            sparsity: or(self.sparsity.seed, SPARSITY_STREAM),
            study: or(self.serve.seed, STUDY_STREAM),
        }
    }

    pub fn synthetic_spec(&self) -> SyntheticSchemeSpec {
        SyntheticSchemeSpec {
            kind: self.synth.kind,
            tau: self.synth.tau,
            top_k: self.synth.top_k,
            min_group_size: self.synth.min_group_size,
            max_group_size: self.synth.max_group_size,
            rating_noise: self.synth.rating_noise,
            seed: self.seeds().synth,
        }
    }

    pub fn augmentation_spec(&self) -> AugmentationSpec {
        AugmentationSpec {
            winners: false,
            n_permutations: self.augmentation.n_permutations,
            target_distribution: self.augmentation.target_distribution.clone(),
            seed: self.seeds().augmentation,
        }
    }

    pub fn sparsity_spec(&self) -> SparsitySweepSpec {
        SparsitySweepSpec {
            strategy: self.sparsity.strategy,
            p_max: self.sparsity.p_max,
            step: self.sparsity.step,
            reps: self.sparsity.reps,
            seed: self.seeds().sparsity,
        }
    }

    pub fn session_log(&self) -> PathBuf {
        self.serve
            .session_log
            .clone()
            .unwrap_or_else(|| self.output.dir.join("sessions.ndjson"))
    }
}
