use groupchoice::classifier::{grid_search, stratified_folds, train, train_with_trace, SoftmaxObjective};
use groupchoice::dataset::{generate_synthetic, SyntheticSchemeSpec};
use groupchoice::{aggregate, GridSearchSpec, StrategyKind, TrainConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_instance(seed: u64, n: usize, f: usize, k: usize) -> (Vec<Vec<f64>>, Vec<usize>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs = (0..n).map(|_| (0..f).map(|_| rng.random::<f64>()).collect()).collect();
    let ys = (0..n).map(|_| rng.random_range(0..k)).collect();
    let params = (0..f * k + k).map(|_| rng.random_range(-2.0..2.0)).collect();
    (xs, ys, params)
}

#[test]
fn gradient_matches_central_differences() {
    let h = 1e-5;
    for seed in 0..4 {
        let (xs, ys, params) = random_instance(seed, 60, 10, 10);
        let obj = SoftmaxObjective::new(&xs, &ys, 10, 0.7 + seed as f64).unwrap();
        let mut grad = vec![0.0; obj.n_params()];
        obj.loss_and_gradient(&params, &mut grad);
        let numeric: Vec<f64> = (0..params.len())
            .map(|i| {
                let mut plus = params.clone();
                let mut minus = params.clone();
                plus[i] += h;
                minus[i] -= h;
                (obj.loss(&plus) - obj.loss(&minus)) / (2.0 * h)
            })
            .collect();
        let diff: f64 = grad
            .iter()
            .zip(&numeric)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        let scale: f64 =
            grad.iter().map(|a| a * a).sum::<f64>().sqrt() + numeric.iter().map(|a| a * a).sum::<f64>().sqrt();
        assert!(diff / scale < 1e-5, "seed {seed}: relative error {}", diff / scale);
    }
}

#[test]
fn training_is_deterministic() {
    let (xs, ys, _) = random_instance(9, 80, 10, 10);
    let cfg = TrainConfig::new(3.0).unwrap();
    let a = train(&xs, &ys, 10, &cfg).unwrap();
    let b = train(&xs, &ys, 10, &cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn weaker_regularization_lowers_the_data_term() {
    let (xs, ys, _) = random_instance(3, 60, 10, 10);
    let data_term = |c: f64| {
        let model = train(&xs, &ys, 10, &TrainConfig::new(c).unwrap()).unwrap();
        let mut params = model.weights().to_vec();
        params.extend_from_slice(model.bias());
        // with a huge C the penalty vanishes and only mean cross-entropy remains
        SoftmaxObjective::new(&xs, &ys, 10, 1e300).unwrap().loss(&params)
    };
    let (a, b, c) = (data_term(0.1), data_term(1.0), data_term(10.0));
    assert!(b <= a + 1e-7 && c <= b + 1e-7, "{a} {b} {c}");
}

#[test]
fn loss_trace_is_monotone_and_stationary() {
    let (xs, ys, _) = random_instance(5, 60, 10, 10);
    let out = train_with_trace(&xs, &ys, 10, &TrainConfig::new(2.0).unwrap()).unwrap();
    assert!(out.converged);
    assert!(out.losses.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn selected_c_has_the_best_inner_accuracy() {
    let ds = generate_synthetic(
        &SyntheticSchemeSpec {
            seed: 4,
            ..Default::default()
        },
        120,
        10,
    )
    .unwrap();
    let xs: Vec<Vec<f64>> = ds
        .groups()
        .iter()
        .map(|g| aggregate(ds.ratings(), g, StrategyKind::Ave).unwrap().scores)
        .collect();
    let ys = ds.choices().to_vec();
    let candidates = vec![0.1, 1.0, 5.0, 20.0, 50.0];
    let spec = GridSearchSpec::with_candidates(candidates.clone());
    let seed = 17;
    let chosen = grid_search(&xs, &ys, 10, &spec, seed).unwrap().c;

    // independent recomputation of every candidate's inner accuracy
    let folds = stratified_folds(&ys, spec.inner_folds, seed);
    let inner = |c: f64| {
        let mut cfg = TrainConfig::new(c).unwrap();
        cfg.max_iterations = spec.max_iterations;
        cfg.tolerance = spec.tolerance;
        (0..spec.inner_folds)
            .map(|f| {
                let train_idx: Vec<usize> = (0..xs.len()).filter(|&i| folds[i] != f).collect();
                let test_idx: Vec<usize> = (0..xs.len()).filter(|&i| folds[i] == f).collect();
                let tx: Vec<&[f64]> = train_idx.iter().map(|&i| xs[i].as_slice()).collect();
                let ty: Vec<usize> = train_idx.iter().map(|&i| ys[i]).collect();
                let m = train(&tx, &ty, 10, &cfg).unwrap();
                let hits = test_idx
                    .iter()
                    .filter(|&&i| m.predict(&xs[i]).unwrap() == ys[i])
                    .count();
                hits as f64 / test_idx.len() as f64
            })
            .sum::<f64>()
            / spec.inner_folds as f64
    };
    let scores: Vec<f64> = candidates.iter().map(|&c| inner(c)).collect();
    let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let expected = candidates[scores.iter().position(|&s| s == best).unwrap()];
    assert_eq!(chosen, expected, "inner accuracies {scores:?}");
}

#[test]
fn stratified_folds_are_balanced() {
    let ys: Vec<usize> = (0..100).map(|i| i % 7).collect();
    let folds = stratified_folds(&ys, 3, 2);
    let mut sizes = [0; 3];
    for &f in &folds {
        sizes[f] += 1;
    }
    assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
    for class in 0..7 {
        let mut per = [0i32; 3];
        for (i, &y) in ys.iter().enumerate() {
            if y == class {
                per[folds[i]] += 1;
            }
        }
        assert!(per.iter().max().unwrap() - per.iter().min().unwrap() <= 1);
    }
}
