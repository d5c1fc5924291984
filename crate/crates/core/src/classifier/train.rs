use super::{ClassifierError, SoftmaxModel, SoftmaxObjective, TrainConfig};

/// A trained model together with the loss after every accepted step.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: SoftmaxModel,
    /// `losses[0]` is the loss at the zero initialization.
    pub losses: Vec<f64>,
    pub converged: bool,
}

const ARMIJO: f64 = 1e-4;
const MIN_STEP: f64 = 1e-20;

pub fn train<F: AsRef<[f64]>>(
    features: &[F],
    labels: &[usize],
    n_classes: usize,
    cfg: &TrainConfig,
) -> Result<SoftmaxModel, ClassifierError> {
    train_with_trace(features, labels, n_classes, cfg).map(|o| o.model)
}

pub fn train_with_trace<F: AsRef<[f64]>>(
    features: &[F],
    labels: &[usize],
    n_classes: usize,
    cfg: &TrainConfig,
) -> Result<TrainOutcome, ClassifierError> {
    cfg.validate()?;
    let obj = SoftmaxObjective::new(features, labels, n_classes, cfg.c)?;
    let n = obj.n_params();
    let mut x = vec![0.0; n];
    let mut grad = vec![0.0; n];
    let mut loss = obj.loss_and_gradient(&x, &mut grad);
    let mut losses = vec![loss];
    let mut trial_step = 1.0;
    let mut converged = false;

    let mut x_new = vec![0.0; n];
    let mut grad_new = vec![0.0; n];
    for _ in 0..cfg.max_iterations {
        let grad_sq: f64 = grad.iter().map(|g| g * g).sum();
        if grad_sq == 0.0 {
            converged = true;
            break;
        }
        let mut step = trial_step;
        let accepted = loop {
            for ((xn, xi), gi) in x_new.iter_mut().zip(&x).zip(&grad) {
                *xn = xi - step * gi;
            }
            let candidate = obj.loss(&x_new);
            if candidate <= loss - ARMIJO * step * grad_sq {
                break true;
            }
            step *= 0.5;
            if step < MIN_STEP {
                break false;
            }
        };
        if !accepted {
            converged = true;
            break;
        }
        let new_loss = obj.loss_and_gradient(&x_new, &mut grad_new);

        // Barzilai-Borwein estimate for the next trial step
        let (mut ss, mut sy) = (0.0, 0.0);
        for i in 0..n {
            let s = x_new[i] - x[i];
            ss += s * s;
            sy += s * (grad_new[i] - grad[i]);
        }
        trial_step = if sy > 0.0 {
            (ss / sy).clamp(1e-10, 1e10)
        } else {
            step * 2.0
        };

        let decrease = loss - new_loss;
        std::mem::swap(&mut x, &mut x_new);
        std::mem::swap(&mut grad, &mut grad_new);
        loss = new_loss;
        losses.push(loss);
        if decrease < cfg.tolerance {
            converged = true;
            break;
        }
    }

    Ok(TrainOutcome {
        model: SoftmaxModel::from_params(&x, obj.n_features(), n_classes, cfg.c),
        losses,
        converged,
    })
}
