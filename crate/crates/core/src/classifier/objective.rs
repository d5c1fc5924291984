use super::ClassifierError;

/// Mean cross-entropy of a softmax model plus `||W||^2 / (2CN)` over `N` examples,
/// i.e. `C * sum(CE) + ||W||^2 / 2` divided by `CN`. The bias is not penalized.
///
/// Parameters are a flat vector: the `n_features x n_classes` weight matrix in
/// row-major order followed by the `n_classes` biases.
#[derive(Debug)]
pub struct SoftmaxObjective<'a, F> {
    features: &'a [F],
    labels: &'a [usize],
    n_features: usize,
    n_classes: usize,
    c: f64,
}

impl<'a, F: AsRef<[f64]>> SoftmaxObjective<'a, F> {
    pub fn new(features: &'a [F], labels: &'a [usize], n_classes: usize, c: f64) -> Result<Self, ClassifierError> {
        if features.is_empty() {
            return Err(ClassifierError::Empty);
        }
        if labels.len() != features.len() {
            return Err(ClassifierError::LabelCount(labels.len(), features.len()));
        }
        let n_features = features[0].as_ref().len();
        for (example, x) in features.iter().enumerate() {
            let x = x.as_ref();
            if x.len() != n_features {
                return Err(ClassifierError::DimensionMismatch {
                    expected: n_features,
                    found: x.len(),
                });
            }
            if let Some(feature) = x.iter().position(|v| !v.is_finite()) {
                return Err(ClassifierError::NonFinite { example, feature });
            }
        }
        if let Some((example, &label)) = labels.iter().enumerate().find(|(_, l)| **l >= n_classes) {
            return Err(ClassifierError::InvalidLabel {
                example,
                label,
                n_classes,
            });
        }
        if !(c.is_finite() && c > 0.0) {
            return Err(ClassifierError::InvalidConfig(format!("C must be > 0, got {c}")));
        }
        Ok(Self {
            features,
            labels,
            n_features,
            n_classes,
            c,
        })
    }

    pub fn n_params(&self) -> usize {
        (self.n_features + 1) * self.n_classes
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn loss(&self, params: &[f64]) -> f64 {
        self.evaluate(params, None)
    }

    /// Returns the loss and writes its gradient into `grad`.
    pub fn loss_and_gradient(&self, params: &[f64], grad: &mut [f64]) -> f64 {
        self.evaluate(params, Some(grad))
    }

    fn evaluate(&self, params: &[f64], mut grad: Option<&mut [f64]>) -> f64 {
        let k = self.n_classes;
        let split = self.n_features * k;
        let (weights, bias) = params.split_at(split);
        let inv_n = 1.0 / self.features.len() as f64;
        if let Some(g) = grad.as_deref_mut() {
            g.fill(0.0);
        }
        let mut logits = vec![0.0; k];
        let mut data_loss = 0.0;
        for (x, &y) in self.features.iter().zip(self.labels) {
            let x = x.as_ref();
            logits.copy_from_slice(&bias[..k]);
            for (f, xf) in x.iter().enumerate() {
                if *xf == 0.0 {
                    continue;
                }
                for (z, w) in logits.iter_mut().zip(&weights[f * k..(f + 1) * k]) {
                    *z += xf * w;
                }
            }
            let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let shifted_label_logit = logits[y] - max;
            let mut total = 0.0;
            for z in logits.iter_mut() {
                *z = (*z - max).exp();
                total += *z;
            }
            // logits now hold unnormalized probabilities
            data_loss += total.ln() - shifted_label_logit;
            if let Some(g) = grad.as_deref_mut() {
                for (c, p) in logits.iter_mut().enumerate() {
                    *p /= total;
                    let residual = (*p - if c == y { 1.0 } else { 0.0 }) * inv_n;
                    g[split + c] += residual;
                    *p = residual;
                }
                for (f, xf) in x.iter().enumerate() {
                    if *xf == 0.0 {
                        continue;
                    }
                    for (gw, r) in g[f * k..(f + 1) * k].iter_mut().zip(&logits) {
                        *gw += xf * r;
                    }
                }
            }
        }
        let lambda = inv_n / self.c;
        let penalty: f64 = weights.iter().map(|w| w * w).sum::<f64>() * lambda / 2.0;
        if let Some(g) = grad {
            for (gw, w) in g[..split].iter_mut().zip(weights) {
                *gw += lambda * w;
            }
        }
        data_loss * inv_n + penalty
    }
}
