use super::Dataset;
use crate::error::{Error, Result};

const GRAD_TOL: f64 = 1e-8;
const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;

/// Multinomial logistic regression on standardized features.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    pub n_classes: usize,
    pub dim: usize,
    /// Row-major `n_classes x (dim + 1)`, bias first in each row.
    pub weights: Vec<f64>,
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
    /// Training class counts, used to break score ties toward the majority class.
    pub class_counts: Vec<usize>,
    pub iterations: usize,
}

fn scores(weights: &[f64], x: &[f64], n_classes: usize) -> Vec<f64> {
    let width = x.len() + 1;
    (0..n_classes)
        .map(|c| {
            let row = &weights[c * width..(c + 1) * width];
            row[0] + row[1..].iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
        })
        .collect()
}

fn log_softmax(s: &[f64]) -> Vec<f64> {
    let max = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + s.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
    s.iter().map(|v| v - lse).collect()
}

/// Mean cross-entropy plus `l2 / 2 * |W|^2` (biases unpenalized) and its
/// gradient with respect to the flattened weights.
pub fn logistic_objective(
    weights: &[f64],
    features: &[Vec<f64>],
    labels: &[usize],
    n_classes: usize,
    l2: f64,
) -> (f64, Vec<f64>) {
    let dim = features.first().map_or(0, |f| f.len());
    let width = dim + 1;
    let n = features.len().max(1) as f64;
    let mut loss = 0.0;
    let mut grad = vec![0.0; weights.len()];
    for (x, &y) in features.iter().zip(labels) {
        let lp = log_softmax(&scores(weights, x, n_classes));
        loss -= lp[y];
        for c in 0..n_classes {
            let r = lp[c].exp() - if c == y { 1.0 } else { 0.0 };
            let row = &mut grad[c * width..(c + 1) * width];
            row[0] += r / n;
            for (g, v) in row[1..].iter_mut().zip(x) {
                *g += r * v / n;
            }
        }
    }
    loss /= n;
    for c in 0..n_classes {
        for j in 1..width {
            let w = weights[c * width + j];
            loss += 0.5 * l2 * w * w;
            grad[c * width + j] += l2 * w;
        }
    }
    (loss, grad)
}

impl LogisticModel {
    /// Gradient descent with backtracking from zero weights.
    pub fn fit(train: &Dataset, l2: f64, max_iter: usize) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::InsufficientData("empty training set".into()));
        }
        if !(l2 >= 0.0) {
            return Err(Error::InvalidArgument(format!("l2 penalty must be non-negative, got {l2}")));
        }
        if train.items.iter().any(|it| it.features.iter().any(|v| !v.is_finite())) {
            return Err(Error::InvalidArgument("non-finite feature in training set".into()));
        }
        let dim = train.dim();
        let n = train.len() as f64;
        let mut mean = vec![0.0; dim];
        for it in &train.items {
            for (m, v) in mean.iter_mut().zip(&it.features) {
                *m += v / n;
            }
        }
        let mut scale = vec![0.0; dim];
        for it in &train.items {
            for ((s, v), m) in scale.iter_mut().zip(&it.features).zip(&mean) {
                *s += (v - m) * (v - m) / n;
            }
        }
        for s in scale.iter_mut() {
            *s = if *s > 0.0 { s.sqrt() } else { 1.0 };
        }
        let x: Vec<Vec<f64>> = train
            .items
            .iter()
            .map(|it| standardize(&it.features, &mean, &scale))
            .collect();
        let y: Vec<usize> = train.items.iter().map(|it| it.label).collect();
        let n_classes = train.n_classes();
        let mut w = vec![0.0; n_classes * (dim + 1)];
        let (mut loss, mut grad) = logistic_objective(&w, &x, &y, n_classes, l2);
        let mut step = 1.0;
        let mut iterations = 0;
        while iterations < max_iter {
            let gnorm2: f64 = grad.iter().map(|g| g * g).sum();
            if gnorm2.sqrt() < GRAD_TOL {
                break;
            }
            let mut accepted = None;
            for _ in 0..MAX_HALVINGS {
                let cand: Vec<f64> = w.iter().zip(&grad).map(|(a, g)| a - step * g).collect();
                let (l, g) = logistic_objective(&cand, &x, &y, n_classes, l2);
                if l <= loss - ARMIJO * step * gnorm2 {
                    accepted = Some((cand, l, g));
                    break;
                }
                step *= 0.5;
            }
            let Some((cand, l, g)) = accepted else { break };
            w = cand;
            loss = l;
            grad = g;
            step = (step * 2.0).min(1e3);
            iterations += 1;
        }
        Ok(Self {
            n_classes,
            dim,
            weights: w,
            mean,
            scale,
            class_counts: train.class_counts(),
            iterations,
        })
    }

    pub fn predict_proba(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch(x.len(), self.dim));
        }
        let z = standardize(x, &self.mean, &self.scale);
        Ok(log_softmax(&scores(&self.weights, &z, self.n_classes))
            .into_iter()
            .map(f64::exp)
            .collect())
    }

    /// Highest-scoring class; ties go to the more frequent training class,
    /// then the lower index.
    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch(x.len(), self.dim));
        }
        let z = standardize(x, &self.mean, &self.scale);
        let s = scores(&self.weights, &z, self.n_classes);
        Ok((0..self.n_classes)
            .min_by(|&a, &b| {
                s[b].total_cmp(&s[a])
                    .then(self.class_counts[b].cmp(&self.class_counts[a]))
                    .then(a.cmp(&b))
            })
            .unwrap())
    }
}

fn standardize(x: &[f64], mean: &[f64], scale: &[f64]) -> Vec<f64> {
    x.iter().zip(mean).zip(scale).map(|((v, m), s)| (v - m) / s).collect()
}
