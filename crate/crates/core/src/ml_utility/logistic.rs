use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Objective before the first step and after every step.
    pub loss_history: Vec<f64>,
}

fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn margins<'a>(x: &'a [f64], dim: usize, w: &'a [f64], b: f64) -> impl Iterator<Item = f64> + 'a {
    x.chunks_exact(dim)
        .map(move |row| b + row.iter().zip(w).map(|(a, c)| a * c).sum::<f64>())
}

/// Mean log-loss plus `l2 / 2 * |w|^2` (the bias is not penalized).
pub fn logistic_loss(x: &[f64], dim: usize, y: &[f64], w: &[f64], b: f64, l2: f64) -> f64 {
    let n = y.len() as f64;
    let data: f64 = margins(x, dim, w, b)
        .zip(y)
        .map(|(z, &t)| softplus(z) - t * z)
        .sum();
    data / n + 0.5 * l2 * w.iter().map(|v| v * v).sum::<f64>()
}

/// Gradient of [`logistic_loss`] with respect to the weights and the bias.
pub fn logistic_gradient(x: &[f64], dim: usize, y: &[f64], w: &[f64], b: f64, l2: f64) -> (Vec<f64>, f64) {
    let n = y.len() as f64;
    let mut gw = vec![0.0; dim];
    let mut gb = 0.0;
    for ((z, &t), row) in margins(x, dim, w, b).zip(y).zip(x.chunks_exact(dim)) {
        let r = sigmoid(z) - t;
        gb += r;
        for (g, a) in gw.iter_mut().zip(row) {
            *g += r * a;
        }
    }
    for (g, v) in gw.iter_mut().zip(w) {
        *g = *g / n + l2 * v;
    }
    (gw, gb / n)
}

/// Full-batch gradient descent from zero weights.
///
/// When `learning_rate` is below `1 / L` for the Lipschitz bound
/// `L = max |x|^2 / 4 + l2` the objective must not increase, and an increase
/// is reported as a numerical failure.
pub fn fit_logistic(
    x: &[f64],
    dim: usize,
    y: &[f64],
    learning_rate: f64,
    iterations: usize,
    l2: f64,
) -> Result<LogisticModel> {
    if dim == 0 {
        return Err(Error::insufficient("logistic regression needs features"));
    }
    if y.is_empty() || x.len() != y.len() * dim {
        return Err(Error::insufficient("logistic regression needs training rows"));
    }
    if iterations == 0 || !(learning_rate > 0.0) || l2 < 0.0 {
        return Err(Error::invalid(
            "logistic regression needs iterations >= 1, a positive learning rate and l2 >= 0",
        ));
    }
    let max_norm = x
        .chunks_exact(dim)
        .map(|r| 1.0 + r.iter().map(|v| v * v).sum::<f64>())
        .fold(0.0, f64::max);
    let monotone = learning_rate <= 1.0 / (0.25 * max_norm + l2);

    let mut w = vec![0.0; dim];
    let mut b = 0.0;
    let mut history = Vec::with_capacity(iterations + 1);
    history.push(logistic_loss(x, dim, y, &w, b, l2));
    for _ in 0..iterations {
        let (gw, gb) = logistic_gradient(x, dim, y, &w, b, l2);
        for (v, g) in w.iter_mut().zip(&gw) {
            *v -= learning_rate * g;
        }
        b -= learning_rate * gb;
        let loss = logistic_loss(x, dim, y, &w, b, l2);
        let prev = *history.last().unwrap();
        if !loss.is_finite() || (monotone && loss > prev + 1e-12 * (1.0 + prev.abs())) {
            return Err(Error::Numerical(format!(
                "logistic loss went from {prev} to {loss}"
            )));
        }
        history.push(loss);
    }
    Ok(LogisticModel {
        weights: w,
        bias: b,
        loss_history: history,
    })
}

impl LogisticModel {
    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        margins(x, self.weights.len(), &self.weights, self.bias)
            .map(sigmoid)
            .collect()
    }
}
