//! Entropy-regularized optimal transport between two point clouds.
//!
//! Sinkhorn iterations alternate row and column scaling of the Gibbs kernel
//! `exp(-C / eps)`. When `max(C) / eps` is large enough for the kernel to
//! underflow, the same iterations run on log-domain dual potentials instead.
//! The reported value is the transport cost `<P, C>` of the final plan,
//! without the entropy term and without debiasing.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::neighbors::encode_pair;
use crate::rng::derive_seed;
use crate::tabular::{sample_rows, Dataset};

/// Kernel exponent beyond which the log-domain solver is used.
const LOG_DOMAIN_THRESHOLD: f64 = 500.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SinkhornParams {
    pub epsilon: f64,
    pub max_iter: usize,
    pub tol: f64,
    /// Row cap applied to each dataset before building the cost matrix.
    pub cap: usize,
}

impl Default for SinkhornParams {
    fn default() -> Self {
        SinkhornParams {
            epsilon: 0.05,
            max_iter: 500,
            tol: 1e-6,
            cap: 2_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SinkhornSolution {
    /// `<P, C>` of the final plan.
    pub cost: f64,
    pub iterations: usize,
    /// L1 deviation of the plan's row sums from the source weights.
    pub violation: f64,
    pub converged: bool,
    /// Transport cost after each iteration (only when tracing).
    pub cost_trace: Vec<f64>,
    /// Dual objective after each iteration (only when tracing).
    pub dual_trace: Vec<f64>,
    /// Row-major `n x m` plan.
    pub plan: Vec<f64>,
}

/// Runs Sinkhorn on a row-major `n x m` cost matrix.
pub fn sinkhorn(
    cost: &[f64],
    source: &[f64],
    target: &[f64],
    params: &SinkhornParams,
    trace: bool,
) -> Result<SinkhornSolution> {
    let (n, m) = (source.len(), target.len());
    if n == 0 || m == 0 || cost.len() != n * m {
        return Err(Error::invalid(format!(
            "cost matrix of {} entries for {n} x {m} marginals",
            cost.len()
        )));
    }
    if !(params.epsilon > 0.0) {
        return Err(Error::invalid("epsilon must be positive"));
    }
    let max_cost = cost.iter().copied().fold(0.0, f64::max);
    if max_cost / params.epsilon < LOG_DOMAIN_THRESHOLD {
        Ok(scaling_solver(cost, source, target, params, trace))
    } else {
        Ok(log_solver(cost, source, target, params, trace))
    }
}

fn scaling_solver(
    cost: &[f64],
    a: &[f64],
    b: &[f64],
    params: &SinkhornParams,
    trace: bool,
) -> SinkhornSolution {
    let (n, m) = (a.len(), b.len());
    let eps = params.epsilon;
    let kernel: Vec<f64> = cost.iter().map(|c| (-c / eps).exp()).collect();
    let mut u = vec![1.0; n];
    let mut v = vec![1.0; m];
    let mut kv = vec![0.0; n];
    let mut ktu = vec![0.0; m];
    let mut out = empty_solution();
    for it in 1..=params.max_iter {
        // row update
        for i in 0..n {
            let row = &kernel[i * m..(i + 1) * m];
            kv[i] = row.iter().zip(&v).map(|(k, x)| k * x).sum();
            u[i] = a[i] / kv[i];
        }
        // column update
        ktu.iter_mut().for_each(|x| *x = 0.0);
        for i in 0..n {
            let row = &kernel[i * m..(i + 1) * m];
            for (acc, k) in ktu.iter_mut().zip(row) {
                *acc += k * u[i];
            }
        }
        for j in 0..m {
            v[j] = b[j] / ktu[j];
        }
        let violation: f64 = (0..n)
            .map(|i| {
                let row = &kernel[i * m..(i + 1) * m];
                let r: f64 = u[i] * row.iter().zip(&v).map(|(k, x)| k * x).sum::<f64>();
                (r - a[i]).abs()
            })
            .sum();
        out.iterations = it;
        out.violation = violation;
        if trace {
            let (c, d) = scaling_objectives(&kernel, cost, &u, &v, a, b, eps);
            out.cost_trace.push(c);
            out.dual_trace.push(d);
        }
        if !violation.is_finite() {
            break;
        }
        if violation < params.tol {
            out.converged = true;
            break;
        }
    }
    out.plan = (0..n * m).map(|k| u[k / m] * kernel[k] * v[k % m]).collect();
    out.cost = out.plan.iter().zip(cost).map(|(p, c)| p * c).sum();
    out
}

fn scaling_objectives(
    kernel: &[f64],
    cost: &[f64],
    u: &[f64],
    v: &[f64],
    a: &[f64],
    b: &[f64],
    eps: f64,
) -> (f64, f64) {
    let m = v.len();
    let mut transport = 0.0;
    let mut mass = 0.0;
    for (k, (kk, c)) in kernel.iter().zip(cost).enumerate() {
        let p = u[k / m] * kk * v[k % m];
        transport += p * c;
        mass += p;
    }
    let dual = eps
        * (a.iter().zip(u).map(|(w, x)| w * x.ln()).sum::<f64>()
            + b.iter().zip(v).map(|(w, x)| w * x.ln()).sum::<f64>())
        - eps * mass;
    (transport, dual)
}

const ANNEAL_STAGE_ITERS: usize = 200;

fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.map(|x| (x - max).exp()).sum::<f64>().ln()
}

fn log_solver(
    cost: &[f64],
    a: &[f64],
    b: &[f64],
    params: &SinkhornParams,
    trace: bool,
) -> SinkhornSolution {
    let (n, m) = (a.len(), b.len());
    let target_eps = params.epsilon;
    let log_a: Vec<f64> = a.iter().map(|x| x.ln()).collect();
    let log_b: Vec<f64> = b.iter().map(|x| x.ln()).collect();
    let mut f = vec![0.0; n];
    let mut g = vec![0.0; m];
    let mut out = empty_solution();
    // epsilon scaling: halve a large epsilon down to the target, warm-starting
    // the potentials; only the final stage counts towards the result
    let max_cost = cost.iter().copied().fold(0.0, f64::max);
    let mut eps = target_eps.max(max_cost);
    let mut it = 0;
    while it < params.max_iter {
        it += 1;
        for i in 0..n {
            let row = &cost[i * m..(i + 1) * m];
            f[i] = eps * log_a[i]
                - eps * log_sum_exp(row.iter().zip(&g).map(|(c, gj)| (gj - c) / eps));
        }
        for j in 0..m {
            g[j] = eps * log_b[j]
                - eps * log_sum_exp((0..n).map(|i| (f[i] - cost[i * m + j]) / eps));
        }
        let violation: f64 = (0..n)
            .map(|i| {
                let row = &cost[i * m..(i + 1) * m];
                let r: f64 = row
                    .iter()
                    .zip(&g)
                    .map(|(c, gj)| ((f[i] + gj - c) / eps).exp())
                    .sum();
                (r - a[i]).abs()
            })
            .sum();
        out.iterations = it;
        out.violation = violation;
        if eps > target_eps {
            if violation < params.tol.max(1e-3 * eps) || it % ANNEAL_STAGE_ITERS == 0 {
                eps = (0.5 * eps).max(target_eps);
            }
            continue;
        }
        if trace {
            let mut transport = 0.0;
            let mut mass = 0.0;
            for (k, c) in cost.iter().enumerate() {
                let p = ((f[k / m] + g[k % m] - c) / eps).exp();
                transport += p * c;
                mass += p;
            }
            out.cost_trace.push(transport);
            out.dual_trace.push(
                a.iter().zip(&f).map(|(w, x)| w * x).sum::<f64>()
                    + b.iter().zip(&g).map(|(w, x)| w * x).sum::<f64>()
                    - eps * mass,
            );
        }
        if violation < params.tol {
            out.converged = true;
            break;
        }
    }
    out.plan = (0..n * m)
        .map(|k| ((f[k / m] + g[k % m] - cost[k]) / eps).exp())
        .collect();
    out.cost = out.plan.iter().zip(cost).map(|(p, c)| p * c).sum();
    out
}

fn empty_solution() -> SinkhornSolution {
    SinkhornSolution {
        cost: 0.0,
        iterations: 0,
        violation: f64::INFINITY,
        converged: false,
        cost_trace: Vec::new(),
        dual_trace: Vec::new(),
        plan: Vec::new(),
    }
}

/// Pairwise mixed-distance cost matrix (rows: `a`, columns: `b`).
pub fn cost_matrix(a: &Dataset, b: &Dataset) -> Result<Vec<f64>> {
    let (pa, pb) = encode_pair(a, b)?;
    let mut cost = Vec::with_capacity(pa.len() * pb.len());
    for i in 0..pa.len() {
        for j in 0..pb.len() {
            cost.push(pa.distance_to(i, &pb, j));
        }
    }
    Ok(cost)
}

/// Sinkhorn transport cost between the two empirical distributions (uniform
/// weights) under the mixed distance. Each side is subsampled to `cap` rows.
pub fn sinkhorn_distance(
    original: &Dataset,
    synthetic: &Dataset,
    params: &SinkhornParams,
    seed: u64,
) -> Result<f64> {
    let sol = sinkhorn_between(original, synthetic, params, seed, false)?;
    if !sol.converged {
        return Err(Error::NoConvergence {
            iterations: sol.iterations,
            violation: sol.violation,
        });
    }
    Ok(sol.cost)
}

pub fn sinkhorn_between(
    original: &Dataset,
    synthetic: &Dataset,
    params: &SinkhornParams,
    seed: u64,
    trace: bool,
) -> Result<SinkhornSolution> {
    if original.n_rows() == 0 || synthetic.n_rows() == 0 {
        return Err(Error::insufficient("Sinkhorn needs non-empty datasets"));
    }
    let cap = |d: &Dataset| -> Result<Dataset> {
        if d.n_rows() > params.cap {
            sample_rows(d, params.cap, false, derive_seed(seed, 3))
        } else {
            Ok(d.clone())
        }
    };
    let (o, s) = (cap(original)?, cap(synthetic)?);
    let cost = cost_matrix(&o, &s)?;
    let a = vec![1.0 / o.n_rows() as f64; o.n_rows()];
    let b = vec![1.0 / s.n_rows() as f64; s.n_rows()];
    sinkhorn(&cost, &a, &b, params, trace)
}
