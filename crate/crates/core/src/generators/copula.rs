use log::warn;
use nalgebra::{DMatrix, DVector};
use rand::Rng as _;
use rand_distr::StandardNormal;
use statrs::distribution::{ContinuousCDF, Normal};

use super::psd_factor;
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;
use crate::similarity::{average_ranks, pearson};
use crate::tabular::{Column, ColumnKind, Dataset, Schema};

#[derive(Debug, Clone, PartialEq)]
pub enum Marginal {
    /// Sorted observed values.
    Numeric(Vec<f64>),
    /// Categories in schema order with their cumulative frequencies.
    Categorical { categories: Vec<String>, cumulative: Vec<f64> },
}

impl Marginal {
    /// Inverse CDF: linear interpolation between order statistics placed at
    /// `i / (n + 1)`, or the first category whose cumulative share reaches `u`.
    pub fn quantile(&self, u: f64) -> QuantileValue<'_> {
        match self {
            Marginal::Numeric(v) => {
                let t = u * (v.len() + 1) as f64;
                let x = if t <= 1.0 {
                    v[0]
                } else if t >= v.len() as f64 {
                    v[v.len() - 1]
                } else {
                    let lo = t.floor() as usize;
                    let frac = t - lo as f64;
                    v[lo - 1] + frac * (v[lo] - v[lo - 1])
                };
                QuantileValue::Num(x)
            }
            Marginal::Categorical { categories, cumulative } => {
                let i = cumulative.partition_point(|&c| c < u).min(categories.len() - 1);
                QuantileValue::Cat(&categories[i])
            }
        }
    }
}

pub enum QuantileValue<'a> {
    Num(f64),
    Cat(&'a str),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CopulaModel {
    pub schema: Schema,
    pub marginals: Vec<Marginal>,
    /// Latent normal correlation, unit diagonal, positive semi-definite.
    pub correlation: DMatrix<f64>,
}

fn standard_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal is valid")
}

/// Symmetric eigenvalue clipping followed by rescaling to a unit diagonal.
fn nearest_correlation(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = m.clone().symmetric_eigen();
    if eig.eigenvalues.iter().all(|&l| l >= 0.0) {
        return m.clone();
    }
    let clipped = eig.eigenvalues.map(|l| l.max(1e-12));
    let mut out = &eig.eigenvectors * DMatrix::from_diagonal(&clipped) * eig.eigenvectors.transpose();
    let d = DVector::from_iterator(out.nrows(), out.diagonal().iter().map(|v| 1.0 / v.sqrt()));
    for i in 0..out.nrows() {
        for j in 0..out.ncols() {
            out[(i, j)] *= d[i] * d[j];
        }
    }
    for i in 0..out.nrows() {
        out[(i, i)] = 1.0;
    }
    out
}

/// Fits marginals and the latent correlation. Ranks are turned into
/// `rank / (n + 1)` scores and mapped through the normal quantile function;
/// categorical columns are ranked by their position in the schema.
pub fn fit_gaussian_copula(data: &Dataset) -> Result<CopulaModel> {
    let n = data.n_rows();
    if n < 3 {
        return Err(Error::insufficient("Gaussian copula needs at least 3 rows"));
    }
    let normal = standard_normal();
    let mut marginals = Vec::with_capacity(data.n_cols());
    let mut latent: Vec<Vec<f64>> = Vec::with_capacity(data.n_cols());
    for (spec, col) in data.schema().columns.iter().zip(data.columns()) {
        let codes: Vec<f64> = match (col, &spec.kind) {
            (Column::Numeric(v), _) => {
                let mut sorted = v.clone();
                sorted.sort_by(f64::total_cmp);
                marginals.push(Marginal::Numeric(sorted));
                v.clone()
            }
            (Column::Categorical(v), ColumnKind::Categorical { categories }) => {
                let idx: Vec<usize> = v
                    .iter()
                    .map(|l| categories.iter().position(|c| c == l).unwrap_or(0))
                    .collect();
                let mut counts = vec![0usize; categories.len()];
                for &i in &idx {
                    counts[i] += 1;
                }
                let mut acc = 0usize;
                let cumulative = counts
                    .iter()
                    .map(|c| {
                        acc += c;
                        acc as f64 / n as f64
                    })
                    .collect();
                marginals.push(Marginal::Categorical {
                    categories: categories.clone(),
                    cumulative,
                });
                idx.into_iter().map(|i| i as f64).collect()
            }
            _ => unreachable!("dataset columns agree with their schema"),
        };
        latent.push(
            average_ranks(&codes)
                .into_iter()
                .map(|r| normal.inverse_cdf(r / (n + 1) as f64))
                .collect(),
        );
    }
    let d = latent.len();
    let mut corr = DMatrix::identity(d, d);
    for i in 0..d {
        for j in i + 1..d {
            let r = pearson(&latent[i], &latent[j]).unwrap_or(0.0);
            corr[(i, j)] = r;
            corr[(j, i)] = r;
        }
        if pearson(&latent[i], &latent[i]).is_none() {
            warn!(
                "column `{}` is constant; it is modelled as independent",
                data.schema().columns[i].name
            );
        }
    }
    Ok(CopulaModel {
        schema: data.schema().clone(),
        marginals,
        correlation: nearest_correlation(&corr),
    })
}

/// Draws `n` rows: correlated normals, mapped to uniforms by the normal CDF,
/// then through each column's inverse marginal.
pub fn sample_gaussian_copula(model: &CopulaModel, n: usize, seed: u64) -> Result<Dataset> {
    let d = model.marginals.len();
    let factor = psd_factor(&model.correlation)?;
    let normal = standard_normal();
    let mut rng = rng_from_seed(seed);
    let mut num: Vec<Vec<f64>> = vec![Vec::with_capacity(n); d];
    let mut cat: Vec<Vec<String>> = vec![Vec::with_capacity(n); d];
    for _ in 0..n {
        let z = DVector::from_iterator(d, (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)));
        let y = &factor * z;
        for (j, m) in model.marginals.iter().enumerate() {
            match m.quantile(normal.cdf(y[j])) {
                QuantileValue::Num(x) => num[j].push(x),
                QuantileValue::Cat(l) => cat[j].push(l.to_string()),
            }
        }
    }
    let columns = model
        .marginals
        .iter()
        .zip(num.into_iter().zip(cat))
        .map(|(m, (nv, cv))| match m {
            Marginal::Numeric(_) => Column::Numeric(nv),
            Marginal::Categorical { .. } => Column::Categorical(cv),
        })
        .collect();
    Dataset::new(model.schema.clone(), columns)
}
