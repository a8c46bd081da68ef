use log::warn;
use nalgebra::{DMatrix, DVector};
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::psd_factor;
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;
use crate::tabular::{Column, ColumnKind, Dataset, Schema};

pub const DEFAULT_COMPONENTS: usize = 5;
/// Ridge added to covariances, on the unit-scaled encoding.
pub const COVARIANCE_REGULARIZATION: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GmmOptions {
    pub k: usize,
    pub seed: u64,
    pub max_iter: usize,
    /// Stop once the mean log-likelihood gains less than this.
    pub tol: f64,
    pub regularization: f64,
}

impl Default for GmmOptions {
    fn default() -> Self {
        GmmOptions {
            k: DEFAULT_COMPONENTS,
            seed: 0,
            max_iter: 200,
            tol: 1e-6,
            regularization: COVARIANCE_REGULARIZATION,
        }
    }
}

/// Full-covariance Gaussian mixture over the unit-scaled encoding of a
/// schema: numeric columns map to `[0, 1]` on their range and categorical
/// columns to `index / (levels - 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GmmModel {
    pub schema: Schema,
    pub weights: Vec<f64>,
    pub means: Vec<DVector<f64>>,
    pub covariances: Vec<DMatrix<f64>>,
    /// Mean log-likelihood per record after every EM iteration.
    pub log_likelihood_trace: Vec<f64>,
    pub converged: bool,
}

fn encode(data: &Dataset) -> Vec<DVector<f64>> {
    let d = data.n_cols();
    let mut rows = vec![DVector::zeros(d); data.n_rows()];
    for (j, (spec, col)) in data.schema().columns.iter().zip(data.columns()).enumerate() {
        match (col, &spec.kind) {
            (Column::Numeric(v), ColumnKind::Numeric { min, max }) => {
                for (r, &x) in v.iter().enumerate() {
                    rows[r][j] = if data.is_normalized() {
                        x
                    } else if max > min {
                        ((x - min) / (max - min)).clamp(0.0, 1.0)
                    } else {
                        0.0
                    };
                }
            }
            (Column::Categorical(v), ColumnKind::Categorical { categories }) => {
                let span = (categories.len().max(2) - 1) as f64;
                for (r, l) in v.iter().enumerate() {
                    let i = categories.iter().position(|c| c == l).unwrap_or(0);
                    rows[r][j] = i as f64 / span;
                }
            }
            _ => unreachable!("dataset columns agree with their schema"),
        }
    }
    rows
}

fn decode(schema: &Schema, rows: &[DVector<f64>]) -> Result<Dataset> {
    let columns = schema
        .columns
        .iter()
        .enumerate()
        .map(|(j, spec)| match &spec.kind {
            ColumnKind::Numeric { min, max } => Column::Numeric(
                rows.iter()
                    .map(|r| min + r[j].clamp(0.0, 1.0) * (max - min))
                    .collect(),
            ),
            ColumnKind::Categorical { categories } => {
                let last = categories.len() - 1;
                Column::Categorical(
                    rows.iter()
                        .map(|r| {
                            let i = (r[j] * last as f64).round().clamp(0.0, last as f64) as usize;
                            categories[i].clone()
                        })
                        .collect(),
                )
            }
        })
        .collect();
    Dataset::new(schema.clone(), columns)
}

struct Component {
    log_norm: f64,
    chol: DMatrix<f64>,
}

fn prepare(cov: &DMatrix<f64>) -> Result<Component> {
    let d = cov.nrows();
    let chol = cov
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Numerical("covariance is not positive definite".into()))?;
    let l = chol.l();
    let log_det = 2.0 * l.diagonal().iter().map(|v| v.ln()).sum::<f64>();
    Ok(Component {
        log_norm: -0.5 * (d as f64 * (2.0 * std::f64::consts::PI).ln() + log_det),
        chol: l,
    })
}

fn log_density(c: &Component, mean: &DVector<f64>, x: &DVector<f64>) -> f64 {
    let diff = x - mean;
    let z = c
        .chol
        .solve_lower_triangular(&diff)
        .expect("Cholesky factor has a positive diagonal");
    c.log_norm - 0.5 * z.norm_squared()
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + v.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Responsibilities and total log-likelihood.
fn e_step(
    x: &[DVector<f64>],
    weights: &[f64],
    means: &[DVector<f64>],
    covs: &[DMatrix<f64>],
) -> Result<(Vec<Vec<f64>>, f64)> {
    let comps = covs.iter().map(prepare).collect::<Result<Vec<_>>>()?;
    let k = weights.len();
    let mut resp = Vec::with_capacity(x.len());
    let mut ll = 0.0;
    let mut buf = vec![0.0; k];
    for xi in x {
        for c in 0..k {
            buf[c] = weights[c].ln() + log_density(&comps[c], &means[c], xi);
        }
        let lse = log_sum_exp(&buf);
        ll += lse;
        resp.push(buf.iter().map(|v| (v - lse).exp()).collect());
    }
    Ok((resp, ll))
}

/// Weighted means and covariances, each covariance with `lambda I` added.
fn m_step(
    x: &[DVector<f64>],
    resp: &[Vec<f64>],
    k: usize,
    lambda: f64,
) -> (Vec<f64>, Vec<DVector<f64>>, Vec<DMatrix<f64>>) {
    let n = x.len();
    let d = x[0].len();
    let mut weights = Vec::with_capacity(k);
    let mut means = Vec::with_capacity(k);
    let mut covs = Vec::with_capacity(k);
    for c in 0..k {
        let nk = resp.iter().map(|r| r[c]).sum::<f64>().max(1e-300);
        let mut mean = DVector::zeros(d);
        for (xi, r) in x.iter().zip(resp) {
            mean.axpy(r[c], xi, 1.0);
        }
        mean /= nk;
        let mut cov = DMatrix::zeros(d, d);
        for (xi, r) in x.iter().zip(resp) {
            let diff = xi - &mean;
            cov.ger(r[c], &diff, &diff, 1.0);
        }
        cov /= nk;
        for i in 0..d {
            cov[(i, i)] += lambda;
        }
        weights.push(nk / n as f64);
        means.push(mean);
        covs.push(cov);
    }
    (weights, means, covs)
}

/// k-means++ seeding followed by hard assignment to the nearest seed.
fn initial_responsibilities(x: &[DVector<f64>], k: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = rng_from_seed(seed);
    let n = x.len();
    let mut centers = vec![x[rng.random_range(0..n)].clone()];
    let mut d2: Vec<f64> = x.iter().map(|xi| (xi - &centers[0]).norm_squared()).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut t = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, w) in d2.iter().enumerate() {
                if t < *w {
                    pick = i;
                    break;
                }
                t -= w;
            }
            pick
        } else {
            rng.random_range(0..n)
        };
        centers.push(x[next].clone());
        for (v, xi) in d2.iter_mut().zip(x) {
            *v = v.min((xi - &centers[centers.len() - 1]).norm_squared());
        }
    }
    x.iter()
        .map(|xi| {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (c, m) in centers.iter().enumerate() {
                let dist = (xi - m).norm_squared();
                if dist < best_d {
                    best_d = dist;
                    best = c;
                }
            }
            (0..k).map(|c| if c == best { 1.0 } else { 0.0 }).collect()
        })
        .collect()
}

/// Fits a Gaussian mixture by EM. Categorical columns are ordinal-encoded,
/// so their structure is only approximated.
pub fn fit_gmm(data: &Dataset, options: &GmmOptions) -> Result<GmmModel> {
    let k = options.k;
    let n = data.n_rows();
    if k == 0 || options.max_iter == 0 {
        return Err(Error::invalid("GMM needs k >= 1 and max_iter >= 1"));
    }
    if data.n_cols() == 0 {
        return Err(Error::invalid("GMM needs at least one column"));
    }
    if n < k {
        return Err(Error::insufficient(format!("GMM with {k} components needs at least {k} rows, got {n}")));
    }
    if data.schema().columns.iter().any(|c| !c.is_numeric()) {
        warn!("categorical columns are ordinal-encoded for the Gaussian mixture");
    }
    let x = encode(data);
    if k > 1 {
        let mut distinct: Vec<Vec<u64>> = x.iter().map(|r| r.iter().map(|v| v.to_bits()).collect()).collect();
        distinct.sort_unstable();
        distinct.dedup();
        if distinct.len() < k {
            return Err(Error::insufficient(format!(
                "only {} distinct rows for {k} components; the mixture would collapse",
                distinct.len()
            )));
        }
    }
    let lambda = options.regularization;

    let mut resp = initial_responsibilities(&x, k, options.seed);
    let (mut weights, mut means, mut covs) = m_step(&x, &resp, k, lambda);
    let mut log_likelihood_trace = Vec::new();
    let mut converged = false;
    for _ in 0..options.max_iter {
        let (r, ll) = e_step(&x, &weights, &means, &covs)?;
        let ll = ll / n as f64;
        if let Some(&prev) = log_likelihood_trace.last() {
            if ll - prev < options.tol {
                log_likelihood_trace.push(ll);
                converged = true;
                break;
            }
        }
        log_likelihood_trace.push(ll);
        resp = r;
        (weights, means, covs) = m_step(&x, &resp, k, lambda);
    }
    Ok(GmmModel {
        schema: data.schema().clone(),
        weights,
        means,
        covariances: covs,
        log_likelihood_trace,
        converged,
    })
}

impl GmmModel {
    /// Builds a model from explicit parameters on the unit-scaled encoding.
    pub fn from_parts(
        schema: Schema,
        weights: Vec<f64>,
        means: Vec<DVector<f64>>,
        covariances: Vec<DMatrix<f64>>,
    ) -> Result<Self> {
        let d = schema.len();
        let k = weights.len();
        if k == 0 || means.len() != k || covariances.len() != k {
            return Err(Error::invalid("GMM parameters disagree on the component count"));
        }
        if means.iter().any(|m| m.len() != d) || covariances.iter().any(|c| c.shape() != (d, d)) {
            return Err(Error::invalid("GMM parameters disagree with the schema width"));
        }
        if weights.iter().any(|w| *w < 0.0) || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::invalid("GMM weights must form a probability vector"));
        }
        Ok(GmmModel {
            schema,
            weights,
            means,
            covariances,
            log_likelihood_trace: Vec::new(),
            converged: true,
        })
    }

    /// Draws `n` encoded rows and the component each came from.
    pub fn sample_encoded(&self, n: usize, seed: u64) -> Result<(Vec<DVector<f64>>, Vec<usize>)> {
        let factors = self.covariances.iter().map(psd_factor).collect::<Result<Vec<_>>>()?;
        let d = self.schema.len();
        let mut rng = rng_from_seed(seed);
        let mut rows = Vec::with_capacity(n);
        let mut labels = Vec::with_capacity(n);
        for _ in 0..n {
            let mut u: f64 = rng.random();
            let mut c = self.weights.len() - 1;
            for (i, w) in self.weights.iter().enumerate() {
                if u < *w {
                    c = i;
                    break;
                }
                u -= w;
            }
            let z = DVector::from_iterator(d, (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)));
            rows.push(&self.means[c] + &factors[c] * z);
            labels.push(c);
        }
        Ok((rows, labels))
    }
}

/// Draws `n` rows, mapping numeric values back onto their range (clamped)
/// and categorical codes to the nearest category.
pub fn sample_gmm(model: &GmmModel, n: usize, seed: u64) -> Result<Dataset> {
    let (rows, _) = model.sample_encoded(n, seed)?;
    decode(&model.schema, &rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tabular::ColumnSpec;

    fn unit_schema(d: usize) -> Schema {
        Schema::new((0..d).map(|i| ColumnSpec::numeric(format!("x{i}"), 0.0, 1.0)).collect()).unwrap()
    }

    fn cloud(points: Vec<Vec<f64>>) -> Dataset {
        let d = points[0].len();
        let cols = (0..d).map(|j| Column::Numeric(points.iter().map(|p| p[j]).collect())).collect();
        Dataset::new(unit_schema(d), cols).unwrap()
    }

    fn random_cloud(n: usize, d: usize, seed: u64) -> Dataset {
        let mut rng = rng_from_seed(seed);
        cloud((0..n).map(|_| (0..d).map(|_| rng.random::<f64>()).collect()).collect())
    }

    #[test]
    fn single_component_is_closed_form() {
        let data = random_cloud(200, 3, 1);
        let model = fit_gmm(&data, &GmmOptions { k: 1, ..Default::default() }).unwrap();
        let x = encode(&data);
        let n = x.len() as f64;
        let mean = x.iter().fold(DVector::zeros(3), |a, b| a + b) / n;
        let mut cov = x.iter().fold(DMatrix::zeros(3, 3), |a, b| a + (b - &mean) * (b - &mean).transpose()) / n;
        cov += DMatrix::identity(3, 3) * COVARIANCE_REGULARIZATION;
        assert!((&model.means[0] - mean).abs().max() < 1e-12);
        assert!((&model.covariances[0] - cov).abs().max() < 1e-12);
        assert_eq!(model.weights, vec![1.0]);
    }

    #[test]
    fn recovers_separated_clusters() {
        let mut rng = rng_from_seed(2);
        let centers = [[0.2, 0.3], [0.75, 0.8]];
        let pts = (0..600)
            .map(|i| {
                let c = centers[i % 2];
                c.iter()
                    .map(|m| m + 0.03 * rng.sample::<f64, _>(StandardNormal))
                    .collect()
            })
            .collect();
        let model = fit_gmm(&cloud(pts), &GmmOptions { k: 2, seed: 5, ..Default::default() }).unwrap();
        for c in centers {
            let found = model
                .means
                .iter()
                .any(|m| (m[0] - c[0]).abs() < 0.1 && (m[1] - c[1]).abs() < 0.1);
            assert!(found, "{c:?} not in {:?}", model.means);
        }
        for w in &model.weights {
            assert!((w - 0.5).abs() < 0.05);
        }
    }

    #[test]
    fn log_likelihood_never_decreases() {
        for seed in 0..10 {
            let data = random_cloud(120, 3, 100 + seed);
            let model = fit_gmm(&data, &GmmOptions { k: 3, seed, tol: 0.0, max_iter: 60, ..Default::default() })
                .unwrap();
            for pair in model.log_likelihood_trace.windows(2) {
                assert!(pair[1] >= pair[0] - 1e-8, "seed {seed}: {pair:?}");
            }
        }
    }

    #[test]
    fn fit_errors() {
        let data = random_cloud(3, 2, 1);
        assert!(fit_gmm(&data, &GmmOptions { k: 4, ..Default::default() }).is_err());
        let same = cloud(vec![vec![0.5, 0.5]; 10]);
        assert!(fit_gmm(&same, &GmmOptions { k: 2, ..Default::default() }).is_err());
        let one = fit_gmm(&same, &GmmOptions { k: 1, ..Default::default() }).unwrap();
        assert!(sample_gmm(&one, 5, 0).is_ok());
    }

    #[test]
    fn zero_covariance_samples_the_mean() {
        let mean = DVector::from_vec(vec![0.25, 0.5]);
        let model =
            GmmModel::from_parts(unit_schema(2), vec![1.0], vec![mean.clone()], vec![DMatrix::zeros(2, 2)]).unwrap();
        let (rows, _) = model.sample_encoded(20, 3).unwrap();
        assert!(rows.iter().all(|r| r == &mean));
    }

    #[test]
    fn component_frequencies_and_mean() {
        let weights = vec![0.2, 0.5, 0.3];
        let means = vec![
            DVector::from_vec(vec![0.1, 0.1]),
            DVector::from_vec(vec![0.5, 0.9]),
            DVector::from_vec(vec![0.8, 0.3]),
        ];
        let covs = vec![DMatrix::identity(2, 2) * 0.01; 3];
        let model = GmmModel::from_parts(unit_schema(2), weights.clone(), means.clone(), covs).unwrap();
        let n = 20_000;
        let (rows, labels) = model.sample_encoded(n, 7).unwrap();
        for (c, w) in weights.iter().enumerate() {
            let freq = labels.iter().filter(|&&l| l == c).count() as f64 / n as f64;
            let sigma = (w * (1.0 - w) / n as f64).sqrt();
            assert!((freq - w).abs() < 3.0 * sigma, "component {c}: {freq}");
        }
        let mixture_mean = means.iter().zip(&weights).fold(DVector::zeros(2), |a, (m, w)| a + m * *w);
        let sample_mean = rows.iter().fold(DVector::zeros(2), |a, r| a + r) / n as f64;
        // spread of each coordinate is below 0.5, so 4 standard errors < 0.015
        assert!((sample_mean - mixture_mean).abs().max() < 0.015);
    }

    #[test]
    fn categorical_round_trip() {
        let data = Dataset::from_columns([
            ("x", Column::Numeric((0..40).map(|i| f64::from(i % 7)).collect())),
            ("c", Column::Categorical((0..40).map(|i| ["lo", "mid", "hi"][i % 3].to_string()).collect())),
        ])
        .unwrap();
        let model = fit_gmm(&data, &GmmOptions { k: 2, ..Default::default() }).unwrap();
        let s = sample_gmm(&model, 100, 1).unwrap();
        assert_eq!(s.schema(), data.schema());
        assert!(s.numeric("x").unwrap().iter().all(|v| (0.0..=6.0).contains(v)));
    }
}
