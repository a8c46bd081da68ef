//! Baseline synthesizers: Gaussian mixture, Gaussian copula and plain row
//! resampling.

mod copula;
mod gmm;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use copula::{fit_gaussian_copula, sample_gaussian_copula, CopulaModel, Marginal};
pub use gmm::{fit_gmm, sample_gmm, GmmModel, GmmOptions, DEFAULT_COMPONENTS, COVARIANCE_REGULARIZATION};

use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::tabular::{sample_rows, Dataset};

/// Resamples rows of `data`; kept as a named generator so reports can label
/// it.
pub fn random_model(data: &Dataset, n: usize, with_replacement: bool, seed: u64) -> Result<Dataset> {
    sample_rows(data, n, with_replacement, seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    Gmm,
    Copula,
    Random,
}

impl std::str::FromStr for GeneratorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gmm" => Ok(GeneratorKind::Gmm),
            "copula" => Ok(GeneratorKind::Copula),
            "random" => Ok(GeneratorKind::Random),
            other => Err(Error::invalid(format!("unknown generator `{other}`"))),
        }
    }
}

/// Fits `kind` on `data` and draws `n` rows with default settings.
/// The random model samples with replacement only when `n` exceeds the data.
pub fn generate(kind: GeneratorKind, data: &Dataset, n: usize, seed: u64) -> Result<Dataset> {
    generate_with_components(kind, data, n, seed, DEFAULT_COMPONENTS)
}

/// [`generate`] with an explicit mixture size; `k` only affects the GMM.
pub fn generate_with_components(kind: GeneratorKind, data: &Dataset, n: usize, seed: u64, k: usize) -> Result<Dataset> {
    match kind {
        GeneratorKind::Gmm => {
            let model = fit_gmm(data, &GmmOptions { k, seed: derive_seed(seed, 41), ..Default::default() })?;
            sample_gmm(&model, n, derive_seed(seed, 42))
        }
        GeneratorKind::Copula => sample_gaussian_copula(&fit_gaussian_copula(data)?, n, derive_seed(seed, 43)),
        GeneratorKind::Random => random_model(data, n, n > data.n_rows(), derive_seed(seed, 44)),
    }
}

/// Matrix `B` with `B B^T = m`: the Cholesky factor when it exists,
/// otherwise an eigenvalue square root with small negative eigenvalues
/// clipped to zero. Clearly indefinite input is rejected.
pub(crate) fn psd_factor(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if let Some(c) = m.clone().cholesky() {
        return Ok(c.l());
    }
    let scale = m.diagonal().iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-300);
    let eig = m.clone().symmetric_eigen();
    if eig.eigenvalues.iter().any(|&l| l < -1e-9 * scale) {
        return Err(Error::Numerical("matrix is not positive semi-definite".into()));
    }
    let sqrt = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    Ok(&eig.eigenvectors * DMatrix::from_diagonal(&sqrt))
}
