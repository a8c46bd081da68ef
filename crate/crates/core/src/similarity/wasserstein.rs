use log::warn;

use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::tabular::{sample_rows, Column, Dataset};

/// Wasserstein-1 distance between two empirical samples on the line,
/// computed as the area between their CDFs.
pub fn wasserstein_1d(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return f64::NAN;
    }
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n, m) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut prev = x[0].min(y[0]);
    let mut area = 0.0;
    while i < x.len() || j < y.len() {
        let next = match (x.get(i), y.get(j)) {
            (Some(&p), Some(&q)) => p.min(q),
            (Some(&p), None) => p,
            (None, Some(&q)) => q,
            (None, None) => unreachable!(),
        };
        let fx = i as f64 / n;
        let gy = j as f64 / m;
        area += (fx - gy).abs() * (next - prev);
        while i < x.len() && x[i] == next {
            i += 1;
        }
        while j < y.len() && y[j] == next {
            j += 1;
        }
        prev = next;
    }
    area
}

/// Per-numeric-column 1-D Wasserstein distances, in schema order.
pub fn wasserstein_per_column(original: &Dataset, synthetic: &Dataset) -> Result<Vec<(String, f64)>> {
    let mut out = Vec::new();
    for (spec, col) in original.schema().columns.iter().zip(original.columns()) {
        if let Column::Numeric(a) = col {
            let b = synthetic.numeric(&spec.name)?;
            if a.is_empty() || b.is_empty() {
                return Err(Error::insufficient("Wasserstein distance of an empty column"));
            }
            out.push((spec.name.clone(), wasserstein_1d(a, b)));
        }
    }
    if out.is_empty() {
        return Err(Error::WrongKind {
            column: "*".into(),
            expected: "numeric (no numeric columns for Wasserstein distance)",
        });
    }
    Ok(out)
}

/// Mean over numeric columns of the exact 1-D Wasserstein-1 distance.
pub fn wasserstein_exact_1d(original: &Dataset, synthetic: &Dataset) -> Result<f64> {
    let per = wasserstein_per_column(original, synthetic)?;
    Ok(per.iter().map(|p| p.1).sum::<f64>() / per.len() as f64)
}

/// [`wasserstein_exact_1d`] on seeded row samples of both datasets.
pub fn wasserstein_sampled(
    original: &Dataset,
    synthetic: &Dataset,
    sample_size: usize,
    seed: u64,
) -> Result<f64> {
    if sample_size < 2 {
        return Err(Error::invalid("Wasserstein sample size must be at least 2"));
    }
    // same stream on both sides so identical inputs give identical samples
    let draw = |d: &Dataset| -> Result<Dataset> {
        if sample_size >= d.n_rows() {
            if sample_size > d.n_rows() {
                warn!(
                    "Wasserstein sample of {sample_size} exceeds {} rows; using all rows",
                    d.n_rows()
                );
            }
            Ok(d.clone())
        } else {
            sample_rows(d, sample_size, false, derive_seed(seed, 1))
        }
    };
    wasserstein_exact_1d(&draw(original)?, &draw(synthetic)?)
}
