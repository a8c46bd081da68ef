use std::collections::BTreeMap;

use rand::seq::{index, SliceRandom};
use rand::Rng;

use super::Dataset;
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

const MIN_SPLIT_ROWS: usize = 10;

#[derive(Debug, Clone)]
pub struct SplitPair {
    pub train: Dataset,
    pub test: Dataset,
    /// Fraction of rows that went to `test`.
    pub ratio: f64,
    pub seed: u64,
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
}

/// Test share by dataset size: 0.3 below 2,000 rows, 0.2 otherwise.
pub fn test_fraction_for(n: usize) -> f64 {
    if n < 2_000 {
        0.3
    } else {
        0.2
    }
}

/// Seeded train/test split whose ratio depends on the dataset size.
///
/// With `stratify` set, each class of that column is split separately so the
/// class balance is preserved. Row order inside each side follows the input.
pub fn dynamic_train_test_split(
    dataset: &Dataset,
    seed: u64,
    stratify: Option<&str>,
) -> Result<SplitPair> {
    let n = dataset.n_rows();
    if n < MIN_SPLIT_ROWS {
        return Err(Error::insufficient(format!(
            "train/test split needs at least {MIN_SPLIT_ROWS} rows, got {n}"
        )));
    }
    let ratio = test_fraction_for(n);
    let mut rng = rng_from_seed(seed);

    let groups: Vec<Vec<usize>> = match stratify {
        None => vec![(0..n).collect()],
        Some(col) => {
            let column = dataset.column(col)?;
            let mut by_label: BTreeMap<String, Vec<usize>> = BTreeMap::new();
            for r in 0..n {
                by_label.entry(column.value(r).label()).or_default().push(r);
            }
            by_label.into_values().collect()
        }
    };

    let mut test_indices = Vec::new();
    let mut train_indices = Vec::new();
    for mut g in groups {
        g.shuffle(&mut rng);
        let n_test = (g.len() as f64 * ratio).round() as usize;
        test_indices.extend_from_slice(&g[..n_test]);
        train_indices.extend_from_slice(&g[n_test..]);
    }
    test_indices.sort_unstable();
    train_indices.sort_unstable();

    Ok(SplitPair {
        train: dataset.take_rows(&train_indices),
        test: dataset.take_rows(&test_indices),
        ratio,
        seed,
        train_indices,
        test_indices,
    })
}

/// Seeded row sample. Without replacement the rows come out in random order,
/// so `n == n_rows` yields a permutation.
pub fn sample_rows(dataset: &Dataset, n: usize, with_replacement: bool, seed: u64) -> Result<Dataset> {
    let rows = sample_indices(dataset.n_rows(), n, with_replacement, seed)?;
    Ok(dataset.take_rows(&rows))
}

pub(crate) fn sample_indices(
    len: usize,
    n: usize,
    with_replacement: bool,
    seed: u64,
) -> Result<Vec<usize>> {
    let mut rng = rng_from_seed(seed);
    if with_replacement {
        if len == 0 && n > 0 {
            return Err(Error::insufficient("cannot sample from an empty dataset"));
        }
        Ok((0..n).map(|_| rng.random_range(0..len)).collect())
    } else {
        if n > len {
            return Err(Error::invalid(format!(
                "cannot draw {n} rows without replacement from {len}"
            )));
        }
        Ok(index::sample(&mut rng, len, n).into_vec())
    }
}
