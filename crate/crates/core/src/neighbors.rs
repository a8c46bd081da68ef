//! Exact nearest-neighbour search under the mixed numeric/categorical metric.
//!
//! Records are encoded once into dense rows (categorical labels become codes
//! shared across every encoded dataset) and then scanned exhaustively. Scans
//! abandon a candidate as soon as its partial distance can no longer enter the
//! current top-k, which keeps the full scan affordable without approximation.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::tabular::{Column, Dataset};

#[derive(Debug, Clone)]
pub struct PointCloud {
    n: usize,
    dim: usize,
    data: Vec<f64>,
    is_cat: Vec<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub distance: f64,
}

impl PointCloud {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// Distance between row `i` of `self` and row `j` of `other`.
    pub fn distance_to(&self, i: usize, other: &PointCloud, j: usize) -> f64 {
        sq_dist(self.row(i), other.row(j), &self.is_cat, f64::INFINITY).sqrt()
    }
}

/// Encodes the given columns of several datasets with a shared codebook.
/// Numeric cells are used as-is, so callers normalize first.
pub fn encode_clouds<S: AsRef<str>>(datasets: &[&Dataset], columns: &[S]) -> Result<Vec<PointCloud>> {
    let first = datasets
        .first()
        .ok_or_else(|| Error::invalid("no dataset to encode"))?;
    let idx: Vec<usize> = columns
        .iter()
        .map(|c| first.schema().index_of(c.as_ref()))
        .collect::<Result<_>>()?;
    let is_cat: Vec<bool> = idx
        .iter()
        .map(|&i| !first.schema().columns[i].is_numeric())
        .collect();
    for d in &datasets[1..] {
        for (c, &cat) in columns.iter().zip(&is_cat) {
            let spec = d.schema().column(c.as_ref())?;
            if spec.is_numeric() == cat {
                return Err(Error::SchemaMismatch(format!(
                    "column `{}` changes kind between datasets",
                    c.as_ref()
                )));
            }
        }
    }

    let mut codebooks: Vec<HashMap<String, f64>> = vec![HashMap::new(); columns.len()];
    let dim = columns.len();
    let mut out = Vec::with_capacity(datasets.len());
    for d in datasets {
        let cols: Vec<&Column> = columns
            .iter()
            .map(|c| d.column(c.as_ref()))
            .collect::<Result<_>>()?;
        let n = d.n_rows();
        let mut data = vec![0.0; n * dim];
        for (k, col) in cols.iter().enumerate() {
            match col {
                Column::Numeric(v) => {
                    for (r, x) in v.iter().enumerate() {
                        data[r * dim + k] = *x;
                    }
                }
                Column::Categorical(v) => {
                    let book = &mut codebooks[k];
                    for (r, label) in v.iter().enumerate() {
                        let next = book.len() as f64;
                        data[r * dim + k] = *book.entry(label.clone()).or_insert(next);
                    }
                }
            }
        }
        out.push(PointCloud {
            n,
            dim,
            data,
            is_cat: is_cat.clone(),
        });
    }
    Ok(out)
}

/// Encodes all columns of a dataset pair.
pub fn encode_pair(a: &Dataset, b: &Dataset) -> Result<(PointCloud, PointCloud)> {
    let names: Vec<&str> = a.schema().names().collect();
    let mut clouds = encode_clouds(&[a, b], &names)?;
    let second = clouds.pop().unwrap();
    Ok((clouds.pop().unwrap(), second))
}

/// Squared distance; returns early with a value `>= bound` once the partial
/// sum reaches `bound`.
#[inline]
fn sq_dist(a: &[f64], b: &[f64], is_cat: &[bool], bound: f64) -> f64 {
    let mut acc = 0.0;
    for ((x, y), &cat) in a.iter().zip(b).zip(is_cat) {
        if cat {
            if x != y {
                acc += 1.0;
            }
        } else {
            let d = x - y;
            acc += d * d;
        }
        if acc >= bound {
            return acc;
        }
    }
    acc
}

/// The `k` nearest rows of `reference` to `query`, ordered by distance then
/// index. `exclude` removes one reference row (a point's own index).
pub fn k_nearest(
    reference: &PointCloud,
    query: &[f64],
    k: usize,
    exclude: Option<usize>,
) -> Vec<Neighbor> {
    let mut best: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
    if k == 0 {
        return Vec::new();
    }
    for j in 0..reference.n {
        if exclude == Some(j) {
            continue;
        }
        let bound = if best.len() == k {
            best[k - 1].0
        } else {
            f64::INFINITY
        };
        let d = sq_dist(query, reference.row(j), &reference.is_cat, bound);
        if d < bound {
            // strict: equal distances keep the lower index already stored
            let pos = best.partition_point(|&(bd, _)| bd <= d);
            best.insert(pos, (d, j));
            if best.len() > k {
                best.pop();
            }
        }
    }
    best.into_iter()
        .map(|(d, index)| Neighbor {
            index,
            distance: d.sqrt(),
        })
        .collect()
}

/// k-nearest neighbours in `reference` for every row of `queries`.
///
/// When `same_set` is true the two clouds are the same points and each query
/// skips its own index.
pub fn all_k_nearest(
    queries: &PointCloud,
    reference: &PointCloud,
    k: usize,
    same_set: bool,
) -> Vec<Vec<Neighbor>> {
    (0..queries.n)
        .into_par_iter()
        .map(|i| k_nearest(reference, queries.row(i), k, same_set.then_some(i)))
        .collect()
}
