use std::collections::BTreeMap;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tabular::{Column, Dataset};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationMethod {
    Pearson,
    Spearman,
}

/// Square matrix with row/column labels; `None` marks undefined entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledMatrix {
    pub names: Vec<String>,
    pub values: Vec<Vec<Option<f64>>>,
}

/// Pearson correlation, `None` when either side has zero variance.
///
/// Sums run over the pairs in sorted order, so permuting rows leaves the
/// result bit-for-bit unchanged.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len();
    if n < 2 || y.len() != n || is_constant(x) || is_constant(y) {
        return None;
    }
    let mut pairs: Vec<(f64, f64)> = x.iter().copied().zip(y.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n as f64;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in &pairs {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

// a constant column has no correlation even when rounding makes its
// computed variance positive
fn is_constant(v: &[f64]) -> bool {
    v.iter().all(|&a| a == v[0])
}

/// 1-based ranks with ties sharing their average rank.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && x[order[j + 1]] == x[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    pearson(&average_ranks(x), &average_ranks(y))
}

/// Columns entering the correlation: numeric ones, plus (Spearman only)
/// categorical ones with a configured category order, as positions in it.
fn usable_columns(
    data: &Dataset,
    method: CorrelationMethod,
    category_order: &BTreeMap<String, Vec<String>>,
) -> Result<Vec<(String, Vec<f64>)>> {
    let mut out = Vec::new();
    for (spec, col) in data.schema().columns.iter().zip(data.columns()) {
        match col {
            Column::Numeric(v) => out.push((spec.name.clone(), v.clone())),
            Column::Categorical(v) => {
                let Some(order) = category_order.get(&spec.name) else {
                    continue;
                };
                if method == CorrelationMethod::Pearson {
                    continue;
                }
                let codes = v
                    .iter()
                    .map(|label| {
                        order.iter().position(|o| o == label).map(|p| p as f64).ok_or_else(|| {
                            Error::invalid(format!(
                                "label `{label}` of `{}` missing from its category order",
                                spec.name
                            ))
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                out.push((spec.name.clone(), codes));
            }
        }
    }
    Ok(out)
}

pub fn correlation_matrix(
    data: &Dataset,
    method: CorrelationMethod,
    category_order: &BTreeMap<String, Vec<String>>,
) -> Result<LabeledMatrix> {
    let cols = usable_columns(data, method, category_order)?;
    let prepared: Vec<Vec<f64>> = cols
        .iter()
        .map(|(_, v)| match method {
            CorrelationMethod::Pearson => v.clone(),
            CorrelationMethod::Spearman => average_ranks(v),
        })
        .collect();
    let d = cols.len();
    let mut values = vec![vec![None; d]; d];
    for i in 0..d {
        for j in i..d {
            let r = pearson(&prepared[i], &prepared[j]);
            let r = if i == j { r.map(|_| 1.0) } else { r };
            values[i][j] = r;
            values[j][i] = r;
        }
    }
    Ok(LabeledMatrix {
        names: cols.into_iter().map(|c| c.0).collect(),
        values,
    })
}

/// Mean over column pairs of `1 - |S - O| / 2`; pairs undefined on either
/// side are skipped.
pub fn similarity_from_matrices(original: &LabeledMatrix, synthetic: &LabeledMatrix) -> Result<f64> {
    if original.names != synthetic.names {
        return Err(Error::SchemaMismatch("correlation matrices over different columns".into()));
    }
    let d = original.names.len();
    if d < 2 {
        return Err(Error::insufficient("correlation similarity needs two usable columns"));
    }
    let (mut sum, mut count) = (0.0, 0usize);
    for i in 0..d {
        for j in i + 1..d {
            match (original.values[i][j], synthetic.values[i][j]) {
                (Some(o), Some(s)) => {
                    sum += 1.0 - (s - o).abs() / 2.0;
                    count += 1;
                }
                _ => warn!(
                    "skipping pair ({}, {}): zero variance",
                    original.names[i], original.names[j]
                ),
            }
        }
    }
    if count == 0 {
        return Err(Error::insufficient("no column pair with non-zero variance"));
    }
    Ok(sum / count as f64)
}

pub fn correlation_similarity(
    original: &Dataset,
    synthetic: &Dataset,
    method: CorrelationMethod,
    category_order: &BTreeMap<String, Vec<String>>,
) -> Result<f64> {
    similarity_from_matrices(
        &correlation_matrix(original, method, category_order)?,
        &correlation_matrix(synthetic, method, category_order)?,
    )
}
