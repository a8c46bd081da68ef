use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::tabular::{Column, Dataset};

/// Two-sample KS statistic `sup |F_n - G_m|` for real samples.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return f64::NAN;
    }
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n, m) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < x.len() && j < y.len() {
        let t = x[i].min(y[j]);
        while i < x.len() && x[i] == t {
            i += 1;
        }
        while j < y.len() && y[j] == t {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// KS statistic for labels, with the CDF taken over `order`. Labels missing
/// from `order` are placed after it, sorted.
pub fn ks_statistic_categorical(a: &[String], b: &[String], order: &[String]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return f64::NAN;
    }
    let mut levels: Vec<&str> = order.iter().map(String::as_str).collect();
    let mut extra: Vec<&str> = a
        .iter()
        .chain(b)
        .map(String::as_str)
        .filter(|l| !order.iter().any(|o| o == l))
        .collect();
    extra.sort_unstable();
    extra.dedup();
    levels.extend(extra);
    let pos: HashMap<&str, usize> = levels.iter().enumerate().map(|(i, l)| (*l, i)).collect();
    let hist = |v: &[String]| {
        let mut h = vec![0usize; levels.len()];
        for l in v {
            h[pos[l.as_str()]] += 1;
        }
        h
    };
    let (ha, hb) = (hist(a), hist(b));
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut ca, mut cb) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    for (p, q) in ha.iter().zip(&hb) {
        ca += p;
        cb += q;
        d = d.max((ca as f64 / n - cb as f64 / m).abs());
    }
    d
}

/// Per-column `1 - D`, in the original's column order.
pub fn ks_per_column(original: &Dataset, synthetic: &Dataset) -> Result<Vec<(String, f64)>> {
    if original.n_cols() == 0 {
        return Err(Error::invalid("KS similarity needs at least one column"));
    }
    if original.n_rows() == 0 || synthetic.n_rows() == 0 {
        return Err(Error::insufficient("KS similarity of an empty dataset"));
    }
    let mut out = Vec::with_capacity(original.n_cols());
    for (spec, col) in original.schema().columns.iter().zip(original.columns()) {
        let d = match (col, synthetic.column(&spec.name)?) {
            (Column::Numeric(a), Column::Numeric(b)) => ks_statistic(a, b),
            (Column::Categorical(a), Column::Categorical(b)) => {
                ks_statistic_categorical(a, b, spec.categories().unwrap_or(&[]))
            }
            _ => {
                return Err(Error::SchemaMismatch(format!(
                    "column `{}` differs in kind",
                    spec.name
                )))
            }
        };
        out.push((spec.name.clone(), 1.0 - d));
    }
    Ok(out)
}

/// Mean over columns of `1 - D`.
pub fn ks_similarity(original: &Dataset, synthetic: &Dataset) -> Result<f64> {
    let per = ks_per_column(original, synthetic)?;
    Ok(per.iter().map(|p| p.1).sum::<f64>() / per.len() as f64)
}
