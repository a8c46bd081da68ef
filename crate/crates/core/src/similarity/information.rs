use std::collections::{BTreeMap, HashMap};

use log::warn;

use super::correlation::LabeledMatrix;
use crate::error::{Error, Result};
use crate::tabular::{discretize_columns, Column, Dataset};

/// Integer codes (in sorted label order) plus the number of distinct labels.
fn codes(labels: &[String]) -> (Vec<usize>, usize) {
    let mut distinct: Vec<&str> = labels.iter().map(String::as_str).collect();
    distinct.sort_unstable();
    distinct.dedup();
    let map: HashMap<&str, usize> = distinct.iter().enumerate().map(|(i, l)| (*l, i)).collect();
    (labels.iter().map(|l| map[l.as_str()]).collect(), distinct.len())
}

fn entropy(counts: impl Iterator<Item = usize>, n: f64) -> f64 {
    counts
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// `2 I(X;Y) / (H(X) + H(Y))` from plug-in frequencies; 0 when both
/// entropies vanish.
pub fn normalized_mutual_information(x: &[String], y: &[String]) -> f64 {
    let n = x.len();
    if n == 0 || y.len() != n {
        return 0.0;
    }
    let (cx, kx) = codes(x);
    let (cy, ky) = codes(y);
    let mut joint = vec![0usize; kx * ky];
    let mut mx = vec![0usize; kx];
    let mut my = vec![0usize; ky];
    for (&a, &b) in cx.iter().zip(&cy) {
        joint[a * ky + b] += 1;
        mx[a] += 1;
        my[b] += 1;
    }
    let nf = n as f64;
    let hx = entropy(mx.iter().copied(), nf);
    let hy = entropy(my.iter().copied(), nf);
    if hx + hy <= 0.0 {
        return 0.0;
    }
    let mut mi = 0.0;
    for a in 0..kx {
        for b in 0..ky {
            let c = joint[a * ky + b];
            if c > 0 {
                let pxy = c as f64 / nf;
                mi += pxy * (pxy * nf * nf / (mx[a] as f64 * my[b] as f64)).ln();
            }
        }
    }
    (2.0 * mi / (hx + hy)).clamp(0.0, 1.0)
}

fn labels(col: &Column) -> &[String] {
    match col {
        Column::Categorical(v) => v,
        Column::Numeric(_) => unreachable!("discretized beforehand"),
    }
}

/// Pairwise NMI of a fully categorical dataset.
pub fn nmi_matrix(discrete: &Dataset) -> LabeledMatrix {
    let d = discrete.n_cols();
    let mut values = vec![vec![None; d]; d];
    for i in 0..d {
        for j in i..d {
            let a = labels(&discrete.columns()[i]);
            let b = labels(&discrete.columns()[j]);
            let v = normalized_mutual_information(a, b);
            values[i][j] = Some(v);
            values[j][i] = Some(v);
        }
    }
    LabeledMatrix {
        names: discrete.schema().names().map(str::to_string).collect(),
        values,
    }
}

/// Discretized copies of both datasets, binned on the original's ranges.
fn discretize_pair(original: &Dataset, synthetic: &Dataset, bins: usize) -> Result<(Dataset, Dataset)> {
    let reference = original.schema().clone();
    Ok((
        discretize_columns(original, &reference, bins)?,
        discretize_columns(&synthetic.align_to(&reference)?, &reference, bins)?,
    ))
}

/// NMI matrices of both datasets, numeric columns binned into `bins`
/// equal-width bins over the original's ranges.
pub fn nmi_matrices(original: &Dataset, synthetic: &Dataset, bins: usize) -> Result<(LabeledMatrix, LabeledMatrix)> {
    let (o, s) = discretize_pair(original, synthetic, bins)?;
    Ok((nmi_matrix(&o), nmi_matrix(&s)))
}

pub fn nmi_similarity_from(original: &LabeledMatrix, synthetic: &LabeledMatrix) -> Result<f64> {
    let d = original.names.len();
    if d < 2 {
        return Err(Error::insufficient("NMI similarity needs two columns"));
    }
    let (mut sum, mut count) = (0.0, 0usize);
    for i in 0..d {
        for j in i + 1..d {
            let (o, s) = (
                original.values[i][j].unwrap_or(0.0),
                synthetic.values[i][j].unwrap_or(0.0),
            );
            sum += 1.0 - (s - o).abs();
            count += 1;
        }
    }
    Ok(sum / count as f64)
}

/// Mean over column pairs of `1 - |NMI_synthetic - NMI_original|`.
pub fn nmi_similarity(original: &Dataset, synthetic: &Dataset, bins: usize) -> Result<f64> {
    let (o, s) = discretize_pair(original, synthetic, bins)?;
    for (name, col) in o.schema().names().zip(o.columns()) {
        if codes(labels(col)).1 < 2 {
            warn!("column `{name}` has zero entropy; its pairs get NMI 0");
        }
    }
    nmi_similarity_from(&nmi_matrix(&o), &nmi_matrix(&s))
}

/// Jensen-Shannon divergence (base 2) of two probability vectors over the
/// same support.
pub fn js_divergence(p: &[f64], q: &[f64]) -> f64 {
    let kl = |a: f64, m: f64| if a > 0.0 { a * (a / m).log2() } else { 0.0 };
    let mut d = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        let m = 0.5 * (a + b);
        d += 0.5 * kl(a, m) + 0.5 * kl(b, m);
    }
    d.clamp(0.0, 1.0)
}

fn frequencies(a: &[String], b: &[String]) -> (Vec<f64>, Vec<f64>) {
    let mut counts: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for l in a {
        counts.entry(l).or_default().0 += 1;
    }
    for l in b {
        counts.entry(l).or_default().1 += 1;
    }
    let (n, m) = (a.len() as f64, b.len() as f64);
    counts
        .values()
        .map(|&(x, y)| (x as f64 / n, y as f64 / m))
        .unzip()
}

/// Per-column `1 - JSD`; numeric columns use shared equal-width bins.
pub fn js_per_column(original: &Dataset, synthetic: &Dataset, bins: usize) -> Result<Vec<(String, f64)>> {
    if original.n_rows() == 0 || synthetic.n_rows() == 0 {
        return Err(Error::insufficient("Jensen-Shannon similarity of an empty dataset"));
    }
    if original.n_cols() == 0 {
        return Err(Error::invalid("Jensen-Shannon similarity needs at least one column"));
    }
    let (o, s) = discretize_pair(original, synthetic, bins)?;
    Ok(o.schema()
        .names()
        .zip(o.columns().iter().zip(s.columns()))
        .map(|(name, (a, b))| {
            let (p, q) = frequencies(labels(a), labels(b));
            (name.to_string(), 1.0 - js_divergence(&p, &q))
        })
        .collect())
}

pub fn js_similarity(original: &Dataset, synthetic: &Dataset, bins: usize) -> Result<f64> {
    let per = js_per_column(original, synthetic, bins)?;
    Ok(per.iter().map(|p| p.1).sum::<f64>() / per.len() as f64)
}
