//! Distance-based privacy scores: DiSCO, repU, NNDR, DCR and NNAA.
//!
//! DiSCO and repU work on quasi-identifier groups (numeric keys are binned
//! over the original's range). NNDR, DCR and NNAA work on the mixed
//! Euclidean metric and expect datasets normalized against the original.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::neighbors::{all_k_nearest, encode_pair, Neighbor};
use crate::tabular::{bin_index, normalize, sample_rows, Column, Dataset, Schema};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistancePrivacyReport {
    pub disco: f64,
    pub rep_u: f64,
    pub nndr: f64,
    pub dcr: f64,
    pub nnaa: f64,
    pub keys: Vec<String>,
    pub target: String,
    pub bins: usize,
}

/// Group label of every row over `columns`. Numeric columns are binned over
/// the reference range (`[0, 1]` for normalized data).
fn row_keys(
    dataset: &Dataset,
    columns: &[&str],
    reference: &Schema,
    bins: usize,
) -> Result<Vec<Vec<String>>> {
    let mut keys = vec![Vec::with_capacity(columns.len()); dataset.n_rows()];
    for name in columns {
        match dataset.column(name)? {
            Column::Numeric(v) => {
                let (min, max) = if dataset.is_normalized() {
                    (0.0, 1.0)
                } else {
                    reference.column(name)?.range().ok_or_else(|| Error::WrongKind {
                        column: name.to_string(),
                        expected: "numeric in the reference schema",
                    })?
                };
                for (k, x) in keys.iter_mut().zip(v) {
                    k.push(format!("#{}", bin_index(*x, min, max, bins)));
                }
            }
            Column::Categorical(v) => {
                for (k, label) in keys.iter_mut().zip(v) {
                    k.push(label.clone());
                }
            }
        }
    }
    Ok(keys)
}

fn paired_group_keys(
    original: &Dataset,
    synthetic: &Dataset,
    columns: &[&str],
    bins: usize,
) -> Result<(Vec<Vec<String>>, Vec<Vec<String>>)> {
    let reference = original.schema();
    Ok((
        row_keys(original, columns, reference, bins)?,
        row_keys(synthetic, columns, reference, bins)?,
    ))
}

fn check_columns(original: &Dataset, synthetic: &Dataset, columns: &[&str]) -> Result<()> {
    for c in columns {
        let a = original.schema().column(c)?;
        let b = synthetic.schema().column(c)?;
        if a.is_numeric() != b.is_numeric() {
            return Err(Error::SchemaMismatch(format!(
                "column `{c}` has different kinds in original and synthetic data"
            )));
        }
    }
    Ok(())
}

/// Group key -> the single target value of the group, or `None` when the
/// group holds several.
fn disclosed<'a>(q: &'a [Vec<String>], t: &'a [Vec<String>]) -> HashMap<&'a [String], Option<&'a [String]>> {
    let mut groups: HashMap<&[String], Option<&[String]>> = HashMap::new();
    for (qk, tk) in q.iter().zip(t) {
        groups
            .entry(qk.as_slice())
            .and_modify(|v| {
                if v.is_some_and(|prev| prev != tk.as_slice()) {
                    *v = None;
                }
            })
            .or_insert(Some(tk.as_slice()));
    }
    groups
}

fn count_keys(q: &[Vec<String>]) -> HashMap<&[String], usize> {
    let mut m: HashMap<&[String], usize> = HashMap::new();
    for k in q {
        *m.entry(k.as_slice()).or_default() += 1;
    }
    m
}

/// Percentage of original records whose quasi-identifier group is disclosive
/// (a single target value) in both the synthetic and the original data, with
/// the disclosed synthetic value equal to the record's own target.
pub fn disco<S: AsRef<str>>(
    original: &Dataset,
    synthetic: &Dataset,
    keys: &[S],
    target: &str,
    bins: usize,
) -> Result<f64> {
    let keys: Vec<&str> = keys.iter().map(AsRef::as_ref).collect();
    if keys.contains(&target) {
        return Err(Error::invalid(format!(
            "target `{target}` is also a quasi-identifier"
        )));
    }
    if original.n_rows() == 0 {
        return Err(Error::insufficient("original dataset is empty"));
    }
    let mut cols = keys.clone();
    cols.push(target);
    check_columns(original, synthetic, &cols)?;
    let (orig_q, syn_q) = paired_group_keys(original, synthetic, &keys, bins)?;
    let (orig_t, syn_t) = paired_group_keys(original, synthetic, &[target], bins)?;

    let syn_groups = disclosed(&syn_q, &syn_t);
    let orig_groups = disclosed(&orig_q, &orig_t);

    let hits = orig_q
        .iter()
        .zip(&orig_t)
        .filter(|(qk, tk)| {
            let in_orig = orig_groups.get(qk.as_slice()).copied().flatten().is_some();
            in_orig
                && syn_groups
                    .get(qk.as_slice())
                    .copied()
                    .flatten()
                    .is_some_and(|t| t == tk.as_slice())
        })
        .count();
    Ok(100.0 * hits as f64 / original.n_rows() as f64)
}

/// Percentage of original records whose quasi-identifier combination is
/// unique in the original and also unique in the synthetic data.
pub fn rep_u<S: AsRef<str>>(
    original: &Dataset,
    synthetic: &Dataset,
    keys: &[S],
    bins: usize,
) -> Result<f64> {
    let keys: Vec<&str> = keys.iter().map(AsRef::as_ref).collect();
    if keys.is_empty() {
        return Err(Error::invalid("repU needs at least one key column"));
    }
    if original.n_rows() == 0 {
        return Err(Error::insufficient("original dataset is empty"));
    }
    check_columns(original, synthetic, &keys)?;
    let (orig_q, syn_q) = paired_group_keys(original, synthetic, &keys, bins)?;
    let d = count_keys(&orig_q);
    let s = count_keys(&syn_q);
    let replicated = d
        .iter()
        .filter(|(k, &c)| c == 1 && s.get(*k) == Some(&1))
        .count();
    Ok(100.0 * replicated as f64 / original.n_rows() as f64)
}

/// Distances from each synthetic record to its two nearest originals.
fn nearest_two(synthetic: &Dataset, original: &Dataset) -> Result<Vec<(f64, f64)>> {
    let (po, ps) = encode_pair(original, synthetic)?;
    Ok(all_k_nearest(&ps, &po, 2, false)
        .into_iter()
        .map(|nn| (nn[0].distance, nn.get(1).map_or(f64::INFINITY, |n| n.distance)))
        .collect())
}

fn nndr_from(pairs: &[(f64, f64)]) -> f64 {
    let sum: f64 = pairs
        .iter()
        .map(|&(d1, d2)| if d1 == 0.0 { 0.0 } else { d1 / d2 })
        .sum();
    sum / pairs.len() as f64
}

fn dcr_from(pairs: &[(f64, f64)]) -> f64 {
    pairs.iter().map(|p| p.0).sum::<f64>() / pairs.len() as f64
}

/// Mean ratio of nearest to second-nearest original distance over synthetic
/// records; a zero nearest distance scores 0.
pub fn nndr(synthetic: &Dataset, original: &Dataset) -> Result<f64> {
    if original.n_rows() < 2 {
        return Err(Error::insufficient("NNDR needs at least 2 original records"));
    }
    if synthetic.n_rows() == 0 {
        return Err(Error::insufficient("synthetic dataset is empty"));
    }
    Ok(nndr_from(&nearest_two(synthetic, original)?))
}

/// Mean distance from each synthetic record to its closest original.
pub fn dcr(synthetic: &Dataset, original: &Dataset) -> Result<f64> {
    if original.n_rows() == 0 || synthetic.n_rows() == 0 {
        return Err(Error::insufficient("DCR needs non-empty datasets"));
    }
    Ok(dcr_from(&nearest_two(synthetic, original)?))
}

/// Nearest-neighbour adversarial accuracy.
///
/// The larger dataset is subsampled (seeded) to the size of the smaller one.
/// Ties in the distance comparison count as "not farther".
pub fn nnaa(original: &Dataset, synthetic: &Dataset, seed: u64) -> Result<f64> {
    let n = original.n_rows().min(synthetic.n_rows());
    if n < 2 {
        return Err(Error::insufficient(
            "NNAA needs at least 2 records on each side",
        ));
    }
    let t = if original.n_rows() > n {
        sample_rows(original, n, false, seed)?
    } else {
        original.clone()
    };
    let s = if synthetic.n_rows() > n {
        sample_rows(synthetic, n, false, seed)?
    } else {
        synthetic.clone()
    };
    let (pt, ps) = encode_pair(&t, &s)?;
    let d_ts = all_k_nearest(&pt, &ps, 1, false);
    let d_tt = all_k_nearest(&pt, &pt, 1, true);
    let d_st = all_k_nearest(&ps, &pt, 1, false);
    let d_ss = all_k_nearest(&ps, &ps, 1, true);
    let farther = |cross: &[Vec<Neighbor>], within: &[Vec<Neighbor>]| {
        cross
            .iter()
            .zip(within)
            .filter(|(c, w)| c[0].distance > w[0].distance)
            .count()
    };
    let a = farther(&d_ts, &d_tt) as f64 / n as f64;
    let b = farther(&d_st, &d_ss) as f64 / n as f64;
    Ok(0.5 * (a + b))
}

/// Caps applied before the quadratic scans.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistanceCaps {
    /// Maximum rows on each side for NNAA.
    pub nnaa_rows: Option<usize>,
}

/// All five scores; numeric columns are normalized against the original.
pub fn evaluate<S: AsRef<str>>(
    original: &Dataset,
    synthetic: &Dataset,
    keys: &[S],
    target: &str,
    bins: usize,
    seed: u64,
    caps: DistanceCaps,
) -> Result<DistancePrivacyReport> {
    let reference = original.schema();
    let on = normalize(original, reference)?;
    let sn = normalize(&synthetic.align_to(reference)?, reference)?;
    let pairs = nearest_two(&sn, &on)?;
    if on.n_rows() < 2 {
        return Err(Error::insufficient("NNDR needs at least 2 original records"));
    }
    let (nt, ns) = match caps.nnaa_rows {
        Some(cap) if on.n_rows().min(sn.n_rows()) > cap => (
            sample_rows(&on, cap, false, crate::rng::derive_seed(seed, 1))?,
            sample_rows(&sn, cap, false, crate::rng::derive_seed(seed, 2))?,
        ),
        _ => (on.clone(), sn.clone()),
    };
    Ok(DistancePrivacyReport {
        disco: disco(&on, &sn, keys, target, bins)?,
        rep_u: rep_u(&on, &sn, keys, bins)?,
        nndr: nndr_from(&pairs),
        dcr: dcr_from(&pairs),
        nnaa: nnaa(&nt, &ns, seed)?,
        keys: keys.iter().map(|k| k.as_ref().to_string()).collect(),
        target: target.to_string(),
        bins,
    })
}
