use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tabular::{Column, Dataset};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasicStats {
    pub mean: f64,
    pub median: f64,
    /// Population variance.
    pub variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub column: String,
    pub original: BasicStats,
    pub synthetic: BasicStats,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatsDiff {
    pub mean_diff: f64,
    pub median_diff: f64,
    pub var_diff: f64,
}

pub fn basic_stats(x: &[f64]) -> Option<BasicStats> {
    if x.is_empty() {
        return None;
    }
    // sums run over sorted values so row order cannot change the result
    let mut s = x.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    let mean = s.iter().sum::<f64>() / n;
    let variance = s.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let h = s.len() / 2;
    let median = if s.len() % 2 == 1 {
        s[h]
    } else {
        0.5 * (s[h - 1] + s[h])
    };
    Some(BasicStats {
        mean,
        median,
        variance,
    })
}

/// Mean, median and variance of every numeric column on both sides.
pub fn column_stats(original: &Dataset, synthetic: &Dataset) -> Result<Vec<ColumnStats>> {
    let mut out = Vec::new();
    for (spec, col) in original.schema().columns.iter().zip(original.columns()) {
        if let Column::Numeric(a) = col {
            let b = synthetic.numeric(&spec.name)?;
            match (basic_stats(a), basic_stats(b)) {
                (Some(o), Some(s)) => out.push(ColumnStats {
                    column: spec.name.clone(),
                    original: o,
                    synthetic: s,
                }),
                _ => return Err(Error::insufficient("statistics of an empty column")),
            }
        }
    }
    if out.is_empty() {
        return Err(Error::WrongKind {
            column: "*".into(),
            expected: "numeric (no numeric columns for basic statistics)",
        });
    }
    Ok(out)
}

pub fn stats_diff_from(per_column: &[ColumnStats]) -> StatsDiff {
    let n = per_column.len() as f64;
    let avg = |f: fn(&BasicStats) -> f64| {
        per_column
            .iter()
            .map(|c| (f(&c.original) - f(&c.synthetic)).abs())
            .sum::<f64>()
            / n
    };
    StatsDiff {
        mean_diff: avg(|s| s.mean),
        median_diff: avg(|s| s.median),
        var_diff: avg(|s| s.variance),
    }
}

/// Column-averaged absolute differences of mean, median and variance.
pub fn basic_stats_diff(original: &Dataset, synthetic: &Dataset) -> Result<StatsDiff> {
    Ok(stats_diff_from(&column_stats(original, synthetic)?))
}
