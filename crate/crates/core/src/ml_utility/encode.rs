use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::tabular::{Column, ColumnKind, Dataset, Schema};

/// The distinct classes of a target column, in a fixed order.
///
/// Numeric targets are ordered by value and foreign values (for example the
/// continuous output of a generator) snap to the nearest class; categorical
/// targets are ordered by label and must match exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetClasses {
    pub target: String,
    pub labels: Vec<String>,
    values: Option<Vec<f64>>,
}

impl TargetClasses {
    pub fn from_dataset(data: &Dataset, target: &str) -> Result<Self> {
        let (labels, values) = match data.column(target)? {
            Column::Numeric(v) => {
                let mut vals = v.clone();
                vals.sort_by(f64::total_cmp);
                vals.dedup();
                let labels: Vec<String> = vals.iter().map(|x| crate::tabular::format_number(*x)).collect();
                (labels, Some(vals))
            }
            Column::Categorical(v) => {
                let set: BTreeSet<&String> = v.iter().collect();
                (set.into_iter().cloned().collect(), None)
            }
        };
        if labels.len() < 2 {
            return Err(Error::insufficient(format!(
                "target `{target}` has fewer than two classes"
            )));
        }
        Ok(TargetClasses {
            target: target.to_string(),
            labels,
            values,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn is_binary(&self) -> bool {
        self.labels.len() == 2
    }

    /// Class index of every row.
    pub fn encode(&self, data: &Dataset) -> Result<Vec<usize>> {
        match (data.column(&self.target)?, &self.values) {
            (Column::Numeric(v), Some(vals)) => Ok(v
                .iter()
                .map(|x| {
                    let mut best = 0;
                    for (i, c) in vals.iter().enumerate() {
                        if (x - c).abs() < (x - vals[best]).abs() {
                            best = i;
                        }
                    }
                    best
                })
                .collect()),
            (Column::Categorical(v), None) => v
                .iter()
                .map(|l| {
                    self.labels.iter().position(|c| c == l).ok_or_else(|| {
                        Error::invalid(format!("unknown class `{l}` in target `{}`", self.target))
                    })
                })
                .collect(),
            _ => Err(Error::SchemaMismatch(format!(
                "target `{}` changed kind",
                self.target
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Slot {
    Numeric { min: f64, max: f64 },
    OneHot(Vec<String>),
}

/// Turns every non-target column into dense features: numeric columns scaled
/// to `[0, 1]` on the reference range, categorical columns one-hot over the
/// reference categories (unknown labels encode as all zeros).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureEncoder {
    columns: Vec<(String, Slot)>,
    dim: usize,
}

impl FeatureEncoder {
    pub fn new(reference: &Schema, target: &str) -> Result<Self> {
        reference.index_of(target)?;
        let columns: Vec<(String, Slot)> = reference
            .columns
            .iter()
            .filter(|c| c.name != target)
            .map(|c| {
                let slot = match &c.kind {
                    ColumnKind::Numeric { min, max } => Slot::Numeric { min: *min, max: *max },
                    ColumnKind::Categorical { categories } => Slot::OneHot(categories.clone()),
                };
                (c.name.clone(), slot)
            })
            .collect();
        let dim = columns
            .iter()
            .map(|(_, s)| match s {
                Slot::Numeric { .. } => 1,
                Slot::OneHot(c) => c.len(),
            })
            .sum();
        if dim == 0 {
            return Err(Error::insufficient("no feature columns besides the target"));
        }
        Ok(FeatureEncoder { columns, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn feature_names(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.0.as_str()).collect()
    }

    /// Row-major `n x dim` matrix.
    pub fn transform(&self, data: &Dataset) -> Result<Vec<f64>> {
        let n = data.n_rows();
        let mut out = vec![0.0; n * self.dim];
        let mut offset = 0;
        for (name, slot) in &self.columns {
            match (slot, data.column(name)?) {
                (Slot::Numeric { min, max }, Column::Numeric(v)) => {
                    let scale = |x: f64| {
                        if data.is_normalized() {
                            x
                        } else if max > min {
                            ((x - min) / (max - min)).clamp(0.0, 1.0)
                        } else {
                            0.0
                        }
                    };
                    for (r, &x) in v.iter().enumerate() {
                        out[r * self.dim + offset] = scale(x);
                    }
                    offset += 1;
                }
                (Slot::OneHot(cats), Column::Categorical(v)) => {
                    for (r, l) in v.iter().enumerate() {
                        if let Some(p) = cats.iter().position(|c| c == l) {
                            out[r * self.dim + offset + p] = 1.0;
                        }
                    }
                    offset += cats.len();
                }
                _ => {
                    return Err(Error::SchemaMismatch(format!(
                        "feature `{name}` changed kind"
                    )))
                }
            }
        }
        Ok(out)
    }
}
