use super::{Column, ColumnKind, ColumnSpec, Dataset, Scale, Schema, Value};
use crate::error::{Error, Result};

pub const DEFAULT_BINS: usize = 20;

/// Rescales numeric columns to `[0, 1]` using the reference schema's ranges.
///
/// Values outside the reference range are clamped; constant reference columns
/// map to 0. Already-normalized datasets are returned unchanged.
pub fn normalize(dataset: &Dataset, reference: &Schema) -> Result<Dataset> {
    if dataset.is_normalized() {
        return Ok(dataset.clone());
    }
    check_same_layout(dataset.schema(), reference)?;
    let mut specs = Vec::with_capacity(reference.len());
    let mut columns = Vec::with_capacity(reference.len());
    for ((spec, ref_spec), col) in dataset
        .schema()
        .columns
        .iter()
        .zip(&reference.columns)
        .zip(dataset.columns())
    {
        match (col, ref_spec.range()) {
            (Column::Numeric(v), Some((min, max))) => {
                columns.push(Column::Numeric(
                    v.iter().map(|&x| unit_scale(x, min, max)).collect(),
                ));
                specs.push(ColumnSpec::numeric(spec.name.clone(), 0.0, 1.0));
            }
            _ => {
                columns.push(col.clone());
                specs.push(spec.clone());
            }
        }
    }
    Ok(Dataset::new(Schema { columns: specs }, columns)?.with_scale(Scale::Unit))
}

fn unit_scale(x: f64, min: f64, max: f64) -> f64 {
    if max <= min {
        0.0
    } else {
        ((x - min) / (max - min)).clamp(0.0, 1.0)
    }
}

pub(crate) fn check_same_layout(a: &Schema, b: &Schema) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::SchemaMismatch(format!(
            "{} columns vs {} in the reference",
            a.len(),
            b.len()
        )));
    }
    for (x, y) in a.columns.iter().zip(&b.columns) {
        if x.name != y.name || x.is_numeric() != y.is_numeric() {
            return Err(Error::SchemaMismatch(format!(
                "column `{}` does not line up with reference column `{}`",
                x.name, y.name
            )));
        }
    }
    Ok(())
}

/// Equal-width bin of `x` over `[min, max]`.
///
/// Bins are left-closed and right-open except the last one, which also
/// holds `max`. Out-of-range values fall into the first or last bin.
pub fn bin_index(x: f64, min: f64, max: f64, bins: usize) -> usize {
    if max <= min || bins <= 1 {
        return 0;
    }
    let t = (x - min) / (max - min);
    if t <= 0.0 {
        0
    } else {
        ((t * bins as f64).floor() as usize).min(bins - 1)
    }
}

fn bin_label(i: usize) -> String {
    format!("bin{i}")
}

/// Discretizes one numeric column into `bins` equal-width labelled bins over
/// the reference range (`[0, 1]` when the dataset is normalized).
pub fn discretize(
    dataset: &Dataset,
    column: &str,
    bins: usize,
    reference: &Schema,
) -> Result<(ColumnSpec, Column)> {
    if bins < 2 {
        return Err(Error::invalid(format!("bins must be >= 2, got {bins}")));
    }
    let values = dataset.numeric(column)?;
    let (min, max) = if dataset.is_normalized() {
        (0.0, 1.0)
    } else {
        reference
            .column(column)?
            .range()
            .ok_or_else(|| Error::WrongKind {
                column: column.to_string(),
                expected: "numeric in the reference schema",
            })?
    };
    let labels = values
        .iter()
        .map(|&x| bin_label(bin_index(x, min, max, bins)))
        .collect();
    Ok((
        ColumnSpec::categorical(column, (0..bins).map(bin_label)),
        Column::Categorical(labels),
    ))
}

/// Discretizes every numeric column; categorical columns are kept.
pub fn discretize_columns(dataset: &Dataset, reference: &Schema, bins: usize) -> Result<Dataset> {
    let mut specs = Vec::with_capacity(dataset.n_cols());
    let mut columns = Vec::with_capacity(dataset.n_cols());
    for (spec, col) in dataset.schema().columns.iter().zip(dataset.columns()) {
        if spec.is_numeric() {
            let (s, c) = discretize(dataset, &spec.name, bins, reference)?;
            specs.push(s);
            columns.push(c);
        } else {
            specs.push(spec.clone());
            columns.push(col.clone());
        }
    }
    Dataset::new(Schema { columns: specs }, columns)
}

/// Euclidean distance where numeric columns contribute their difference and
/// categorical columns contribute 0 when equal and 1 otherwise.
pub fn mixed_distance(a: &[Value<'_>], b: &[Value<'_>], schema: &Schema) -> Result<f64> {
    if a.len() != schema.len() || b.len() != schema.len() {
        return Err(Error::SchemaMismatch(format!(
            "records of length {} and {} for a {}-column schema",
            a.len(),
            b.len(),
            schema.len()
        )));
    }
    let mut acc = 0.0;
    for ((x, y), spec) in a.iter().zip(b).zip(&schema.columns) {
        match (x, y, &spec.kind) {
            (Value::Num(x), Value::Num(y), ColumnKind::Numeric { .. }) => {
                if x.is_nan() || y.is_nan() {
                    return Err(Error::invalid(format!(
                        "missing value in column `{}`",
                        spec.name
                    )));
                }
                let d = x - y;
                acc += d * d;
            }
            (Value::Cat(x), Value::Cat(y), ColumnKind::Categorical { .. }) => {
                if x != y {
                    acc += 1.0;
                }
            }
            _ => {
                return Err(Error::SchemaMismatch(format!(
                    "cell kind does not match column `{}`",
                    spec.name
                )))
            }
        }
    }
    Ok(acc.sqrt())
}
