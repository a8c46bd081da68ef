//! Typed columnar tables shared by every metric.
//!
//! A [`Dataset`] is immutable once built. Numeric columns hold `f64`,
//! categorical columns hold labels; missing cells never reach a `Dataset`
//! (rows with missing values are dropped at load time).

mod csv_io;
mod preprocess;
mod sampling;

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use csv_io::{infer_schema, load_csv, read_csv, write_csv, CsvOptions, RawTable};
pub use preprocess::{
    bin_index, discretize, discretize_columns, mixed_distance, normalize, DEFAULT_BINS,
};
pub use sampling::{dynamic_train_test_split, sample_rows, test_fraction_for, SplitPair};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ColumnKind {
    Numeric { min: f64, max: f64 },
    Categorical { categories: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    #[serde(flatten)]
    pub kind: ColumnKind,
}

impl ColumnSpec {
    pub fn numeric(name: impl Into<String>, min: f64, max: f64) -> Self {
        ColumnSpec {
            name: name.into(),
            kind: ColumnKind::Numeric { min, max },
        }
    }

    pub fn categorical<S: Into<String>>(
        name: impl Into<String>,
        categories: impl IntoIterator<Item = S>,
    ) -> Self {
        ColumnSpec {
            name: name.into(),
            kind: ColumnKind::Categorical {
                categories: categories.into_iter().map(Into::into).collect(),
            },
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self.kind, ColumnKind::Numeric { .. })
    }

    /// `(min, max)` of a numeric column.
    pub fn range(&self) -> Option<(f64, f64)> {
        match self.kind {
            ColumnKind::Numeric { min, max } => Some((min, max)),
            ColumnKind::Categorical { .. } => None,
        }
    }

    pub fn categories(&self) -> Option<&[String]> {
        match &self.kind {
            ColumnKind::Categorical { categories } => Some(categories),
            ColumnKind::Numeric { .. } => None,
        }
    }

    fn validate(&self) -> Result<()> {
        match &self.kind {
            ColumnKind::Numeric { min, max } => {
                if !(min <= max) {
                    return Err(Error::SchemaMismatch(format!(
                        "column `{}` has min {min} > max {max}",
                        self.name
                    )));
                }
            }
            ColumnKind::Categorical { categories } => {
                if categories.is_empty() {
                    return Err(Error::SchemaMismatch(format!(
                        "column `{}` has no categories",
                        self.name
                    )));
                }
                let distinct: BTreeSet<&String> = categories.iter().collect();
                if distinct.len() != categories.len() {
                    return Err(Error::SchemaMismatch(format!(
                        "column `{}` lists duplicate categories",
                        self.name
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Schema {
    pub columns: Vec<ColumnSpec>,
}

impl Schema {
    pub fn new(columns: Vec<ColumnSpec>) -> Result<Self> {
        let schema = Schema { columns };
        schema.validate()?;
        Ok(schema)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for c in &self.columns {
            if !seen.insert(c.name.as_str()) {
                return Err(Error::SchemaMismatch(format!(
                    "duplicate column name `{}`",
                    c.name
                )));
            }
            c.validate()?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.columns.iter().map(|c| c.name.as_str())
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c.name == name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    pub fn column(&self, name: &str) -> Result<&ColumnSpec> {
        Ok(&self.columns[self.index_of(name)?])
    }

    pub fn from_json_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let schema: Schema = serde_json::from_str(&text)?;
        schema.validate()?;
        Ok(schema)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Column {
    Numeric(Vec<f64>),
    Categorical(Vec<String>),
}

impl Column {
    pub fn len(&self) -> usize {
        match self {
            Column::Numeric(v) => v.len(),
            Column::Categorical(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn value(&self, row: usize) -> Value<'_> {
        match self {
            Column::Numeric(v) => Value::Num(v[row]),
            Column::Categorical(v) => Value::Cat(&v[row]),
        }
    }

    fn take(&self, rows: &[usize]) -> Column {
        match self {
            Column::Numeric(v) => Column::Numeric(rows.iter().map(|&r| v[r]).collect()),
            Column::Categorical(v) => {
                Column::Categorical(rows.iter().map(|&r| v[r].clone()).collect())
            }
        }
    }
}

/// Borrowed view of a single cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value<'a> {
    Num(f64),
    Cat(&'a str),
}

impl Value<'_> {
    /// Label used when a cell serves as a class or group key.
    pub fn label(&self) -> String {
        match self {
            Value::Num(x) => format_number(*x),
            Value::Cat(s) => (*s).to_string(),
        }
    }
}

pub(crate) fn format_number(x: f64) -> String {
    format!("{x}")
}

/// Whether numeric columns hold raw values or values rescaled to `[0, 1]`
/// against a reference schema.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scale {
    #[default]
    Raw,
    Unit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: Schema,
    columns: Vec<Column>,
    n_rows: usize,
    scale: Scale,
}

impl Dataset {
    /// Builds a dataset, checking that columns agree with the schema.
    pub fn new(schema: Schema, columns: Vec<Column>) -> Result<Self> {
        schema.validate()?;
        if schema.len() != columns.len() {
            return Err(Error::SchemaMismatch(format!(
                "schema has {} columns, data has {}",
                schema.len(),
                columns.len()
            )));
        }
        let n_rows = columns.first().map_or(0, Column::len);
        for (spec, col) in schema.columns.iter().zip(&columns) {
            if col.len() != n_rows {
                return Err(Error::SchemaMismatch(format!(
                    "column `{}` has {} rows, expected {n_rows}",
                    spec.name,
                    col.len()
                )));
            }
            match (&spec.kind, col) {
                (ColumnKind::Numeric { .. }, Column::Numeric(v)) => {
                    if v.iter().any(|x| !x.is_finite()) {
                        return Err(Error::SchemaMismatch(format!(
                            "column `{}` holds non-finite values",
                            spec.name
                        )));
                    }
                }
                (ColumnKind::Categorical { .. }, Column::Categorical(_)) => {}
                _ => {
                    return Err(Error::SchemaMismatch(format!(
                        "column `{}` kind does not match its data",
                        spec.name
                    )))
                }
            }
        }
        Ok(Dataset {
            schema,
            columns,
            n_rows,
            scale: Scale::Raw,
        })
    }

    /// Builds a dataset whose schema is inferred from the columns themselves.
    pub fn from_columns<S: Into<String>>(
        columns: impl IntoIterator<Item = (S, Column)>,
    ) -> Result<Self> {
        let (names, cols): (Vec<String>, Vec<Column>) =
            columns.into_iter().map(|(n, c)| (n.into(), c)).unzip();
        let specs = names
            .into_iter()
            .zip(&cols)
            .map(|(name, col)| observed_spec(name, col))
            .collect::<Result<Vec<_>>>()?;
        Dataset::new(Schema { columns: specs }, cols)
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn scale(&self) -> Scale {
        self.scale
    }

    pub fn is_normalized(&self) -> bool {
        self.scale == Scale::Unit
    }

    pub fn column(&self, name: &str) -> Result<&Column> {
        Ok(&self.columns[self.schema.index_of(name)?])
    }

    pub fn numeric(&self, name: &str) -> Result<&[f64]> {
        match self.column(name)? {
            Column::Numeric(v) => Ok(v),
            Column::Categorical(_) => Err(Error::WrongKind {
                column: name.to_string(),
                expected: "numeric",
            }),
        }
    }

    pub fn value(&self, row: usize, col: usize) -> Value<'_> {
        self.columns[col].value(row)
    }

    /// All cells of one row, in schema order.
    pub fn record(&self, row: usize) -> Vec<Value<'_>> {
        self.columns.iter().map(|c| c.value(row)).collect()
    }

    /// Indices of numeric columns in schema order.
    pub fn numeric_indices(&self) -> Vec<usize> {
        self.schema
            .columns
            .iter()
            .enumerate()
            .filter(|(_, c)| c.is_numeric())
            .map(|(i, _)| i)
            .collect()
    }

    /// New dataset made of the given rows (repetitions allowed), same schema.
    pub fn take_rows(&self, rows: &[usize]) -> Dataset {
        Dataset {
            schema: self.schema.clone(),
            columns: self.columns.iter().map(|c| c.take(rows)).collect(),
            n_rows: rows.len(),
            scale: self.scale,
        }
    }

    pub fn select_columns<S: AsRef<str>>(&self, names: &[S]) -> Result<Dataset> {
        let idx = names
            .iter()
            .map(|n| self.schema.index_of(n.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Dataset {
            schema: Schema {
                columns: idx.iter().map(|&i| self.schema.columns[i].clone()).collect(),
            },
            columns: idx.iter().map(|&i| self.columns[i].clone()).collect(),
            n_rows: self.n_rows,
            scale: self.scale,
        })
    }

    /// Replaces one column, keeping name and position.
    pub fn with_column(&self, name: &str, spec_kind: ColumnKind, column: Column) -> Result<Dataset> {
        let i = self.schema.index_of(name)?;
        let mut schema = self.schema.clone();
        schema.columns[i].kind = spec_kind;
        let mut columns = self.columns.clone();
        columns[i] = column;
        let mut out = Dataset::new(schema, columns)?;
        out.scale = self.scale;
        Ok(out)
    }

    /// Reorders the columns to follow `reference` (matched by name) and
    /// checks that kinds agree.
    pub fn align_to(&self, reference: &Schema) -> Result<Dataset> {
        if reference.len() != self.n_cols() {
            return Err(Error::SchemaMismatch(format!(
                "expected {} columns, found {}",
                reference.len(),
                self.n_cols()
            )));
        }
        let names: Vec<&str> = reference.names().collect();
        let out = self.select_columns(&names)?;
        for (a, b) in out.schema.columns.iter().zip(&reference.columns) {
            if a.is_numeric() != b.is_numeric() {
                return Err(Error::SchemaMismatch(format!(
                    "column `{}` is {} here but {} in the reference",
                    a.name,
                    kind_name(a),
                    kind_name(b)
                )));
            }
        }
        Ok(out)
    }

    /// Distinct-row fraction, used to sanity check attack inputs.
    pub fn unique_row_fraction(&self) -> f64 {
        if self.n_rows == 0 {
            return 0.0;
        }
        let mut counts: HashMap<Vec<String>, usize> = HashMap::new();
        for r in 0..self.n_rows {
            let key = self.record(r).iter().map(Value::label).collect();
            *counts.entry(key).or_default() += 1;
        }
        counts.values().filter(|&&c| c == 1).count() as f64 / self.n_rows as f64
    }

    pub(crate) fn with_scale(mut self, scale: Scale) -> Dataset {
        self.scale = scale;
        self
    }
}

fn kind_name(spec: &ColumnSpec) -> &'static str {
    if spec.is_numeric() {
        "numeric"
    } else {
        "categorical"
    }
}

/// Column spec describing exactly the observed values.
pub(crate) fn observed_spec(name: String, col: &Column) -> Result<ColumnSpec> {
    match col {
        Column::Numeric(v) => {
            if v.is_empty() {
                return Err(Error::EmptyTable);
            }
            let min = v.iter().copied().fold(f64::INFINITY, f64::min);
            let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            Ok(ColumnSpec::numeric(name, min, max))
        }
        Column::Categorical(v) => {
            let cats: BTreeSet<&String> = v.iter().collect();
            if cats.is_empty() {
                return Err(Error::EmptyTable);
            }
            Ok(ColumnSpec::categorical(name, cats.into_iter().cloned()))
        }
    }
}
