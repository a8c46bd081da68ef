use std::collections::BTreeSet;
use std::io::{Read, Write};
use std::path::Path;

use log::warn;

use super::{observed_spec, Column, ColumnKind, ColumnSpec, Dataset, Schema, Value};
use crate::error::{Error, Result};

const MISSING_MARKERS: &[&str] = &["", "NA", "N/A", "NaN", "nan", "null", "NULL", "None"];

#[derive(Debug, Clone, Copy)]
pub struct CsvOptions {
    pub delimiter: u8,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions { delimiter: b',' }
    }
}

/// Header plus string cells, before any typing.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl RawTable {
    pub fn parse<R: Read>(reader: R, opts: &CsvOptions) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .delimiter(opts.delimiter)
            .has_headers(true)
            .flexible(true)
            .from_reader(reader);
        let header: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() != header.len() {
                return Err(Error::RaggedRow {
                    row: i + 1,
                    expected: header.len(),
                    found: rec.len(),
                });
            }
            rows.push(rec.iter().map(|c| c.trim().to_string()).collect());
        }
        Ok(RawTable { header, rows })
    }

    /// Drops rows holding a missing cell; returns how many were dropped.
    fn drop_incomplete(&mut self) -> usize {
        let before = self.rows.len();
        self.rows.retain(|r| !r.iter().any(|c| is_missing(c)));
        before - self.rows.len()
    }
}

fn is_missing(cell: &str) -> bool {
    MISSING_MARKERS.contains(&cell)
}

fn parse_number(cell: &str) -> Option<f64> {
    cell.parse::<f64>().ok().filter(|x| x.is_finite())
}

/// A column is numeric iff every non-missing cell parses as a finite number.
pub fn infer_schema(raw: &RawTable) -> Result<Schema> {
    if raw.rows.is_empty() {
        return Err(Error::EmptyTable);
    }
    let mut specs = Vec::with_capacity(raw.header.len());
    for (j, name) in raw.header.iter().enumerate() {
        let cells = raw.rows.iter().map(|r| r[j].as_str()).filter(|c| !is_missing(c));
        let numeric: Option<Vec<f64>> = cells.clone().map(parse_number).collect();
        let spec = match numeric {
            Some(v) if !v.is_empty() => observed_spec(name.clone(), &Column::Numeric(v))?,
            _ => {
                let cats: BTreeSet<&str> = cells.collect();
                if cats.is_empty() {
                    return Err(Error::EmptyTable);
                }
                ColumnSpec::categorical(name.clone(), cats)
            }
        };
        specs.push(spec);
    }
    Schema::new(specs)
}

/// Parses CSV text into a dataset. Returns the dataset and the number of rows
/// dropped because of missing cells.
pub fn read_csv<R: Read>(
    reader: R,
    schema: Option<&Schema>,
    opts: &CsvOptions,
) -> Result<(Dataset, usize)> {
    let mut raw = RawTable::parse(reader, opts)?;
    if let Some(schema) = schema {
        check_header(&raw.header, schema)?;
    }
    let dropped = raw.drop_incomplete();
    if raw.rows.is_empty() {
        return Err(Error::EmptyTable);
    }
    let dataset = match schema {
        None => {
            let inferred = infer_schema(&raw)?;
            typed_columns(&raw, inferred)?
        }
        Some(schema) => typed_columns(&raw, extend_categories(&raw, schema))?,
    };
    Ok((dataset, dropped))
}

pub fn load_csv(path: &Path, schema: Option<&Schema>, opts: &CsvOptions) -> Result<Dataset> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let (dataset, dropped) = read_csv(std::io::BufReader::new(file), schema, opts)?;
    if dropped > 0 {
        warn!(
            "{}: dropped {dropped} row(s) with missing values",
            path.display()
        );
    }
    Ok(dataset)
}

pub fn write_csv<W: Write>(dataset: &Dataset, writer: W, opts: &CsvOptions) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .delimiter(opts.delimiter)
        .from_writer(writer);
    w.write_record(dataset.schema().names())?;
    for r in 0..dataset.n_rows() {
        w.write_record(dataset.record(r).iter().map(|v| match v {
            Value::Num(x) => super::format_number(*x),
            Value::Cat(s) => (*s).to_string(),
        }))?;
    }
    w.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

fn check_header(header: &[String], schema: &Schema) -> Result<()> {
    let h: BTreeSet<&str> = header.iter().map(String::as_str).collect();
    let s: BTreeSet<&str> = schema.names().collect();
    if h != s || h.len() != header.len() {
        return Err(Error::SchemaMismatch(format!(
            "CSV header {header:?} does not match schema columns {:?}",
            schema.names().collect::<Vec<_>>()
        )));
    }
    Ok(())
}

/// Keeps the declared schema but appends category labels it does not list.
fn extend_categories(raw: &RawTable, schema: &Schema) -> Schema {
    let mut out = schema.clone();
    for spec in &mut out.columns {
        if let ColumnKind::Categorical { categories } = &mut spec.kind {
            let j = raw.header.iter().position(|h| *h == spec.name).unwrap();
            let known: BTreeSet<String> = categories.iter().cloned().collect();
            let extra: BTreeSet<&str> = raw
                .rows
                .iter()
                .map(|r| r[j].as_str())
                .filter(|c| !known.contains(*c))
                .collect();
            categories.extend(extra.into_iter().map(String::from));
        }
    }
    out
}

fn typed_columns(raw: &RawTable, schema: Schema) -> Result<Dataset> {
    let mut columns = Vec::with_capacity(schema.len());
    for spec in &schema.columns {
        let j = raw.header.iter().position(|h| *h == spec.name).unwrap();
        let col = match spec.kind {
            ColumnKind::Numeric { .. } => Column::Numeric(
                raw.rows
                    .iter()
                    .enumerate()
                    .map(|(i, r)| {
                        parse_number(&r[j]).ok_or_else(|| Error::NumericParse {
                            column: spec.name.clone(),
                            row: i + 1,
                            value: r[j].clone(),
                        })
                    })
                    .collect::<Result<_>>()?,
            ),
            ColumnKind::Categorical { .. } => {
                Column::Categorical(raw.rows.iter().map(|r| r[j].clone()).collect())
            }
        };
        columns.push(col);
    }
    Dataset::new(schema, columns)
}
