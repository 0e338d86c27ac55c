//! CSV/JSON ingestion and emission.
//!
//! Output tables carry their resolved configuration and summary as `#`
//! comment lines in CSV, or as `"config"`/`"summary"` members in JSON.
//! Reals are written in shortest round-trip form, so re-reading a table
//! reproduces every value bit for bit.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::ar1::TimeSeries;
use crate::error::{Error, Result};
use crate::mc::{LimitKind, LimitSample};

/// Column of an input file: 1-based position or header name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum ColumnSelector {
    Index(usize),
    Name(String),
}

impl Default for ColumnSelector {
    fn default() -> Self {
        ColumnSelector::Index(1)
    }
}

impl std::str::FromStr for ColumnSelector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.parse::<usize>() {
            Ok(0) => Err(Error::invalid("column indices are 1-based")),
            Ok(i) => Ok(ColumnSelector::Index(i)),
            Err(_) if !s.is_empty() => Ok(ColumnSelector::Name(s.to_string())),
            Err(_) => Err(Error::invalid("empty column selector")),
        }
    }
}

/// Reads one numeric column. A first row whose selected field is not a
/// number is treated as a header.
pub fn read_series_from<R: std::io::Read>(
    input: R,
    column: &ColumnSelector,
    demean: bool,
) -> Result<TimeSeries> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(input);
    let mut values = Vec::new();
    let mut index = match column {
        ColumnSelector::Index(i) => Some(i - 1),
        ColumnSelector::Name(_) => None,
    };
    let mut first = true;
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if first {
            first = false;
            let header = match index {
                Some(i) => rec.get(i).is_some_and(|f| f.parse::<f64>().is_err()),
                None => true,
            };
            if header {
                if let ColumnSelector::Name(name) = column {
                    index =
                        Some(
                            rec.iter()
                                .position(|f| f == name)
                                .ok_or_else(|| Error::Parse {
                                    line,
                                    message: format!("no column named {name:?} in header"),
                                })?,
                        );
                }
                continue;
            }
            if index.is_none() {
                return Err(Error::Parse {
                    line,
                    message: "column names need a header row".into(),
                });
            }
        }
        let i = index.expect("column resolved");
        let field = rec.get(i).ok_or_else(|| Error::Parse {
            line,
            message: format!("missing column {}", i + 1),
        })?;
        let v = field.parse::<f64>().map_err(|_| Error::Parse {
            line,
            message: format!("not a number: {field:?}"),
        })?;
        if !v.is_finite() {
            return Err(Error::Parse {
                line,
                message: format!("non-finite value {field:?}"),
            });
        }
        values.push(v);
    }
    let series = TimeSeries::new(values)?;
    Ok(if demean { series.demean() } else { series })
}

pub fn read_series(path: &Path, column: &ColumnSelector, demean: bool) -> Result<TimeSeries> {
    read_series_from(BufReader::new(File::open(path)?), column, demean)
}

/// Output format for tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// A tabular artifact with its echoed configuration and summary values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub config: Value,
    pub summary: Map<String, Value>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Report {
    pub fn new(config: &impl Serialize, columns: &[&str]) -> Result<Self> {
        Ok(Self {
            config: serde_json::to_value(config)?,
            summary: Map::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        })
    }

    pub fn summary(&mut self, key: &str, value: impl Serialize) -> Result<()> {
        self.summary
            .insert(key.to_string(), serde_json::to_value(value)?);
        Ok(())
    }

    pub fn push_row(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Appends numeric rows built from parallel columns.
    pub fn push_columns(&mut self, columns: &[&[f64]]) {
        let len = columns.first().map_or(0, |c| c.len());
        for k in 0..len {
            self.push_row(columns.iter().map(|c| num(c[k])).collect());
        }
    }

    pub fn write<W: Write>(&self, format: Format, mut out: W) -> Result<()> {
        match format {
            Format::Json => {
                serde_json::to_writer_pretty(&mut out, self)?;
                writeln!(out)?;
            }
            Format::Csv => {
                writeln!(out, "# config {}", serde_json::to_string(&self.config)?)?;
                for (k, v) in &self.summary {
                    writeln!(out, "# {k} = {}", serde_json::to_string(v)?)?;
                }
                let mut w = csv::Writer::from_writer(&mut out);
                w.write_record(&self.columns)?;
                for row in &self.rows {
                    w.write_record(row.iter().map(csv_field))?;
                }
                w.flush()?;
            }
        }
        Ok(())
    }
}

/// JSON number, or `null` for non-finite values.
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

fn csv_field(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Number(n) => match n.as_f64() {
            Some(f) if n.is_f64() => format_real(f),
            _ => n.to_string(),
        },
        other => other.to_string(),
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn format_real(x: f64) -> String {
    format!("{x:?}")
}

/// Parsed numeric CSV table (comment lines skipped).
#[derive(Debug, Clone, PartialEq)]
pub struct NumericTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl NumericTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

/// Reads a table written by [`Report::write`] in CSV form.
pub fn read_numeric_table<R: BufRead>(input: R) -> Result<NumericTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(input);
    let columns = rdr.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let row = rec
            .iter()
            .map(|f| {
                f.parse::<f64>().map_err(|_| Error::Parse {
                    line,
                    message: format!("not a number: {f:?}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(NumericTable { columns, rows })
}

/// One draw per row, sorted.
pub fn write_limit_sample<W: Write>(sample: &LimitSample, mut out: W) -> Result<()> {
    for d in sample.draws() {
        writeln!(out, "{}", format_real(*d))?;
    }
    Ok(())
}

pub fn read_limit_sample<R: BufRead>(
    input: R,
    kind: LimitKind,
    inner_n: usize,
) -> Result<LimitSample> {
    let mut draws = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        draws.push(t.parse::<f64>().map_err(|_| Error::Parse {
            line: i + 1,
            message: format!("not a number: {t:?}"),
        })?);
    }
    LimitSample::new(draws, kind, inner_n)
}
