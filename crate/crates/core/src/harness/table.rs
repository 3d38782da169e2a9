//! Tidy experiment tables and their CSV form.
//!
//! The CSV layout is one `#` comment line of `key=value` metadata pairs,
//! then the header row, then data rows. Reals are written in Rust's
//! shortest round-trip form (always with a `.` or exponent), so reading a
//! file back recovers every value bit for bit.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Real(f64),
    Text(String),
}

impl Value {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Int(i) => Some(*i as f64),
            Value::Real(r) => Some(*r),
            Value::Text(_) => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Text(s) => Some(s),
            _ => None,
        }
    }

    fn parse(field: &str) -> Value {
        let looks_real = field.contains(['.', 'e', 'E']) || matches!(field, "inf" | "-inf" | "NaN");
        if looks_real {
            if let Ok(r) = field.parse::<f64>() {
                return Value::Real(r);
            }
        } else if let Ok(i) = field.parse::<i64>() {
            return Value::Int(i);
        }
        Value::Text(field.to_string())
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            // Debug keeps a trailing ".0" on integral reals
            Value::Real(r) => write!(f, "{r:?}"),
            Value::Text(s) => f.write_str(s),
        }
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Real(v)
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as i64)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentTable {
    schema: Vec<String>,
    rows: Vec<Vec<Value>>,
    metadata: Vec<(String, String)>,
}

impl ExperimentTable {
    pub fn new<S: Into<String>>(schema: impl IntoIterator<Item = S>) -> Self {
        ExperimentTable {
            schema: schema.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
            metadata: Vec::new(),
        }
    }

    pub fn schema(&self) -> &[String] {
        &self.schema
    }

    pub fn rows(&self) -> &[Vec<Value>] {
        &self.rows
    }

    pub fn metadata(&self) -> &[(String, String)] {
        &self.metadata
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// Adds or replaces a metadata entry. Keys and values must not contain
    /// `=`, `;` or newlines.
    pub fn set_meta(&mut self, key: impl Into<String>, value: impl ToString) {
        let key = key.into();
        let value = value.to_string();
        match self.metadata.iter_mut().find(|(k, _)| *k == key) {
            Some(entry) => entry.1 = value,
            None => self.metadata.push((key, value)),
        }
    }

    pub fn push_row(&mut self, row: Vec<Value>) -> Result<()> {
        if row.len() != self.schema.len() {
            return Err(Error::LengthMismatch {
                expected: self.schema.len(),
                actual: row.len(),
            });
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.schema.iter().position(|c| c == name)
    }

    /// Rows whose text column `key` equals `value`.
    pub fn filter<'a>(
        &'a self,
        key: &str,
        value: &'a str,
    ) -> impl Iterator<Item = &'a Vec<Value>> + 'a {
        let idx = self.column_index(key);
        self.rows
            .iter()
            .filter(move |r| idx.and_then(|i| r[i].as_str()) == Some(value))
    }

    /// Numeric values of `column` over rows where `key == value`.
    pub fn series(&self, key: &str, value: &str, column: &str) -> Vec<f64> {
        let Some(col) = self.column_index(column) else {
            return Vec::new();
        };
        self.filter(key, value)
            .filter_map(|r| r[col].as_f64())
            .collect()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let meta: Vec<String> = self
            .metadata
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        writeln!(out, "# {}", meta.join("; ")).map_err(csv::Error::from)?;
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(&self.schema)?;
        for row in &self.rows {
            writer.write_record(row.iter().map(|v| v.to_string()))?;
        }
        writer.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn emit_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let io_err = |source| Error::Io {
            path: path.to_path_buf(),
            source,
        };
        let file = File::create(path).map_err(io_err)?;
        self.write_csv(file).map_err(|e| match e {
            Error::Csv(c) if c.is_io_error() => match c.into_kind() {
                csv::ErrorKind::Io(source) => io_err(source),
                _ => unreachable!(),
            },
            other => other,
        })
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut reader = BufReader::new(input);
        let mut first = String::new();
        reader.read_line(&mut first).map_err(csv::Error::from)?;
        let metadata = first
            .trim_end()
            .strip_prefix('#')
            .ok_or_else(|| Error::Parse("missing metadata comment line".into()))?
            .split(';')
            .filter_map(|pair| {
                let (k, v) = pair.trim().split_once('=')?;
                Some((k.to_string(), v.to_string()))
            })
            .collect();

        let mut csv_reader = csv::Reader::from_reader(reader);
        let schema: Vec<String> = csv_reader.headers()?.iter().map(String::from).collect();
        let mut table = ExperimentTable {
            schema,
            rows: Vec::new(),
            metadata,
        };
        for record in csv_reader.records() {
            let record = record?;
            table.push_row(record.iter().map(Value::parse).collect())?;
        }
        Ok(table)
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::read_csv(file)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample() -> ExperimentTable {
        let mut t = ExperimentTable::new(["total_power", "scheme", "min_rate"]);
        t.set_meta("experiment", "minrate_vs_power");
        t.set_meta("seed", 7);
        t.push_row(vec![10.0.into(), "maxmin_noma".into(), 0.1f64.into()])
            .unwrap();
        t.push_row(vec![1e-7.into(), "equal, oma".into(), 3.into()])
            .unwrap();
        t
    }

    impl From<i32> for Value {
        fn from(v: i32) -> Self {
            Value::Int(v as i64)
        }
    }

    #[test]
    fn empty_table_is_header_and_metadata() {
        let mut t = ExperimentTable::new(["a", "b"]);
        t.set_meta("seed", 1);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "# seed=1\na,b\n");
    }

    #[test]
    fn rejects_ragged_rows() {
        let mut t = ExperimentTable::new(["a", "b"]);
        assert!(t.push_row(vec![1.0.into()]).is_err());
        assert!(t.rows().is_empty());
    }

    #[test]
    fn csv_round_trip() {
        let t = sample();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# experiment=minrate_vs_power; seed=7\n"));
        assert_eq!(ExperimentTable::read_csv(&buf[..]).unwrap(), t);
        assert_eq!(t.series("scheme", "maxmin_noma", "min_rate"), vec![0.1]);
    }

    #[test]
    fn emit_reports_path_on_failure() {
        let dir = tempfile::tempdir().unwrap();
        let bad = dir.path().join("missing").join("out.csv");
        let err = sample().emit_csv(&bad).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
        assert!(err.to_string().contains("missing"));

        let good = dir.path().join("out.csv");
        sample().emit_csv(&good).unwrap();
        assert_eq!(ExperimentTable::load_csv(&good).unwrap(), sample());
    }

    proptest! {
        #[test]
        fn reals_round_trip_bit_exact(values in prop::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 0..50)) {
            let mut t = ExperimentTable::new(["x"]);
            for v in &values {
                t.push_row(vec![Value::Real(*v)]).unwrap();
            }
            let mut buf = Vec::new();
            t.write_csv(&mut buf).unwrap();
            let back = ExperimentTable::read_csv(&buf[..]).unwrap();
            let got: Vec<u64> = back.rows().iter().map(|r| r[0].as_f64().unwrap().to_bits()).collect();
            let want: Vec<u64> = values.iter().map(|v| v.to_bits()).collect();
            prop_assert_eq!(got, want);
        }
    }
}
