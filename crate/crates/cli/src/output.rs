//! JSON and CSV emission.
//!
//! JSON documents are `{"schema": "optomech/<command>/v1", "metadata": {...},
//! "rows": [...]}`. CSV starts with `# optomech/<command>/v1`, then one
//! `# key: value` line per metadata entry, then the header and rows.
//! Complex numbers are `{"re", "im"}` objects in JSON and `<name>_re`,
//! `<name>_im` column pairs in CSV.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};

use optomech::C64;

use crate::config::Format;
use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Cx {
    pub re: f64,
    pub im: f64,
}

impl From<C64> for Cx {
    fn from(z: C64) -> Self {
        Cx { re: z.re, im: z.im }
    }
}

/// A row type with a fixed CSV layout.
pub trait CsvRow {
    fn header() -> Vec<String>;
    fn record(&self) -> Vec<String>;
}

pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// `name_re`, `name_im`.
pub fn pair(name: &str) -> [String; 2] {
    [format!("{name}_re"), format!("{name}_im")]
}

pub fn cx_cells(z: Cx) -> [String; 2] {
    [num(z.re), num(z.im)]
}

pub struct Document<R> {
    pub command: &'static str,
    pub metadata: Map<String, Value>,
    pub rows: Vec<R>,
}

impl<R: Serialize + CsvRow> Document<R> {
    pub fn new(command: &'static str) -> Self {
        Document { command, metadata: Map::new(), rows: Vec::new() }
    }

    pub fn meta(&mut self, key: &str, value: impl Serialize) {
        self.metadata.insert(key.to_string(), serde_json::to_value(value).expect("metadata serialises"));
    }

    pub fn schema(&self) -> String {
        format!("optomech/{}/v{SCHEMA_VERSION}", self.command)
    }

    pub fn render(&self, format: Format) -> Result<Vec<u8>, CliError> {
        match format {
            Format::Json => {
                #[derive(Serialize)]
                struct Doc<'a, R> {
                    schema: String,
                    metadata: &'a Map<String, Value>,
                    rows: &'a [R],
                }
                let doc = Doc { schema: self.schema(), metadata: &self.metadata, rows: &self.rows };
                let mut out = serde_json::to_vec_pretty(&doc).map_err(|e| CliError::Io(e.to_string()))?;
                out.push(b'\n');
                Ok(out)
            }
            Format::Csv => {
                let mut out = Vec::new();
                writeln!(out, "# {}", self.schema()).map_err(|e| CliError::Io(e.to_string()))?;
                for (k, v) in &self.metadata {
                    writeln!(out, "# {k}: {v}").map_err(|e| CliError::Io(e.to_string()))?;
                }
                let mut w = csv::Writer::from_writer(out);
                w.write_record(R::header()).map_err(|e| CliError::Io(e.to_string()))?;
                for r in &self.rows {
                    w.write_record(r.record()).map_err(|e| CliError::Io(e.to_string()))?;
                }
                w.into_inner().map_err(|e| CliError::Io(e.to_string()))
            }
        }
    }
}

/// Writes to `out` when given, stdout otherwise.
pub fn emit(bytes: &[u8], out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, bytes).map_err(|e| CliError::Io(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut s = std::io::stdout().lock();
            s.write_all(bytes).and_then(|_| s.flush()).map_err(|e| CliError::Io(e.to_string()))
        }
    }
}
