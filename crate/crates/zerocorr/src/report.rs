//! CSV and JSON output.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use zerocorr_core::empirical::{CorrelationHistogram, TripleHistogram};

use crate::error::{CliError, CliResult};

pub const SCHEMA: u32 = 1;
pub const HISTOGRAM_HEADER: &str = "bin_lo,bin_hi,value,stderr";

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        // one spelling for both signed zeros
        return "0.0000000000000000e0".to_string();
    }
    format!("{x:.16e}")
}

/// A CSV table built in memory and written in one go.
#[derive(Debug, Clone, PartialEq)]
pub struct Csv {
    text: String,
    columns: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Csv { text, columns: header.len() }
    }

    pub fn row(&mut self, values: &[f64]) {
        debug_assert_eq!(values.len(), self.columns);
        for (i, v) in values.iter().enumerate() {
            if i > 0 {
                self.text.push(',');
            }
            self.text.push_str(&fmt_f64(*v));
        }
        self.text.push('\n');
    }

    /// A row whose cells are already formatted.
    pub fn raw_row(&mut self, cells: &[String]) {
        debug_assert_eq!(cells.len(), self.columns);
        let _ = writeln!(self.text, "{}", cells.join(","));
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }
}

pub fn histogram_csv(h: &CorrelationHistogram) -> Csv {
    let mut csv = Csv::new(&["bin_lo", "bin_hi", "value", "stderr"]);
    for (i, err) in h.stderr().into_iter().enumerate() {
        let (lo, hi) = h.bin(i);
        csv.row(&[lo, hi, h.counts[i], err]);
    }
    csv
}

pub fn triple_csv(h: &TripleHistogram) -> Csv {
    let mut csv = Csv::new(&["e12_lo", "e12_hi", "e23_lo", "e23_hi", "value", "stderr"]);
    let (rows, cols) = h.shape();
    let err = h.stderr();
    for i in 0..rows {
        for j in 0..cols {
            csv.row(&[
                h.edges_12[i],
                h.edges_12[i + 1],
                h.edges_23[j],
                h.edges_23[j + 1],
                h.value(i, j),
                err[i * cols + j],
            ]);
        }
    }
    csv
}

/// JSON document tagged with the schema version.
pub fn json_document<T: Serialize>(command: &str, body: &T) -> CliResult<String> {
    let mut v = serde_json::to_value(body).map_err(|e| CliError::config(e.to_string()))?;
    let mut doc = serde_json::Map::new();
    doc.insert("schema".into(), Value::from(SCHEMA));
    doc.insert("command".into(), Value::from(command));
    if let Value::Object(fields) = &mut v {
        doc.append(fields);
    } else {
        doc.insert("data".into(), v);
    }
    let mut s = serde_json::to_string_pretty(&Value::Object(doc)).map_err(|e| CliError::config(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Where output goes: a file, or stdout for `-`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sink {
    Stdout,
    File(PathBuf),
}

impl Sink {
    pub fn parse(s: &str) -> Self {
        if s == "-" {
            Sink::Stdout
        } else {
            Sink::File(PathBuf::from(s))
        }
    }

    pub fn write(&self, content: &str) -> CliResult<()> {
        match self {
            Sink::Stdout => {
                let mut out = io::stdout().lock();
                out.write_all(content.as_bytes())?;
                out.flush()?;
                Ok(())
            }
            Sink::File(p) => write_file(p, content),
        }
    }

    /// A file next to this one with `suffix` replacing the extension; none for stdout.
    pub fn sibling(&self, suffix: &str) -> Option<Sink> {
        match self {
            Sink::Stdout => None,
            Sink::File(p) => {
                let stem = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                Some(Sink::File(p.with_file_name(format!("{stem}.{suffix}"))))
            }
        }
    }
}

fn write_file(path: &Path, content: &str) -> CliResult<()> {
    fs::write(path, content).map_err(|source| CliError::File { path: path.display().to_string(), source })
}
