//! CSV and Matrix Market sinks with the `#` config header.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use crate::error::{Error, Result};
use crate::matrix::RealMatrix;
use crate::mmio;

use super::ExperimentConfig;

/// Header row plus records, all pre-formatted.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}

/// Shortest round-trip scientific form.
pub fn num(v: f64) -> String {
    format!("{v:e}")
}

pub fn opt_num(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), num)
}

/// Config echo lines (without the `#`/`%` prefix).
pub fn header_lines(cfg: &ExperimentConfig) -> Vec<String> {
    let mut lines = vec![
        format!("mixfactor {}", env!("CARGO_PKG_VERSION")),
        format!("command: {}", cfg.command_line()),
        format!("seed: {}", cfg.seed),
        format!("mixes: {}", cfg.mixes),
        format!("presort: {}", !cfg.no_presort),
    ];
    if !cfg.no_timestamp {
        let secs = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        lines.push(format!("generated-unix-time: {secs}"));
    }
    lines
}

struct Sink {
    w: Box<dyn Write>,
    label: PathBuf,
}

impl Sink {
    fn open(out: Option<&Path>) -> Result<Self> {
        Ok(match out {
            Some(path) => Self {
                w: Box::new(BufWriter::new(File::create(path).map_err(|source| Error::Io {
                    path: path.to_path_buf(),
                    source,
                })?)),
                label: path.to_path_buf(),
            },
            None => Self {
                w: Box::new(BufWriter::new(io::stdout().lock())),
                label: PathBuf::from("<stdout>"),
            },
        })
    }

    fn io_err(&self, source: io::Error) -> Error {
        Error::Io {
            path: self.label.clone(),
            source,
        }
    }
}

pub fn write_table(cfg: &ExperimentConfig, table: &Table) -> Result<()> {
    let mut sink = Sink::open(cfg.out.as_deref())?;
    let result = (|| -> io::Result<()> {
        for line in header_lines(cfg) {
            writeln!(sink.w, "# {line}")?;
        }
        let mut csv = csv::Writer::from_writer(&mut sink.w);
        csv.write_record(&table.header)?;
        for row in &table.rows {
            csv.write_record(row)?;
        }
        csv.flush()?;
        drop(csv);
        sink.w.flush()
    })();
    result.map_err(|e| sink.io_err(e))
}

pub fn write_matrix(cfg: &ExperimentConfig, a: &RealMatrix, extra: &[String]) -> Result<()> {
    let mut comments = header_lines(cfg);
    comments.extend_from_slice(extra);
    let sink = Sink::open(cfg.out.as_deref())?;
    let label = sink.label.clone();
    mmio::write_matrix_market(sink.w, a, &comments).map_err(|source| Error::Io { path: label, source })
}
