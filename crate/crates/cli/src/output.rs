use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::args::Format;
use crate::error::CliError;

pub const SCHEMA: u32 = 1;

/// Versioned report: the operation, its inputs, then the results.
#[derive(Serialize)]
pub struct Envelope<'a, I: Serialize, B: Serialize> {
    pub schema: u32,
    pub op: &'static str,
    pub inputs: &'a I,
    #[serde(flatten)]
    pub body: B,
}

/// Shortest round-trip text, in exponent form for very small or large magnitudes.
pub fn fmt_num(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{v:e}")
    } else {
        v.to_string()
    }
}

/// A named CSV table.
pub struct Table {
    pub name: String,
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: impl Into<String>, headers: Vec<&'static str>) -> Self {
        Self {
            name: name.into(),
            headers,
            rows: Vec::new(),
        }
    }

    pub fn push_numbers(&mut self, row: &[f64]) {
        self.rows.push(row.iter().map(|&v| fmt_num(v)).collect());
    }

    pub fn write_to(&self, w: impl Write) -> Result<(), CliError> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.headers)?;
        for row in &self.rows {
            out.write_record(row)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn write_file(&self, dir: &Path) -> Result<PathBuf, CliError> {
        let path = dir.join(format!("{}.csv", self.name));
        self.write_to(fs::File::create(&path)?)?;
        Ok(path)
    }
}

/// Where reports go: optional output directory plus the stdout format.
pub struct Sink {
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl Sink {
    pub fn out_dir(&self) -> Result<Option<&Path>, CliError> {
        match &self.out {
            Some(dir) => {
                fs::create_dir_all(dir)?;
                Ok(Some(dir))
            }
            None => Ok(None),
        }
    }

    /// Writes `report.json` and every table under `--out`, then prints the
    /// report or the first table on stdout.
    pub fn emit(&self, report: &impl Serialize, tables: &[Table]) -> Result<(), CliError> {
        self.emit_as("report", report, tables)
    }

    /// As [`Sink::emit`], with the report stored as `<report_name>.json`.
    pub fn emit_as(&self, report_name: &str, report: &impl Serialize, tables: &[Table]) -> Result<(), CliError> {
        let json = serde_json::to_string_pretty(report)?;
        if let Some(dir) = self.out_dir()? {
            fs::write(dir.join(format!("{report_name}.json")), format!("{json}\n"))?;
            for t in tables {
                t.write_file(dir)?;
            }
        }
        let stdout = io::stdout();
        match (self.format, tables.first()) {
            (Format::Csv, Some(t)) => t.write_to(stdout.lock())?,
            _ => writeln!(stdout.lock(), "{json}")?,
        }
        Ok(())
    }
}
