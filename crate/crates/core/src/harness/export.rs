//! CSV and JSON output with a provenance header.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::process::Command;
use std::sync::OnceLock;

use serde::Serialize;

use super::config::FORMAT_VERSION;
use crate::error::Result;

/// `git describe --always --dirty` of the source tree, or `unknown`.
pub fn git_describe() -> &'static str {
    static DESCRIBE: OnceLock<String> = OnceLock::new();
    DESCRIBE.get_or_init(|| {
        if let Ok(v) = std::env::var("PEELFRAG_GIT_DESCRIBE") {
            return v;
        }
        Command::new("git")
            .args(["describe", "--always", "--dirty"])
            .current_dir(env!("CARGO_MANIFEST_DIR"))
            .output()
            .ok()
            .filter(|o| o.status.success())
            .and_then(|o| String::from_utf8(o.stdout).ok())
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .unwrap_or_else(|| "unknown".into())
    })
}

/// Identifies the code, seed and configuration that produced a file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Provenance {
    pub git: String,
    pub seed: u64,
    pub config: String,
    pub format: u32,
}

impl Provenance {
    pub fn new(seed: u64, config_hash: &str) -> Self {
        Provenance { git: git_describe().to_string(), seed, config: config_hash.to_string(), format: FORMAT_VERSION }
    }

    /// The one-line `#` header.
    pub fn header(&self) -> String {
        format!(
            "# peelfrag {} format={} git={} seed={} config={}",
            env!("CARGO_PKG_VERSION"),
            self.format,
            self.git,
            self.seed,
            self.config
        )
    }
}

/// A JSON document with its provenance alongside the body's fields.
#[derive(Debug, Serialize)]
pub struct WithProvenance<'a, T: Serialize> {
    pub provenance: &'a Provenance,
    #[serde(flatten)]
    pub body: &'a T,
}

/// A table of already formatted cells.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push<I: IntoIterator<Item = String>>(&mut self, row: I) {
        self.rows.push(row.into_iter().collect());
    }
}

/// Shortest text that reads back to the same `f64`.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

/// Write `table` as CSV to `out` after the provenance header.
pub fn write_csv_to<W: Write>(out: W, prov: &Provenance, table: &Table) -> Result<()> {
    let mut out = out;
    writeln!(out, "{}", prov.header())?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&table.columns)?;
    for r in &table.rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv(path: &Path, prov: &Provenance, table: &Table) -> Result<()> {
    write_csv_to(BufWriter::new(File::create(path)?), prov, table)
}

/// Pretty JSON with a trailing newline.
pub fn write_json_to<W: Write, T: Serialize>(out: W, value: &T) -> Result<()> {
    let mut out = out;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_json_to(BufWriter::new(File::create(path)?), value)
}
