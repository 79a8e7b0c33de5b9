use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Everything a task produces, before it is rendered.
#[derive(Clone, Debug)]
pub struct Report {
    pub result: Value,
    pub csv_header: Vec<String>,
    pub csv_rows: Vec<Vec<String>>,
    /// Side file written next to the main output (table diff reports).
    pub companion: Option<String>,
}

#[derive(Serialize)]
pub struct Envelope<'a> {
    pub provenance: &'a Value,
    pub result: &'a Value,
    /// The only field that changes between identical runs.
    pub timestamp: String,
}

pub fn render_json(provenance: &Value, result: &Value, timestamp: String) -> String {
    let env = Envelope {
        provenance,
        result,
        timestamp,
    };
    let mut s = serde_json::to_string_pretty(&env).expect("json values serialise");
    s.push('\n');
    s
}

pub fn render_csv(header: &[String], rows: &[Vec<String>]) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

/// Writes via a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, contents: &str) -> anyhow::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating a temporary file in {}", dir.display()))?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

/// `out.csv` → `out.csv.diff.txt`.
pub fn companion_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".diff.txt");
    PathBuf::from(name)
}

pub fn fixed2(v: f64) -> String {
    format!("{v:.2}")
}

pub fn round2(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}
