//! CSV tables and the plain-text summary written to the output directory.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::CliResult;

/// Formats a number so that reruns produce identical bytes.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// A table whose first row names what it measures and second row holds
/// column headers with units.
#[derive(Debug, Clone)]
pub struct Table {
    pub file: String,
    pub reference: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(file: &str, reference: &str, header: &[&str]) -> Self {
        Table {
            file: file.to_string(),
            reference: reference.to_string(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn write(&self, dir: &Path) -> CliResult<PathBuf> {
        let path = dir.join(&self.file);
        let mut w = csv::WriterBuilder::new().flexible(true).from_path(&path)?;
        w.write_record(["reference", self.reference.as_str()])?;
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(path)
    }
}

/// Lines of `summary.txt`.
#[derive(Debug, Clone, Default)]
pub struct Summary {
    lines: Vec<String>,
    pub failures: Vec<String>,
}

impl Summary {
    pub fn new(title: &str) -> Self {
        Summary {
            lines: vec![title.to_string()],
            failures: Vec::new(),
        }
    }

    pub fn kv(&mut self, key: &str, value: impl std::fmt::Display) {
        self.lines.push(format!("{key} = {value}"));
    }

    /// Records a named check; failed checks turn into exit status 2.
    pub fn check(&mut self, name: &str, ok: bool) {
        self.lines.push(format!("[{}] {name}", if ok { "ok" } else { "FAIL" }));
        if !ok {
            self.failures.push(name.to_string());
        }
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for l in &self.lines {
            let _ = writeln!(s, "{l}");
        }
        let verdict = if self.failures.is_empty() { "PASS" } else { "FAIL" };
        let _ = writeln!(s, "verdict = {verdict}");
        s
    }
}

/// Writes every table plus `summary.txt` into `dir`.
pub fn emit(dir: &Path, tables: &[Table], summary: &Summary) -> CliResult<String> {
    fs::create_dir_all(dir)?;
    for t in tables {
        t.write(dir)?;
    }
    let text = summary.render();
    fs::write(dir.join("summary.txt"), &text)?;
    Ok(text)
}
