//! CSV tables with a comment block of run metadata.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::scenario::Scenario;

/// A named table plus extra `# key: value` metadata lines.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub meta: Vec<(String, String)>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&'static str]) -> Self {
        Self { name: name.into(), columns: columns.to_vec(), rows: Vec::new(), meta: Vec::new() }
    }

    pub fn meta(&mut self, key: impl Into<String>, value: impl ToString) -> &mut Self {
        self.meta.push((key.into(), value.to_string()));
        self
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Header row plus data rows.
    pub fn body(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| crate::error::CliError::from(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv writer emits UTF-8"))
    }

    /// Comment block followed by the body.
    pub fn render(&self, scenario: &Scenario) -> Result<String> {
        let mut out = String::new();
        out.push_str(&format!("# jdcc {}\n", env!("CARGO_PKG_VERSION")));
        out.push_str(&format!("# experiment: {}\n", self.name));
        out.push_str(&format!("# scenario_sha256: {}\n", scenario.hash));
        out.push_str(&format!("# seed: {}\n", scenario.seed()));
        for (k, v) in &self.meta {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        out.push_str(&self.body()?);
        Ok(out)
    }

    pub fn write(&self, dir: &Path, scenario: &Scenario) -> Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let path = dir.join(format!("{}.csv", self.name));
        fs::write(&path, self.render(scenario)?)?;
        Ok(path)
    }
}

/// Shortest round-trip decimal form; `inf` for unbounded values.
pub fn num(x: f64) -> String {
    format!("{x}")
}
