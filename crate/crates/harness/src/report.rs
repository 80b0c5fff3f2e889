//! Deterministic CSV emission: fixed float formatting and sorted rows make
//! re-runs with the same seed byte-identical.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

/// Uniform float rendering for reports.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.12e}")
    }
}

#[derive(Clone, Debug)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        CsvTable {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row arity mismatch");
        self.rows.push(row);
    }

    /// Stable lexicographic row order.
    pub fn sort(&mut self) {
        self.rows.sort();
    }

    pub fn to_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.header.join(","));
        for row in &self.rows {
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, self.to_string())
    }

    pub fn parse(text: &str) -> Option<CsvTable> {
        let mut lines = text.lines();
        let header: Vec<String> = lines.next()?.split(',').map(|s| s.to_string()).collect();
        let rows = lines
            .filter(|l| !l.is_empty())
            .map(|l| l.split(',').map(|s| s.to_string()).collect())
            .collect();
        Some(CsvTable { header, rows })
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}

/// Collects the run's tables keyed by report name.
#[derive(Default)]
pub struct ReportSet {
    pub tables: BTreeMap<String, CsvTable>,
}

impl ReportSet {
    pub fn table(&mut self, name: &str, header: &[&str]) -> &mut CsvTable {
        self.tables
            .entry(name.to_string())
            .or_insert_with(|| CsvTable::new(header))
    }
}
