//! Result tables and their CSV encoding.

use std::io::{self, Write};

use crate::config::ExperimentConfig;

/// Version stamped into every CSV header.
pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Prefix of the only header line allowed to differ between reruns.
pub const TIMESTAMP_PREFIX: &str = "# timestamp_unix: ";

#[derive(Clone, Debug, PartialEq)]
pub struct ResultTable {
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
    notes: Vec<String>,
}

impl ResultTable {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new(), notes: Vec::new() }
    }

    /// Panics when the row does not cover every declared column.
    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match the header");
        self.rows.push(row);
    }

    /// Free-text line carried in the header, e.g. a fitted summary.
    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn notes(&self) -> &[String] {
        &self.notes
    }

    pub fn col_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.col_index(name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    /// Value of `name` in `row`; panics on an unknown column.
    pub fn get(&self, row: &[f64], name: &str) -> f64 {
        row[self.col_index(name).unwrap_or_else(|| panic!("no column {name}"))]
    }

    /// Header comments, column names and rows. The timestamp line is written
    /// only when `timestamp` is given.
    pub fn write_csv<W: Write>(&self, cfg: &ExperimentConfig, timestamp: Option<u64>, out: W) -> io::Result<()> {
        let mut out = out;
        writeln!(out, "# projens {}", cfg.experiment)?;
        writeln!(out, "# code_version: {CODE_VERSION}")?;
        writeln!(out, "# generator: {}", projens_core::random::GENERATOR_NAME)?;
        writeln!(out, "# seed: {}", cfg.seed)?;
        writeln!(out, "# config_sha256: {}", cfg.hash())?;
        for line in cfg.to_toml().lines() {
            writeln!(out, "# config: {line}")?;
        }
        for n in &self.notes {
            writeln!(out, "# note: {n}")?;
        }
        if let Some(ts) = timestamp {
            writeln!(out, "{TIMESTAMP_PREFIX}{ts}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| format!("{v}")))?;
        }
        w.flush()
    }

    pub fn to_csv_string(&self, cfg: &ExperimentConfig, timestamp: Option<u64>) -> String {
        let mut buf = Vec::new();
        self.write_csv(cfg, timestamp, &mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("utf-8 output")
    }
}

/// CSV text with the timestamp line removed, for reproducibility checks.
pub fn payload(csv: &str) -> String {
    csv.lines()
        .filter(|l| !l.starts_with(TIMESTAMP_PREFIX))
        .map(|l| format!("{l}\n"))
        .collect()
}

/// The `code_version` recorded in an existing CSV, if any.
pub fn recorded_version(csv: &str) -> Option<&str> {
    csv.lines().find_map(|l| l.strip_prefix("# code_version: "))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Experiment;

    #[test]
    fn csv_layout() {
        let mut t = ResultTable::new(&["a", "b"]);
        t.push(vec![1.0, 0.25]);
        t.push(vec![f64::NAN, -3.0]);
        t.note("slope = -0.5");
        let cfg = ExperimentConfig::defaults(Experiment::Echo);
        let s = t.to_csv_string(&cfg, Some(17));
        assert!(s.starts_with("# projens echo\n"));
        assert!(s.contains("# note: slope = -0.5\n"));
        assert!(s.contains("# timestamp_unix: 17\n"));
        assert!(s.ends_with("a,b\n1,0.25\nNaN,-3\n"));
        assert_eq!(recorded_version(&s), Some(CODE_VERSION));
        assert_eq!(payload(&s), t.to_csv_string(&cfg, None));
    }

    #[test]
    #[should_panic(expected = "row width")]
    fn short_rows_are_rejected() {
        ResultTable::new(&["a", "b"]).push(vec![1.0]);
    }
}
