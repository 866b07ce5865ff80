use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

use crate::config::{Format, RunConfig};

/// `x` with six significant digits in plain decimal notation.
pub fn sig6(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

/// A rectangular result: CSV rows for `--format csv`, or a TOML document for
/// `--format text`.
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        Ok(w.into_inner().context("flushing CSV")?)
    }
}

#[derive(Serialize)]
struct TextDocument<'a, T: Serialize> {
    config: &'a RunConfig,
    results: &'a [T],
}

/// Writes `table` or `results` to the configured output path, if any.
pub fn write_output<T: Serialize>(config: &RunConfig, table: &Table, results: &[T]) -> Result<()> {
    let Some(path) = &config.out else { return Ok(()) };
    let bytes = match config.format {
        Format::Csv => table.to_csv()?,
        Format::Text => toml::to_string(&TextDocument { config, results })
            .context("serializing results")?
            .into_bytes(),
    };
    write_file(path, &bytes)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(0.05), "0.0500000");
        assert_eq!(sig6(0.123456789), "0.123457");
        assert_eq!(sig6(1.959963984540054), "1.95996");
        assert_eq!(sig6(1547.25), "1547.25");
        assert_eq!(sig6(1234567.0), "1234567");
        assert_eq!(sig6(-0.000687), "-0.000687000");
        assert_eq!(sig6(0.0), "0");
    }

    #[test]
    fn csv_has_header_and_rows() {
        let mut t = Table::new(["a", "b"]);
        t.push(vec!["1".into(), "x".into()]);
        assert_eq!(String::from_utf8(t.to_csv().unwrap()).unwrap(), "a,b\n1,x\n");
    }
}
