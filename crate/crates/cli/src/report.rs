//! CSV output: `#`-prefixed config lines, a header row, then records.

use std::io::Write;

use num_complex::Complex64;

use crate::CliError;

/// 17 significant digits, enough to round-trip an `f64`.
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn complex(z: Complex64) -> String {
    format!("{},{}", float(z.re), float(z.im))
}

pub fn opt_complex(z: Option<Complex64>) -> (String, String) {
    match z {
        Some(z) => (float(z.re), float(z.im)),
        None => (String::new(), String::new()),
    }
}

pub struct Table {
    config: Vec<(String, String)>,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(config: &[(&str, String)], header: &[&str]) -> Self {
        Self {
            config: config.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn row(&mut self, r: Vec<String>) {
        debug_assert_eq!(r.len(), self.header.len());
        self.rows.push(r);
    }

    pub fn write(&self, mut out: impl Write) -> Result<(), CliError> {
        for (k, v) in &self.config {
            writeln!(out, "# {k}={v}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Reader matching [`Table::write`].
pub fn reader<R: std::io::Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(r)
}
