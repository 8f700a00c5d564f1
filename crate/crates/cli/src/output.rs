use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::failure::Outcome;

/// Shortest representation that parses back to the same `f64`.
pub fn num(v: f64) -> String {
    format!("{v}")
}

/// Six decimals for the console.
pub fn show(v: f64) -> String {
    format!("{v:.6}")
}

/// Writes `#`-prefixed comment lines, a header row and the data rows.
pub fn write_csv<I>(path: &Path, command: &str, parameters: &[String], header: &[&str], rows: I) -> Outcome
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "# uav-pricing {command}")?;
    for line in parameters {
        writeln!(out, "# {line}")?;
    }
    let mut csv = csv::Writer::from_writer(out);
    csv.write_record(header)?;
    for row in rows {
        csv.write_record(&row)?;
    }
    csv.flush()?;
    Ok(())
}
