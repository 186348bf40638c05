//! Deterministic CSV emission: fixed column order, fixed float formatting,
//! rows written in grid order.

use std::io::{BufWriter, Write};
use std::path::Path;

/// Canonical float rendering used in every CSV cell.
pub fn f(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv<I>(path: &Path, header: &str, rows: I) -> std::io::Result<()>
where
    I: IntoIterator,
    I::Item: AsRef<str>,
{
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "{header}")?;
    for row in rows {
        writeln!(w, "{}", row.as_ref())?;
    }
    w.flush()
}
