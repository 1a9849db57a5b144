//! Small helpers shared by the delimiter-separated table writers.

use std::io::Write;

use crate::error::{Error, Result};

/// Fixed six-decimal rendering; negative zero prints as zero so reruns
/// stay byte-identical.
pub fn f6(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".to_string()
    } else {
        s
    }
}

pub(crate) fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out)
}

pub(crate) fn csv_err(table: &str, e: csv::Error) -> Error {
    Error::Table {
        table: table.to_string(),
        message: e.to_string(),
    }
}

pub(crate) fn field<T: std::str::FromStr>(
    table: &str,
    rec: &csv::StringRecord,
    idx: usize,
) -> Result<T> {
    let raw = rec.get(idx).ok_or_else(|| Error::Table {
        table: table.to_string(),
        message: format!(
            "row {:?} has no column {idx}",
            rec.position().map(|p| p.line())
        ),
    })?;
    raw.trim().parse().map_err(|_| Error::Table {
        table: table.to_string(),
        message: format!("cannot parse {raw:?} in column {idx}"),
    })
}
