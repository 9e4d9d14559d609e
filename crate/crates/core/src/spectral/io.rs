//! Two-column `(omega, J)` tables and `(n, lambda, E)` chain exports.

use std::io::{Read, Write};

use super::{RcLevel, SpectralDensity};
use crate::{Error, Result};

/// Read a tabulated SD from CSV with a one-line header and columns
/// `omega, J`.
pub fn read_table_csv<R: Read>(reader: R) -> Result<SpectralDensity> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut omega = Vec::new();
    let mut values = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record?;
        if record.len() < 2 {
            return Err(Error::invalid(format!(
                "row {} has {} columns, expected 2",
                line + 2,
                record.len()
            )));
        }
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|e| Error::invalid(format!("row {}: {e}: {s:?}", line + 2)))
        };
        omega.push(parse(&record[0])?);
        values.push(parse(&record[1])?);
    }
    SpectralDensity::tabulated(omega, values)
}

/// Write a density sampled on its own grid (tabulated) or on `grid`.
pub fn write_table_csv<W: Write>(writer: W, sd: &SpectralDensity, grid: Option<&[f64]>) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["omega", "J"])?;
    let rows: Vec<(f64, f64)> = match (grid, sd) {
        (Some(g), _) => g.iter().map(|&w| (w, sd.eval(w))).collect(),
        (None, SpectralDensity::Tabulated(t)) => t.omega().iter().copied().zip(t.values().iter().copied()).collect(),
        (None, _) => {
            let (a, b) = sd.support();
            super::chebyshev_grid(a, b, 513).into_iter().map(|w| (w, sd.eval(w))).collect()
        }
    };
    for (w, j) in rows {
        wtr.write_record([format!("{w:e}"), format!("{j:e}")])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Write chain coefficients as `n, lambda, E` (level index from 0).
pub fn write_chain_csv<W: Write>(writer: W, levels: &[RcLevel]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["n", "lambda", "E"])?;
    for (n, level) in levels.iter().enumerate() {
        wtr.write_record([
            n.to_string(),
            format!("{:e}", level.coupling),
            format!("{:e}", level.energy),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Read back `(n, lambda, E)` rows.
pub fn read_chain_csv<R: Read>(reader: R) -> Result<Vec<(usize, f64, f64)>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut out = Vec::new();
    for record in rdr.deserialize() {
        let (n, lambda, e): (usize, f64, f64) = record?;
        out.push((n, lambda, e));
    }
    Ok(out)
}
