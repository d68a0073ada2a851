//! Price levels to increments.

use std::io::Read;

use gnpr::Panel;

use crate::error::{invalid, Result};

/// Cells read as missing rather than malformed.
const MISSING: [&str; 5] = ["", "na", "nan", "null", "n/a"];

#[derive(Debug, Clone, PartialEq)]
pub struct Ingested {
    pub panel: Panel,
    pub dropped_rows: usize,
}

/// Reads a price CSV (header of instrument ids, one row per date), drops rows
/// with a missing cell and optionally takes first differences.
pub fn ingest<R: Read>(reader: R, diff: bool) -> Result<Ingested> {
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let ids: Vec<String> = r.headers().map_err(gnpr::Error::from)?.iter().map(str::to_string).collect();
    let mut series = vec![Vec::new(); ids.len()];
    let mut dropped_rows = 0;
    for (row, record) in r.records().enumerate() {
        let record = record.map_err(gnpr::Error::from)?;
        let mut values = Vec::with_capacity(ids.len());
        let mut missing = false;
        for (col, cell) in record.iter().enumerate() {
            if MISSING.contains(&cell.to_ascii_lowercase().as_str()) {
                missing = true;
                continue;
            }
            let v: f64 = cell.parse().ok().filter(|v: &f64| v.is_finite()).ok_or_else(|| {
                invalid(format!("row {}, column {}: {cell:?} is not a number", row + 1, col + 1))
            })?;
            values.push(v);
        }
        if missing {
            dropped_rows += 1;
            continue;
        }
        for (s, v) in series.iter_mut().zip(values) {
            s.push(v);
        }
    }
    let rows = series.first().map_or(0, Vec::len);
    if rows < 3 {
        return Err(invalid(format!("need at least 3 complete rows, got {rows}")));
    }
    if diff {
        for s in series.iter_mut() {
            *s = s.windows(2).map(|w| w[1] - w[0]).collect();
        }
    }
    Ok(Ingested {
        panel: Panel::new(series, ids)?,
        dropped_rows,
    })
}
