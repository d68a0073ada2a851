//! CSV formats.
//!
//! - Panel: header row of series ids, then one row per time step.
//! - Partition: `series_id,label`.
//! - Distance matrix: square, the top-left cell holds the distance kind, the
//!   first row and column hold series ids; values use 17 significant digits.
//! - Dendrogram: `step,cluster_a,cluster_b,height,size`.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::cluster::{Dendrogram, Partition};
use crate::metrics::{DistanceKind, DistanceMatrix};
use crate::repr::Panel;
use crate::{Error, Result};

fn parse_cell(cell: &str, row: usize, col: usize) -> Result<f64> {
    let trimmed = cell.trim();
    trimmed
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::Parse(format!("row {row}, column {col}: {trimmed:?} is not a finite number")))
}

pub fn write_panel<W: Write>(panel: &Panel, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(panel.ids())?;
    let mut record = Vec::with_capacity(panel.n_series());
    for t in 0..panel.len() {
        record.clear();
        record.extend((0..panel.n_series()).map(|i| panel.series(i)[t].to_string()));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_panel<R: Read>(reader: R) -> Result<Panel> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let ids: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let mut series = vec![Vec::new(); ids.len()];
    for (row, record) in r.records().enumerate() {
        let record = record?;
        for (col, cell) in record.iter().enumerate() {
            series[col].push(parse_cell(cell, row + 1, col + 1)?);
        }
    }
    Panel::new(series, ids)
}

pub fn write_partition<W: Write>(ids: &[String], partition: &Partition, writer: W) -> Result<()> {
    if ids.len() != partition.len() {
        return Err(Error::LengthMismatch {
            left: ids.len(),
            right: partition.len(),
        });
    }
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["series_id", "label"])?;
    for (id, label) in ids.iter().zip(partition.labels()) {
        w.write_record([id.as_str(), &label.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_partition<R: Read>(reader: R) -> Result<(Vec<String>, Partition)> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut ids = Vec::new();
    let mut labels = Vec::new();
    for (row, record) in r.records().enumerate() {
        let record = record?;
        if record.len() != 2 {
            return Err(Error::Parse(format!("row {}: expected series_id,label", row + 1)));
        }
        ids.push(record[0].to_string());
        labels.push(record[1].parse::<usize>().map_err(|_| {
            Error::Parse(format!("row {}: label {:?} is not a non-negative integer", row + 1, &record[1]))
        })?);
    }
    Ok((ids, Partition::from_labels(labels)?))
}

pub fn write_distance_matrix<W: Write>(m: &DistanceMatrix, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec![m.kind().as_str().to_string()];
    header.extend(m.ids().iter().cloned());
    w.write_record(&header)?;
    for (i, id) in m.ids().iter().enumerate() {
        let mut record = vec![id.clone()];
        record.extend(m.row(i).iter().map(|v| format!("{v:.16e}")));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_distance_matrix<R: Read>(reader: R) -> Result<DistanceMatrix> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = r.headers()?.clone();
    let kind = match header.get(0).unwrap_or("") {
        "" => DistanceKind::Gnpr,
        k => k.parse()?,
    };
    let ids: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let mut values = Vec::with_capacity(ids.len() * ids.len());
    for (row, record) in r.records().enumerate() {
        let record = record?;
        if record.get(0) != ids.get(row).map(String::as_str) {
            return Err(Error::Parse(format!(
                "row {} is labelled {:?}, expected {:?}",
                row + 1,
                record.get(0),
                ids.get(row)
            )));
        }
        for (col, cell) in record.iter().enumerate().skip(1) {
            values.push(parse_cell(cell, row + 1, col)?);
        }
    }
    DistanceMatrix::from_values(values, ids, kind)
}

pub fn write_dendrogram<W: Write>(d: &Dendrogram, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["step", "cluster_a", "cluster_b", "height", "size"])?;
    for (step, m) in d.merges.iter().enumerate() {
        w.write_record([
            step.to_string(),
            m.a.to_string(),
            m.b.to_string(),
            format!("{:.16e}", m.height),
            m.size.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Opens `path` for buffered writing.
pub fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

/// Opens `path` for reading.
pub fn open(path: &Path) -> Result<File> {
    Ok(File::open(path)?)
}
