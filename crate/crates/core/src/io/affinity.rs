//! Transfer-performance tables as CSV.
//!
//! ```text
//! target,Pascal VOC segmentation,higher_better
//! source_task,performance
//! Object class,0.6492
//! Scene class,0.6529
//! ```
//!
//! The first row declares the target task and the orientation
//! (`higher_better` or `lower_better`); the second is the column header.

use std::path::Path;

use crate::error::{Error, Result};
use crate::io::matrix::format_value;
use crate::scalar::Scalar;
use crate::selection::{AffinityTable, Orientation};
use crate::types::TaskId;

pub fn parse_affinity<T: Scalar>(text: &str) -> Result<AffinityTable<T>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut records = reader.records();
    let csv_err = |row: usize, e: csv::Error| Error::Parse {
        location: format!("row {row}"),
        message: e.to_string(),
    };

    let meta = records
        .next()
        .ok_or(Error::MissingOrientation)?
        .map_err(|e| csv_err(0, e))?;
    if meta.len() != 3 || &meta[0] != "target" {
        return Err(Error::MissingOrientation);
    }
    let target = TaskId::new(&meta[1])?;
    let orientation: Orientation = meta[2].trim().parse()?;

    let header = records
        .next()
        .ok_or_else(|| Error::InvalidInput("affinity table has no entries".into()))?
        .map_err(|e| csv_err(1, e))?;
    if header.len() != 2 || &header[0] != "source_task" || &header[1] != "performance" {
        return Err(Error::Parse {
            location: "row 1".into(),
            message: "expected header `source_task,performance`".into(),
        });
    }

    let mut entries = Vec::new();
    for (k, rec) in records.enumerate() {
        let row = k + 2;
        let rec = rec.map_err(|e| csv_err(row, e))?;
        if rec.len() != 2 {
            return Err(Error::Parse {
                location: format!("row {row}"),
                message: format!("expected 2 fields, got {}", rec.len()),
            });
        }
        let source = TaskId::new(&rec[0])?;
        let value: f64 = rec[1].trim().parse().map_err(|e: std::num::ParseFloatError| Error::Parse {
            location: format!("row {row}"),
            message: e.to_string(),
        })?;
        if !value.is_finite() {
            return Err(Error::NonFiniteScore(source.to_string()));
        }
        entries.push((source, T::lit(value)));
    }
    AffinityTable::new(target, entries, orientation)
}

pub fn read_affinity<T: Scalar>(path: impl AsRef<Path>) -> Result<AffinityTable<T>> {
    parse_affinity(&std::fs::read_to_string(path)?)
}

pub fn format_affinity<T: Scalar>(table: &AffinityTable<T>) -> String {
    let mut w = csv::WriterBuilder::new()
        .flexible(true)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(["target", table.target().as_str(), &table.orientation().to_string()])
        .expect("in-memory write");
    w.write_record(["source_task", "performance"]).expect("in-memory write");
    for (source, v) in table.entries() {
        w.write_record([source.as_str(), &format_value(*v)]).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}
