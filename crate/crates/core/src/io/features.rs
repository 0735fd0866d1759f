//! Feature matrices on disk.
//!
//! Binary layout (all integers little-endian):
//!
//! ```text
//! offset  size        field
//! 0       4           magic "RSAF"
//! 4       2           version (u16) = 1
//! 6       4           n_conditions (u32)
//! 10      4           n_features (u32)
//! 14      4 + L       task name: u32 byte length L, UTF-8 bytes
//! ...     n × (4 + L) condition ids, each u32 length + UTF-8 bytes
//! ...     n × f × 8   f64 values, row-major by condition
//! ```
//!
//! The file must end exactly after the payload. Files with a `.csv`
//! extension are read as text instead: a header row, then one row per
//! condition holding its id followed by the feature values. The task name of
//! a CSV file is its file stem.

use std::collections::HashSet;
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::types::{FeatureMatrix, TaskId};

pub const MAGIC: &[u8; 4] = b"RSAF";
pub const VERSION: u16 = 1;

pub fn encode_features<T: Scalar>(fm: &FeatureMatrix<T>) -> Vec<u8> {
    let mut out = Vec::with_capacity(32 + fm.data().len() * 8);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(fm.n_conditions() as u32).to_le_bytes());
    out.extend_from_slice(&(fm.n_features() as u32).to_le_bytes());
    let mut put_str = |s: &str| {
        out.extend_from_slice(&(s.len() as u32).to_le_bytes());
        out.extend_from_slice(s.as_bytes());
    };
    put_str(fm.task().as_str());
    for c in fm.conditions() {
        put_str(c);
    }
    for v in fm.data() {
        out.extend_from_slice(&v.to_f64_lossless().to_le_bytes());
    }
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let remaining = self.bytes.len() - self.pos;
        if remaining < n {
            return Err(Error::TruncatedPayload {
                offset: self.bytes.len(),
                needed: n - remaining,
            });
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn string(&mut self) -> Result<String> {
        let len = self.u32()? as usize;
        let start = self.pos;
        let raw = self.take(len)?;
        String::from_utf8(raw.to_vec()).map_err(|_| Error::BadUtf8 { offset: start })
    }
}

pub fn decode_features<T: Scalar>(bytes: &[u8]) -> Result<FeatureMatrix<T>> {
    let mut cur = Cursor { bytes, pos: 0 };
    let magic = cur.take(4).map_err(|_| Error::BadMagic)?;
    if magic != MAGIC {
        return Err(Error::BadMagic);
    }
    let version = cur.u16()?;
    if version != VERSION {
        return Err(Error::VersionUnsupported(version));
    }
    let n_conditions = cur.u32()? as usize;
    let n_features = cur.u32()? as usize;
    let task = TaskId::new(cur.string()?)?;

    let mut conditions = Vec::with_capacity(n_conditions.min(bytes.len() / 4));
    let mut seen = HashSet::new();
    for row in 0..n_conditions {
        let id = cur.string()?;
        if !seen.insert(id.clone()) {
            return Err(Error::DuplicateConditionId { id, row });
        }
        conditions.push(id);
    }

    let payload_start = cur.pos;
    let expected = n_conditions
        .checked_mul(n_features)
        .and_then(|n| n.checked_mul(8))
        .ok_or(Error::TruncatedPayload {
            offset: bytes.len(),
            needed: usize::MAX,
        })?;
    let payload = cur.take(expected)?;
    if cur.pos != bytes.len() {
        return Err(Error::TrailingBytes {
            offset: cur.pos,
            extra: bytes.len() - cur.pos,
        });
    }

    let mut data = Vec::with_capacity(n_conditions * n_features);
    for (k, chunk) in payload.chunks_exact(8).enumerate() {
        let v = f64::from_le_bytes(chunk.try_into().unwrap());
        let t = T::lit(v);
        if !t.is_finite() {
            return Err(Error::NonFinite {
                location: format!(
                    "row {} column {} (byte {})",
                    k / n_features,
                    k % n_features,
                    payload_start + 8 * k
                ),
            });
        }
        data.push(t);
    }
    FeatureMatrix::new(task, conditions, n_features, data)
}

/// Parses the CSV fallback format.
pub fn parse_features_csv<T: Scalar>(text: &str, task: TaskId) -> Result<FeatureMatrix<T>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(text.as_bytes());
    let parse_err = |location: String, e: &dyn std::fmt::Display| Error::Parse {
        location,
        message: e.to_string(),
    };
    let header = reader
        .headers()
        .map_err(|e| parse_err("header".into(), &e))?
        .clone();
    if header.len() < 2 {
        return Err(Error::Parse {
            location: "header".into(),
            message: "need an id column and at least one feature column".into(),
        });
    }
    let n_features = header.len() - 1;
    let mut conditions = Vec::new();
    let mut seen = HashSet::new();
    let mut data = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| parse_err(format!("row {row}"), &e))?;
        let id = record[0].to_string();
        if !seen.insert(id.clone()) {
            return Err(Error::DuplicateConditionId { id, row });
        }
        for (col, field) in record.iter().skip(1).enumerate() {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|e| parse_err(format!("row {row} column {}", col + 1), &e))?;
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    location: format!("row {row} column {}", col + 1),
                });
            }
            data.push(T::lit(v));
        }
        conditions.push(id);
    }
    FeatureMatrix::new(task, conditions, n_features, data)
}

fn is_csv(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

/// Reads an RSAF file, or the CSV fallback when the extension is `.csv`.
pub fn read_features<T: Scalar>(path: impl AsRef<Path>) -> Result<FeatureMatrix<T>> {
    let path = path.as_ref();
    if is_csv(path) {
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let text = std::fs::read_to_string(path)?;
        return parse_features_csv(&text, TaskId::new(stem)?);
    }
    decode_features(&std::fs::read(path)?)
}

pub fn write_features<T: Scalar>(fm: &FeatureMatrix<T>, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, encode_features(fm))?;
    Ok(())
}
