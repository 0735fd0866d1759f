//! Square matrices as CSV.
//!
//! The header row starts with a kind cell, `rdm:<task name>` or
//! `similarity`, followed by the column ids (condition ids or task names).
//! Each following row holds its id and the values, printed with 17
//! significant digits so that doubles survive the round trip exactly.

use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::types::{Rdm, SimilarityMatrix, TaskId};

/// Maximum asymmetry or diagonal deviation accepted on read.
pub const READ_TOL: f64 = 1e-9;

const RDM_PREFIX: &str = "rdm:";
const SIMILARITY_KIND: &str = "similarity";

#[derive(Debug, Clone, PartialEq)]
pub enum LabeledMatrix<T> {
    Rdm(Rdm<T>),
    Similarity(SimilarityMatrix<T>),
}

/// 17 significant digits, scientific notation.
pub fn format_value<T: Scalar>(v: T) -> String {
    format!("{:.16e}", v.to_f64_lossless())
}

fn render<T: Scalar>(kind: String, ids: &[&str], values: &[T]) -> String {
    let n = ids.len();
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let mut header = vec![kind.as_str()];
    header.extend_from_slice(ids);
    w.write_record(&header).expect("in-memory write");
    for (i, id) in ids.iter().enumerate() {
        let row = std::iter::once(id.to_string()).chain(values[i * n..(i + 1) * n].iter().map(|&v| format_value(v)));
        w.write_record(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

pub fn format_rdm<T: Scalar>(rdm: &Rdm<T>) -> String {
    let ids: Vec<&str> = rdm.conditions().iter().map(String::as_str).collect();
    render(format!("{RDM_PREFIX}{}", rdm.task()), &ids, rdm.values())
}

pub fn format_similarity<T: Scalar>(sim: &SimilarityMatrix<T>) -> String {
    let ids: Vec<&str> = sim.tasks().iter().map(TaskId::as_str).collect();
    render(SIMILARITY_KIND.to_string(), &ids, sim.values())
}

pub fn write_matrix<T: Scalar>(matrix: &LabeledMatrix<T>, path: impl AsRef<Path>) -> Result<()> {
    let text = match matrix {
        LabeledMatrix::Rdm(r) => format_rdm(r),
        LabeledMatrix::Similarity(s) => format_similarity(s),
    };
    std::fs::write(path, text)?;
    Ok(())
}

pub fn write_rdm<T: Scalar>(rdm: &Rdm<T>, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, format_rdm(rdm))?;
    Ok(())
}

pub fn write_similarity<T: Scalar>(sim: &SimilarityMatrix<T>, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, format_similarity(sim))?;
    Ok(())
}

/// Parses either matrix kind, re-validating symmetry and the diagonal.
///
/// Deviations up to [`READ_TOL`] are repaired by mirroring the lower
/// triangle and resetting the diagonal; larger ones are rejected.
pub fn parse_matrix<T: Scalar>(text: &str) -> Result<LabeledMatrix<T>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut records = reader.records();
    let header = match records.next() {
        Some(r) => r.map_err(|e| Error::Parse {
            location: "header".into(),
            message: e.to_string(),
        })?,
        None => {
            return Err(Error::Parse {
                location: "header".into(),
                message: "empty file".into(),
            })
        }
    };
    let kind = header.get(0).unwrap_or_default().to_string();
    let ids: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let n = ids.len();

    let mut values = vec![T::zero(); n * n];
    let mut rows = 0;
    for (i, rec) in records.enumerate() {
        let rec = rec.map_err(|e| Error::Parse {
            location: format!("row {i}"),
            message: e.to_string(),
        })?;
        if i >= n {
            return Err(Error::Parse {
                location: format!("row {i}"),
                message: format!("more rows than the {n} header ids"),
            });
        }
        if rec.len() != n + 1 {
            return Err(Error::Parse {
                location: format!("row {i}"),
                message: format!("expected {} fields, got {}", n + 1, rec.len()),
            });
        }
        if rec[0] != ids[i] {
            return Err(Error::Parse {
                location: format!("row {i}"),
                message: format!("row id `{}` does not match column id `{}`", &rec[0], ids[i]),
            });
        }
        for (j, field) in rec.iter().skip(1).enumerate() {
            let v: f64 = field.trim().parse().map_err(|e: std::num::ParseFloatError| Error::Parse {
                location: format!("row {i} column {j}"),
                message: e.to_string(),
            })?;
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    location: format!("row {i} column {j}"),
                });
            }
            values[i * n + j] = T::lit(v);
        }
        rows += 1;
    }
    if rows != n {
        return Err(Error::Parse {
            location: format!("row {rows}"),
            message: format!("expected {n} rows, got {rows}"),
        });
    }

    let diag = if kind == SIMILARITY_KIND { T::one() } else { T::zero() };
    let tol = T::lit(READ_TOL);
    for i in 0..n {
        if (values[i * n + i] - diag).abs() > tol {
            return Err(Error::BadDiagonal { row: i });
        }
        values[i * n + i] = diag;
        for j in 0..i {
            if (values[i * n + j] - values[j * n + i]).abs() > tol {
                return Err(Error::AsymmetricBeyondTolerance { row: i, col: j });
            }
            values[j * n + i] = values[i * n + j];
        }
    }

    if kind == SIMILARITY_KIND {
        let tasks = ids.into_iter().map(TaskId::new).collect::<Result<_>>()?;
        Ok(LabeledMatrix::Similarity(SimilarityMatrix::new(tasks, values)?))
    } else if let Some(task) = kind.strip_prefix(RDM_PREFIX) {
        Ok(LabeledMatrix::Rdm(Rdm::new(TaskId::new(task)?, ids, values)?))
    } else {
        Err(Error::Parse {
            location: "header".into(),
            message: format!("unknown matrix kind `{kind}`"),
        })
    }
}

pub fn read_matrix<T: Scalar>(path: impl AsRef<Path>) -> Result<LabeledMatrix<T>> {
    parse_matrix(&std::fs::read_to_string(path)?)
}

pub fn read_rdm<T: Scalar>(path: impl AsRef<Path>) -> Result<Rdm<T>> {
    match read_matrix(path)? {
        LabeledMatrix::Rdm(r) => Ok(r),
        LabeledMatrix::Similarity(_) => Err(Error::InvalidInput(
            "expected an RDM, found a similarity matrix".into(),
        )),
    }
}

pub fn read_similarity<T: Scalar>(path: impl AsRef<Path>) -> Result<SimilarityMatrix<T>> {
    match read_matrix(path)? {
        LabeledMatrix::Similarity(s) => Ok(s),
        LabeledMatrix::Rdm(_) => Err(Error::InvalidInput(
            "expected a similarity matrix, found an RDM".into(),
        )),
    }
}
