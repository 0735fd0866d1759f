//! RDM construction from feature matrices.
//!
//! Each row is centered once; every unordered condition pair then costs one
//! inner product. Normalization happens per pair as `c_i·c_j / sqrt(ss_i ss_j)`
//! so that identical rows give a correlation of exactly 1. Rows are processed
//! in parallel but every inner product is reduced sequentially, so the result
//! does not depend on the number of worker threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::stats;
use crate::types::{FeatureMatrix, Rdm};

/// What to do when a condition's representation is constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegeneratePolicy {
    /// Fail with [`Error::DegenerateVector`] naming the condition.
    #[default]
    Error,
    /// Treat the correlation as 0 (dissimilarity 1) and record the condition.
    MaxDissimilarity,
}

struct CenteredRow<T> {
    values: Vec<T>,
    ss: T,
    degenerate: bool,
}

fn center<T: Scalar>(row: &[T]) -> CenteredRow<T> {
    let n = T::from_usize(row.len()).unwrap();
    let mean = row.iter().copied().sum::<T>() / n;
    let values: Vec<T> = row.iter().map(|&v| v - mean).collect();
    let ss = values.iter().map(|&v| v * v).sum::<T>();
    let raw = row.iter().map(|&v| v * v).sum::<T>();
    CenteredRow {
        degenerate: stats::is_degenerate(ss, raw, row.len()),
        values,
        ss,
    }
}

#[inline]
fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

/// Builds the `1 - Pearson` dissimilarity matrix of a feature matrix.
pub fn compute_rdm<T: Scalar>(features: &FeatureMatrix<T>, policy: DegeneratePolicy) -> Result<Rdm<T>> {
    let rows: Vec<CenteredRow<T>> = features.rows().map(center).collect();

    let degenerate: Vec<String> = rows
        .iter()
        .zip(features.conditions())
        .filter(|(r, _)| r.degenerate)
        .map(|(_, c)| c.clone())
        .collect();
    if policy == DegeneratePolicy::Error {
        if let Some(c) = degenerate.first() {
            return Err(Error::DegenerateVector {
                what: format!("condition `{c}` of task `{}` has a constant representation", features.task()),
            });
        }
    }

    let n = rows.len();
    // lower[i] holds dissimilarities (i, 0..i).
    let lower: Vec<Vec<T>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..i)
                .map(|j| {
                    let (a, b) = (&rows[i], &rows[j]);
                    if a.degenerate || b.degenerate {
                        return T::one();
                    }
                    let rho = stats::normalized(dot(&a.values, &b.values), a.ss, b.ss);
                    T::one() - rho
                })
                .collect()
        })
        .collect();

    let mut values = vec![T::zero(); n * n];
    for (i, row) in lower.iter().enumerate() {
        for (j, &d) in row.iter().enumerate() {
            values[i * n + j] = d;
            values[j * n + i] = d;
        }
    }
    Rdm::from_parts(
        features.task().clone(),
        features.shared_conditions(),
        values,
        degenerate,
    )
}

/// Entries strictly below the diagonal: rows ascending, columns ascending
/// within each row, i.e. `(1,0), (2,0), (2,1), (3,0), ...`.
pub fn lower_triangle<T: Scalar>(rdm: &Rdm<T>) -> Vec<T> {
    let n = rdm.n();
    let mut out = Vec::with_capacity(n * (n - 1) / 2);
    for i in 1..n {
        out.extend_from_slice(&rdm.values()[i * n..i * n + i]);
    }
    out
}
