//! RDM-pair similarity scores and task-similarity matrices.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rdm::lower_triangle;
use crate::scalar::Scalar;
use crate::stats::{self, Method, RankVector};
use crate::types::{ensure_unique_tasks, Rdm, SimilarityMatrix};

fn ensure_same_conditions<T: Scalar>(a: &Rdm<T>, b: &Rdm<T>) -> Result<()> {
    if a.conditions() != b.conditions() {
        return Err(Error::ConditionMismatch {
            left: a.task().to_string(),
            right: b.task().to_string(),
        });
    }
    Ok(())
}

fn name_degenerate<T: Scalar>(err: Error, a: &Rdm<T>, b: &Rdm<T>) -> Error {
    match err {
        Error::DegenerateVector { .. } => Error::DegenerateVector {
            what: format!("constant RDM triangle comparing `{}` with `{}`", a.task(), b.task()),
        },
        other => other,
    }
}

/// Spearman correlation of the lower triangles of two RDMs.
pub fn rdm_similarity<T: Scalar>(a: &Rdm<T>, b: &Rdm<T>) -> Result<T> {
    ensure_same_conditions(a, b)?;
    stats::spearman(&lower_triangle(a), &lower_triangle(b)).map_err(|e| name_degenerate(e, a, b))
}

/// Pairwise [`rdm_similarity`] of every task, with the diagonal fixed to 1.
///
/// Each triangle is ranked once; pairs are scored in parallel.
pub fn similarity_matrix<T: Scalar>(rdms: &[Rdm<T>]) -> Result<SimilarityMatrix<T>> {
    let n = rdms.len();
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "need >= 2 RDMs for a similarity matrix, got {n}"
        )));
    }
    ensure_unique_tasks(rdms.iter().map(Rdm::task))?;
    for r in &rdms[1..] {
        ensure_same_conditions(&rdms[0], r)?;
    }

    let ranks: Vec<RankVector<T>> = rdms
        .par_iter()
        .map(|r| stats::rank_average_ties(&lower_triangle(r)))
        .collect::<Result<_>>()?;

    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..i).map(move |j| (i, j))).collect();
    let scores: Vec<T> = pairs
        .par_iter()
        .map(|&(i, j)| {
            stats::spearman_from_ranks(&ranks[i], &ranks[j])
                .map_err(|e| name_degenerate(e, &rdms[i], &rdms[j]))
        })
        .collect::<Result<_>>()?;

    let mut values = vec![T::zero(); n * n];
    for i in 0..n {
        values[i * n + i] = T::one();
    }
    for (&(i, j), &s) in pairs.iter().zip(&scores) {
        values[i * n + j] = s;
        values[j * n + i] = s;
    }
    SimilarityMatrix::new(rdms.iter().map(|r| r.task().clone()).collect(), values)
}

/// How two square matrices are vectorized before correlating them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatrixCorrelationMode {
    /// Leave out diagonal entries.
    pub drop_diagonal: bool,
    /// Correlate column by column and report the mean instead of correlating
    /// the whole flattened matrix.
    pub per_column: bool,
}

impl Default for MatrixCorrelationMode {
    fn default() -> Self {
        Self {
            drop_diagonal: true,
            per_column: false,
        }
    }
}

/// Correlation between two similarity matrices over the same task list.
///
/// Whole-matrix mode flattens every retained entry row-major. Per-column
/// mode averages the correlations of corresponding columns.
pub fn matrix_correlation<T: Scalar>(
    a: &SimilarityMatrix<T>,
    b: &SimilarityMatrix<T>,
    method: Method,
    mode: MatrixCorrelationMode,
) -> Result<T> {
    if a.tasks() != b.tasks() {
        return Err(Error::TaskMismatch(
            "similarity matrices must share one ordered task list".into(),
        ));
    }
    let n = a.n();
    let keep = |i: usize, j: usize| !(mode.drop_diagonal && i == j);

    if mode.per_column {
        let mut total = T::zero();
        for j in 0..n {
            let (ca, cb): (Vec<T>, Vec<T>) = (0..n)
                .filter(|&i| keep(i, j))
                .map(|i| (a.get(i, j), b.get(i, j)))
                .unzip();
            total += stats::correlate(method, &ca, &cb)?;
        }
        return Ok(total / T::from_usize(n).unwrap());
    }

    let (va, vb): (Vec<T>, Vec<T>) = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| keep(i, j))
        .map(|(i, j)| (a.get(i, j), b.get(i, j)))
        .unzip();
    stats::correlate(method, &va, &vb)
}
