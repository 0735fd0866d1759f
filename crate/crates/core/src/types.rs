//! Domain types shared by every stage of the pipeline.
//!
//! All types validate their invariants on construction and are immutable
//! afterwards, so they can be shared freely across threads.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Name of a task (or of the model trained on it). Never empty.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct TaskId(String);

impl TaskId {
    pub fn new(name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        if name.is_empty() {
            return Err(Error::InvalidInput("task name must be non-empty".into()));
        }
        Ok(Self(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for TaskId {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        Self::new(s)
    }
}

impl From<TaskId> for String {
    fn from(t: TaskId) -> String {
        t.0
    }
}

impl fmt::Display for TaskId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Fails with [`Error::DuplicateTask`] on the first repeated name.
pub fn ensure_unique_tasks<'a>(tasks: impl IntoIterator<Item = &'a TaskId>) -> Result<()> {
    let mut seen = HashSet::new();
    for t in tasks {
        if !seen.insert(t.as_str()) {
            return Err(Error::DuplicateTask(t.to_string()));
        }
    }
    Ok(())
}

fn validate_conditions(conditions: &[String]) -> Result<()> {
    let mut seen = HashSet::new();
    for (row, c) in conditions.iter().enumerate() {
        if !seen.insert(c.as_str()) {
            return Err(Error::DuplicateConditionId { id: c.clone(), row });
        }
    }
    Ok(())
}

/// Representation of one task: one row of activations per condition.
///
/// Rows are stored contiguously in row-major order. The condition order is
/// the canonical order for every RDM derived from this matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix<T> {
    task: TaskId,
    conditions: Arc<[String]>,
    n_features: usize,
    data: Vec<T>,
}

impl<T: Scalar> FeatureMatrix<T> {
    pub const MIN_CONDITIONS: usize = 3;
    pub const MIN_FEATURES: usize = 2;

    pub fn new(
        task: TaskId,
        conditions: Vec<String>,
        n_features: usize,
        data: Vec<T>,
    ) -> Result<Self> {
        let n_conditions = conditions.len();
        if n_conditions < Self::MIN_CONDITIONS {
            return Err(Error::InvalidInput(format!(
                "need at least {} conditions, got {n_conditions}",
                Self::MIN_CONDITIONS
            )));
        }
        if n_features < Self::MIN_FEATURES {
            return Err(Error::InvalidInput(format!(
                "need at least {} features, got {n_features}",
                Self::MIN_FEATURES
            )));
        }
        if data.len() != n_conditions * n_features {
            return Err(Error::LengthMismatch {
                left: data.len(),
                right: n_conditions * n_features,
            });
        }
        validate_conditions(&conditions)?;
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                location: format!(
                    "row {} (condition `{}`), column {}",
                    pos / n_features,
                    conditions[pos / n_features],
                    pos % n_features
                ),
            });
        }
        Ok(Self {
            task,
            conditions: conditions.into(),
            n_features,
            data,
        })
    }

    /// Builds a matrix from per-condition rows; all rows must have equal length.
    pub fn from_rows(task: TaskId, conditions: Vec<String>, rows: &[Vec<T>]) -> Result<Self> {
        if rows.len() != conditions.len() {
            return Err(Error::LengthMismatch {
                left: rows.len(),
                right: conditions.len(),
            });
        }
        let n_features = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * n_features);
        for r in rows {
            if r.len() != n_features {
                return Err(Error::LengthMismatch {
                    left: r.len(),
                    right: n_features,
                });
            }
            data.extend_from_slice(r);
        }
        Self::new(task, conditions, n_features, data)
    }

    pub fn task(&self) -> &TaskId {
        &self.task
    }

    pub fn conditions(&self) -> &[String] {
        &self.conditions
    }

    pub(crate) fn shared_conditions(&self) -> Arc<[String]> {
        Arc::clone(&self.conditions)
    }

    pub fn n_conditions(&self) -> usize {
        self.conditions.len()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks_exact(self.n_features)
    }

    /// Row-major values.
    pub fn data(&self) -> &[T] {
        &self.data
    }

    /// Applies `f` to every entry, keeping task and conditions.
    pub fn map(&self, f: impl Fn(T) -> T) -> Result<Self> {
        Self::new(
            self.task.clone(),
            self.conditions.to_vec(),
            self.n_features,
            self.data.iter().map(|&v| f(v)).collect(),
        )
    }
}

/// Representational dissimilarity matrix over an ordered condition list.
///
/// Entries lie in `[0, 2]`, the diagonal is exactly zero and the matrix is
/// exactly symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct Rdm<T> {
    task: TaskId,
    conditions: Arc<[String]>,
    values: Vec<T>,
    degenerate_conditions: Vec<String>,
}

impl<T: Scalar> Rdm<T> {
    /// Validates and wraps a full row-major `n × n` matrix.
    pub fn new(task: TaskId, conditions: Vec<String>, values: Vec<T>) -> Result<Self> {
        validate_conditions(&conditions)?;
        Self::from_parts(task, conditions.into(), values, Vec::new())
    }

    pub(crate) fn from_parts(
        task: TaskId,
        conditions: Arc<[String]>,
        values: Vec<T>,
        degenerate_conditions: Vec<String>,
    ) -> Result<Self> {
        let n = conditions.len();
        if n < FeatureMatrix::<T>::MIN_CONDITIONS {
            return Err(Error::InvalidInput(format!(
                "RDM needs at least 3 conditions, got {n}"
            )));
        }
        if values.len() != n * n {
            return Err(Error::LengthMismatch {
                left: values.len(),
                right: n * n,
            });
        }
        let two = T::lit(2.0);
        for i in 0..n {
            if values[i * n + i] != T::zero() {
                return Err(Error::BadDiagonal { row: i });
            }
            for j in 0..i {
                let v = values[i * n + j];
                if !v.is_finite() {
                    return Err(Error::NonFinite {
                        location: format!("RDM entry ({i}, {j})"),
                    });
                }
                if v != values[j * n + i] {
                    return Err(Error::AsymmetricBeyondTolerance { row: i, col: j });
                }
                if v < T::zero() || v > two {
                    return Err(Error::InvalidInput(format!(
                        "RDM entry ({i}, {j}) = {v} outside [0, 2]"
                    )));
                }
            }
        }
        Ok(Self {
            task,
            conditions,
            values,
            degenerate_conditions,
        })
    }

    pub fn task(&self) -> &TaskId {
        &self.task
    }

    pub fn conditions(&self) -> &[String] {
        &self.conditions
    }

    pub fn n(&self) -> usize {
        self.conditions.len()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.values[i * self.n() + j]
    }

    /// Full row-major matrix.
    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Conditions whose representation was constant and whose pairs were
    /// assigned the maximal-uncertainty dissimilarity of 1.
    pub fn degenerate_conditions(&self) -> &[String] {
        &self.degenerate_conditions
    }

    /// Same values under a different task name.
    pub fn renamed(&self, task: TaskId) -> Self {
        Self {
            task,
            ..self.clone()
        }
    }
}

/// Task × task matrix of RDM-pair rank correlations.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix<T> {
    tasks: Vec<TaskId>,
    values: Vec<T>,
}

impl<T: Scalar> SimilarityMatrix<T> {
    pub fn new(tasks: Vec<TaskId>, values: Vec<T>) -> Result<Self> {
        let n = tasks.len();
        if n < 2 {
            return Err(Error::InvalidInput(format!(
                "similarity matrix needs at least 2 tasks, got {n}"
            )));
        }
        ensure_unique_tasks(&tasks)?;
        if values.len() != n * n {
            return Err(Error::LengthMismatch {
                left: values.len(),
                right: n * n,
            });
        }
        for i in 0..n {
            if values[i * n + i] != T::one() {
                return Err(Error::BadDiagonal { row: i });
            }
            for j in 0..i {
                let v = values[i * n + j];
                if !v.is_finite() {
                    return Err(Error::NonFinite {
                        location: format!("similarity entry ({i}, {j})"),
                    });
                }
                if v != values[j * n + i] {
                    return Err(Error::AsymmetricBeyondTolerance { row: i, col: j });
                }
                if v.abs() > T::one() {
                    return Err(Error::InvalidSimilarity(format!(
                        "entry ({i}, {j}) = {v} outside [-1, 1]"
                    )));
                }
            }
        }
        Ok(Self { tasks, values })
    }

    pub fn tasks(&self) -> &[TaskId] {
        &self.tasks
    }

    pub fn n(&self) -> usize {
        self.tasks.len()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.values[i * self.n() + j]
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn index_of(&self, task: &str) -> Option<usize> {
        self.tasks.iter().position(|t| t.as_str() == task)
    }

    /// Reorders rows and columns so that row `i` of the result is row
    /// `order[i]` of `self`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let n = self.n();
        let mut seen = vec![false; n];
        if order.len() != n || order.iter().any(|&o| o >= n || std::mem::replace(&mut seen[o], true)) {
            return Err(Error::InvalidInput("order is not a permutation".into()));
        }
        let tasks = order.iter().map(|&o| self.tasks[o].clone()).collect();
        let mut values = Vec::with_capacity(n * n);
        for &r in order {
            for &c in order {
                values.push(self.get(r, c));
            }
        }
        Self::new(tasks, values)
    }
}

/// How equal scores were ordered inside a [`Ranking`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieRule {
    /// Equal scores ordered by ascending task name (byte-wise).
    AscendingTaskName,
}

/// Candidate tasks ordered by score, best first.
#[derive(Debug, Clone, PartialEq)]
pub struct Ranking<T> {
    probe: TaskId,
    ordered: Vec<(TaskId, T)>,
    tie_rule: TieRule,
}

impl<T: Scalar> Ranking<T> {
    /// Sorts `entries` by descending score, ties by ascending task name.
    /// Entries naming the probe itself are dropped.
    pub fn new(probe: TaskId, entries: Vec<(TaskId, T)>) -> Result<Self> {
        let mut ordered: Vec<(TaskId, T)> =
            entries.into_iter().filter(|(t, _)| *t != probe).collect();
        if ordered.is_empty() {
            return Err(Error::InvalidInput("ranking needs at least one candidate".into()));
        }
        ensure_unique_tasks(ordered.iter().map(|(t, _)| t))?;
        if let Some((t, _)) = ordered.iter().find(|(_, s)| !s.is_finite()) {
            return Err(Error::NonFiniteScore(t.to_string()));
        }
        ordered.sort_by(|(ta, sa), (tb, sb)| {
            sb.partial_cmp(sa)
                .unwrap_or(Ordering::Equal)
                .then_with(|| ta.cmp(tb))
        });
        Ok(Self {
            probe,
            ordered,
            tie_rule: TieRule::AscendingTaskName,
        })
    }

    pub fn probe(&self) -> &TaskId {
        &self.probe
    }

    pub fn ordered(&self) -> &[(TaskId, T)] {
        &self.ordered
    }

    pub fn tie_rule(&self) -> TieRule {
        self.tie_rule
    }

    pub fn len(&self) -> usize {
        self.ordered.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ordered.is_empty()
    }

    pub fn top(&self) -> &TaskId {
        &self.ordered[0].0
    }

    pub fn tasks(&self) -> impl Iterator<Item = &TaskId> {
        self.ordered.iter().map(|(t, _)| t)
    }

    pub fn score_of(&self, task: &TaskId) -> Option<T> {
        self.ordered.iter().find(|(t, _)| t == task).map(|&(_, s)| s)
    }
}
