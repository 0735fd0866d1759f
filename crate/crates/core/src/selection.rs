//! Source-model selection: rank candidate models by RDM similarity to a
//! probe and measure how well such rankings agree with transfer results.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::similarity::rdm_similarity;
use crate::stats::{self, Method};
use crate::types::{Rdm, Ranking, TaskId};

/// Whether larger or smaller performance values are better.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    HigherBetter,
    LowerBetter,
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Orientation::HigherBetter => "higher_better",
            Orientation::LowerBetter => "lower_better",
        })
    }
}

impl FromStr for Orientation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "higher_better" => Ok(Orientation::HigherBetter),
            "lower_better" => Ok(Orientation::LowerBetter),
            _ => Err(Error::MissingOrientation),
        }
    }
}

/// Measured transfer performance of each source model on one target task.
///
/// Raw values are kept as given; [`Orientation`] says how to order them.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinityTable<T> {
    target: TaskId,
    entries: Vec<(TaskId, T)>,
    orientation: Orientation,
}

impl<T: Scalar> AffinityTable<T> {
    pub fn new(target: TaskId, entries: Vec<(TaskId, T)>, orientation: Orientation) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidInput("affinity table has no entries".into()));
        }
        let mut seen = HashSet::new();
        for (source, perf) in &entries {
            if !seen.insert(source.as_str()) {
                return Err(Error::DuplicateSource(source.to_string()));
            }
            if !perf.is_finite() {
                return Err(Error::NonFiniteScore(source.to_string()));
            }
        }
        Ok(Self {
            target,
            entries,
            orientation,
        })
    }

    pub fn target(&self) -> &TaskId {
        &self.target
    }

    pub fn entries(&self) -> &[(TaskId, T)] {
        &self.entries
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    /// Sources from best to worst, ties by ascending name.
    pub fn ordered_sources(&self) -> Vec<TaskId> {
        self.oriented_ranking().tasks().cloned().collect()
    }

    /// Ranking whose scores grow with quality: raw values when higher is
    /// better, negated values otherwise. An entry for the target task itself
    /// (self-transfer) is left out, mirroring [`rank_by_similarity`].
    pub fn oriented_ranking(&self) -> Ranking<T> {
        let sign = match self.orientation {
            Orientation::HigherBetter => T::one(),
            Orientation::LowerBetter => -T::one(),
        };
        let entries = self
            .entries
            .iter()
            .filter(|(s, _)| *s != self.target)
            .map(|(s, v)| (s.clone(), sign * *v))
            .collect();
        Ranking::new(self.target.clone(), entries).expect("validated entries")
    }
}

/// Ranks candidates by RDM similarity to the probe, best first.
///
/// A candidate carrying the probe's own task name is left out.
pub fn rank_by_similarity<T: Scalar>(probe: &Rdm<T>, candidates: &[Rdm<T>]) -> Result<Ranking<T>> {
    if candidates.is_empty() {
        return Err(Error::InvalidInput("need at least one candidate".into()));
    }
    let scores: Vec<(TaskId, T)> = candidates
        .par_iter()
        .filter(|c| c.task() != probe.task())
        .map(|c| Ok((c.task().clone(), rdm_similarity(probe, c)?)))
        .collect::<Result<_>>()?;
    Ranking::new(probe.task().clone(), scores)
}

fn task_set<'a>(it: impl Iterator<Item = &'a TaskId>) -> BTreeSet<&'a str> {
    it.map(TaskId::as_str).collect()
}

fn ensure_same_tasks<'a>(
    a: impl Iterator<Item = &'a TaskId>,
    b: impl Iterator<Item = &'a TaskId>,
) -> Result<()> {
    let (sa, sb) = (task_set(a), task_set(b));
    if sa != sb {
        let only_a: Vec<_> = sa.difference(&sb).collect();
        let only_b: Vec<_> = sb.difference(&sa).collect();
        return Err(Error::TaskMismatch(format!(
            "only in first: {only_a:?}; only in second: {only_b:?}"
        )));
    }
    Ok(())
}

/// Whether the best task of `rsa` is among the `k` best sources of `transfer`.
pub fn topk_agreement<T: Scalar>(rsa: &Ranking<T>, transfer: &AffinityTable<T>, k: usize) -> Result<bool> {
    if k == 0 {
        return Err(Error::InvalidK { k, n: rsa.len() });
    }
    let oriented = transfer.oriented_ranking();
    ensure_same_tasks(rsa.tasks(), oriented.tasks())?;
    let agrees = oriented.tasks().take(k).any(|t| t == rsa.top());
    Ok(agrees)
}

/// Correlation between the scores of two rankings, aligned by task.
pub fn ranking_correlation<T: Scalar>(a: &Ranking<T>, b: &Ranking<T>, method: Method) -> Result<T> {
    ensure_same_tasks(a.tasks(), b.tasks())?;
    let (sa, sb): (Vec<T>, Vec<T>) = a
        .ordered()
        .iter()
        .map(|(t, s)| (*s, b.score_of(t).expect("same task set")))
        .unzip();
    stats::correlate(method, &sa, &sb)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityRow<T> {
    pub label: String,
    pub pearson: T,
    pub spearman: T,
}

/// Pearson and Spearman agreement of each labelled ranking with `reference`,
/// in input order.
pub fn stability_report<T: Scalar>(
    rankings: &[(String, Ranking<T>)],
    reference: &Ranking<T>,
) -> Result<Vec<StabilityRow<T>>> {
    rankings
        .iter()
        .map(|(label, r)| {
            Ok(StabilityRow {
                label: label.clone(),
                pearson: ranking_correlation(r, reference, Method::Pearson)?,
                spearman: ranking_correlation(r, reference, Method::Spearman)?,
            })
        })
        .collect()
}
