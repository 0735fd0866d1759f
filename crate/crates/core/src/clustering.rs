//! Agglomerative hierarchical clustering of tasks.
//!
//! Distances are `1 - similarity`. Inter-cluster distances are maintained
//! with the Lance–Williams update for the chosen linkage. Among equally close
//! pairs the one with the lexicographically least `(lower node, higher node)`
//! index pair is merged first. Leaves are nodes `0..T`; merge `m` creates
//! node `T + m`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::types::{SimilarityMatrix, TaskId};

/// Tolerance for accepting a similarity matrix as input.
pub const SIMILARITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Linkage {
    /// Mean pairwise distance between members (UPGMA).
    #[default]
    Average,
    /// Largest pairwise distance.
    Complete,
    /// Smallest pairwise distance.
    Single,
}

impl fmt::Display for Linkage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Linkage::Average => "average",
            Linkage::Complete => "complete",
            Linkage::Single => "single",
        })
    }
}

impl FromStr for Linkage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "average" => Ok(Linkage::Average),
            "complete" => Ok(Linkage::Complete),
            "single" => Ok(Linkage::Single),
            other => Err(Error::InvalidInput(format!("unknown linkage `{other}`"))),
        }
    }
}

/// Tie-break used when several pairs share the minimal distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MergeTieRule {
    #[default]
    LexicographicNodePair,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge<T> {
    /// Smaller node index.
    pub left: usize,
    /// Larger node index.
    pub right: usize,
    pub height: T,
}

/// Binary merge tree produced by [`cluster`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDendrogram<T>", bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct Dendrogram<T> {
    leaves: Vec<TaskId>,
    merges: Vec<Merge<T>>,
    linkage: Linkage,
    tie_rule: MergeTieRule,
}

#[derive(Deserialize)]
struct RawDendrogram<T> {
    leaves: Vec<TaskId>,
    merges: Vec<Merge<T>>,
    linkage: Linkage,
    #[serde(default)]
    tie_rule: MergeTieRule,
}

impl<T: Scalar> TryFrom<RawDendrogram<T>> for Dendrogram<T> {
    type Error = Error;

    fn try_from(raw: RawDendrogram<T>) -> Result<Self> {
        let mut dend = Dendrogram::new(raw.leaves, raw.merges, raw.linkage)?;
        dend.tie_rule = raw.tie_rule;
        Ok(dend)
    }
}

impl<T: Scalar> Dendrogram<T> {
    /// Validates a merge list: exactly `T - 1` merges, children created before
    /// their parent, every non-root node used exactly once.
    pub fn new(leaves: Vec<TaskId>, merges: Vec<Merge<T>>, linkage: Linkage) -> Result<Self> {
        let n = leaves.len();
        if n < 2 {
            return Err(Error::InvalidInput("dendrogram needs at least 2 leaves".into()));
        }
        crate::types::ensure_unique_tasks(&leaves)?;
        if merges.len() != n - 1 {
            return Err(Error::InvalidInput(format!(
                "expected {} merges, got {}",
                n - 1,
                merges.len()
            )));
        }
        let mut used = vec![false; 2 * n - 1];
        for (m, merge) in merges.iter().enumerate() {
            let node = n + m;
            if merge.left >= merge.right || merge.right >= node {
                return Err(Error::InvalidInput(format!(
                    "merge {m} joins invalid nodes ({}, {})",
                    merge.left, merge.right
                )));
            }
            for child in [merge.left, merge.right] {
                if std::mem::replace(&mut used[child], true) {
                    return Err(Error::InvalidInput(format!("node {child} has two parents")));
                }
            }
            if !merge.height.is_finite() || merge.height < T::zero() {
                return Err(Error::InvalidInput(format!("merge {m} has invalid height")));
            }
        }
        Ok(Self {
            leaves,
            merges,
            linkage,
            tie_rule: MergeTieRule::LexicographicNodePair,
        })
    }

    pub fn leaves(&self) -> &[TaskId] {
        &self.leaves
    }

    pub fn merges(&self) -> &[Merge<T>] {
        &self.merges
    }

    pub fn linkage(&self) -> Linkage {
        self.linkage
    }

    pub fn tie_rule(&self) -> MergeTieRule {
        self.tie_rule
    }

    pub fn n_leaves(&self) -> usize {
        self.leaves.len()
    }

    pub fn root(&self) -> usize {
        2 * self.leaves.len() - 2
    }

    /// Height of a node; leaves sit at 0.
    pub fn height(&self, node: usize) -> T {
        node.checked_sub(self.leaves.len())
            .map_or(T::zero(), |m| self.merges[m].height)
    }

    /// Children of an internal node, `None` for leaves.
    pub fn children(&self, node: usize) -> Option<(usize, usize)> {
        node.checked_sub(self.leaves.len())
            .map(|m| (self.merges[m].left, self.merges[m].right))
    }
}

fn validate_similarity<T: Scalar>(sim: &SimilarityMatrix<T>) -> Result<()> {
    let n = sim.n();
    let tol = T::lit(SIMILARITY_TOL);
    for i in 0..n {
        for j in 0..n {
            let v = sim.get(i, j);
            if !v.is_finite() || v > T::one() + tol {
                return Err(Error::InvalidSimilarity(format!("entry ({i}, {j}) = {v}")));
            }
            if (v - sim.get(j, i)).abs() > tol {
                return Err(Error::InvalidSimilarity(format!("asymmetric at ({i}, {j})")));
            }
        }
    }
    Ok(())
}

/// Agglomerative clustering on `1 - similarity` distances.
pub fn cluster<T: Scalar>(sim: &SimilarityMatrix<T>, linkage: Linkage) -> Result<Dendrogram<T>> {
    validate_similarity(sim)?;
    let n = sim.n();
    let total = 2 * n - 1;

    let mut dist = vec![T::zero(); total * total];
    for i in 0..n {
        for j in 0..n {
            dist[i * total + j] = (T::one() - sim.get(i, j)).max(T::zero());
        }
    }
    let mut size = vec![0usize; total];
    size[..n].fill(1);
    // Kept sorted ascending: new nodes always carry the largest index.
    let mut active: Vec<usize> = (0..n).collect();
    let mut merges = Vec::with_capacity(n - 1);

    for m in 0..n - 1 {
        let mut best: Option<(usize, usize, T)> = None;
        for (ai, &a) in active.iter().enumerate() {
            for &b in &active[ai + 1..] {
                let d = dist[a * total + b];
                if best.is_none_or(|(_, _, bd)| d < bd) {
                    best = Some((a, b, d));
                }
            }
        }
        let (a, b, height) = best.expect("at least two active clusters");
        let node = n + m;
        let (na, nb) = (
            T::from_usize(size[a]).unwrap(),
            T::from_usize(size[b]).unwrap(),
        );
        for &k in &active {
            if k == a || k == b {
                continue;
            }
            let (dak, dbk) = (dist[a * total + k], dist[b * total + k]);
            let d = match linkage {
                Linkage::Single => dak.min(dbk),
                Linkage::Complete => dak.max(dbk),
                Linkage::Average => (na * dak + nb * dbk) / (na + nb),
            };
            dist[node * total + k] = d;
            dist[k * total + node] = d;
        }
        size[node] = size[a] + size[b];
        active.retain(|&x| x != a && x != b);
        active.push(node);
        merges.push(Merge { left: a, right: b, height });
    }

    Dendrogram::new(sim.tasks().to_vec(), merges, linkage)
}

/// Flat clustering into `k` groups by undoing the `k - 1` last merges.
///
/// Cluster indices follow the order in which their first leaf appears.
pub fn cut<T: Scalar>(dend: &Dendrogram<T>, k: usize) -> Result<Vec<(TaskId, usize)>> {
    let n = dend.n_leaves();
    if k == 0 || k > n {
        return Err(Error::InvalidK { k, n });
    }
    let mut parent: Vec<usize> = (0..2 * n - 1).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (m, merge) in dend.merges().iter().take(n - k).enumerate() {
        let node = n + m;
        let (l, r) = (find(&mut parent, merge.left), find(&mut parent, merge.right));
        parent[l] = node;
        parent[r] = node;
    }

    let mut label_of_root = std::collections::HashMap::new();
    let mut out = Vec::with_capacity(n);
    for (leaf, task) in dend.leaves().iter().enumerate() {
        let root = find(&mut parent, leaf);
        let next = label_of_root.len();
        let label = *label_of_root.entry(root).or_insert(next);
        out.push((task.clone(), label));
    }
    Ok(out)
}
