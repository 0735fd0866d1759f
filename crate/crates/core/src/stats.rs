//! Correlation kernels: Pearson, average-tie ranking and Spearman.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Relative variance threshold: a vector is constant when its variance is
/// below this fraction of its mean square.
pub const RELATIVE_VARIANCE_TOL: f64 = 1e-12;

/// Correlation coefficient used when comparing score vectors or matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Pearson,
    #[default]
    Spearman,
}

/// Ranks of a vector, ascending from 1, ties sharing their average rank.
#[derive(Debug, Clone, PartialEq)]
pub struct RankVector<T> {
    pub ranks: Vec<T>,
    pub had_ties: bool,
}

impl<T: Scalar> RankVector<T> {
    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }
}

fn check_finite<T: Scalar>(xs: &[T], name: &str) -> Result<()> {
    match xs.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::NonFinite {
            location: format!("{name}[{i}]"),
        }),
        None => Ok(()),
    }
}

fn mean<T: Scalar>(xs: &[T]) -> T {
    xs.iter().copied().sum::<T>() / T::from_usize(xs.len()).unwrap()
}

/// Whether a centered sum of squares marks the vector as constant.
pub(crate) fn is_degenerate<T: Scalar>(centered_ss: T, raw_ss: T, n: usize) -> bool {
    let n = T::from_usize(n).unwrap();
    let var = centered_ss / n;
    let mean_sq = raw_ss / n;
    var < T::lit(RELATIVE_VARIANCE_TOL) * mean_sq || var < T::variance_floor()
}

/// Sample Pearson correlation coefficient.
///
/// Fails with [`Error::DegenerateVector`] when either input has (relatively)
/// zero variance.
pub fn pearson<T: Scalar>(x: &[T], y: &[T]) -> Result<T> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "pearson needs at least 2 values, got {}",
            x.len()
        )));
    }
    check_finite(x, "x")?;
    check_finite(y, "y")?;

    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (T::zero(), T::zero(), T::zero());
    let (mut rxx, mut ryy) = (T::zero(), T::zero());
    for (&a, &b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
        rxx += a * a;
        ryy += b * b;
    }
    if is_degenerate(sxx, rxx, x.len()) {
        return Err(Error::DegenerateVector { what: "x".into() });
    }
    if is_degenerate(syy, ryy, y.len()) {
        return Err(Error::DegenerateVector { what: "y".into() });
    }
    Ok(normalized(sxy, sxx, syy))
}

/// `sxy / sqrt(sxx * syy)` clamped to [-1, 1]. Identical inputs give exactly 1.
pub(crate) fn normalized<T: Scalar>(sxy: T, sxx: T, syy: T) -> T {
    let mut denom = (sxx * syy).sqrt();
    if !denom.is_finite() || denom == T::zero() {
        denom = sxx.sqrt() * syy.sqrt();
    }
    (sxy / denom).max(-T::one()).min(T::one())
}

/// Ascending ranks with ties assigned the mean of the ranks they span.
pub fn rank_average_ties<T: Scalar>(x: &[T]) -> Result<RankVector<T>> {
    if x.is_empty() {
        return Err(Error::InvalidInput("cannot rank an empty vector".into()));
    }
    check_finite(x, "x")?;

    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].partial_cmp(&x[b]).unwrap_or(Ordering::Equal));

    let mut ranks = vec![T::zero(); x.len()];
    let mut had_ties = false;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && x[order[end]] == x[order[start]] {
            end += 1;
        }
        if end - start > 1 {
            had_ties = true;
        }
        // Positions start..end hold ranks start+1..=end; their mean:
        let avg = T::from_usize(start + end + 1).unwrap() / T::lit(2.0);
        for &idx in &order[start..end] {
            ranks[idx] = avg;
        }
        start = end;
    }
    Ok(RankVector { ranks, had_ties })
}

/// `1 - 6 Σ d² / (n (n² - 1))` over two tie-free rank vectors.
pub fn spearman_closed_form<T: Scalar>(a: &RankVector<T>, b: &RankVector<T>) -> Result<T> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.had_ties || b.had_ties {
        return Err(Error::InvalidInput(
            "closed-form Spearman is only valid without ties".into(),
        ));
    }
    let n = T::from_usize(a.len()).unwrap();
    let d2: T = a
        .ranks
        .iter()
        .zip(&b.ranks)
        .map(|(&ra, &rb)| (ra - rb) * (ra - rb))
        .sum();
    let r = T::one() - T::lit(6.0) * d2 / (n * (n * n - T::one()));
    Ok(r.max(-T::one()).min(T::one()))
}

/// Spearman correlation of two already-ranked vectors.
pub fn spearman_from_ranks<T: Scalar>(a: &RankVector<T>, b: &RankVector<T>) -> Result<T> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "spearman needs at least 3 values, got {}",
            a.len()
        )));
    }
    if a.had_ties || b.had_ties {
        pearson(&a.ranks, &b.ranks)
    } else {
        spearman_closed_form(a, b)
    }
}

/// Spearman rank correlation.
///
/// Tie-free inputs use the closed form over rank differences; with ties the
/// Pearson correlation of average ranks is returned.
pub fn spearman<T: Scalar>(x: &[T], y: &[T]) -> Result<T> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let (rx, ry) = (rank_average_ties(x)?, rank_average_ties(y)?);
    spearman_from_ranks(&rx, &ry)
}

pub fn correlate<T: Scalar>(method: Method, x: &[T], y: &[T]) -> Result<T> {
    match method {
        Method::Pearson => pearson(x, y),
        Method::Spearman => spearman(x, y),
    }
}
