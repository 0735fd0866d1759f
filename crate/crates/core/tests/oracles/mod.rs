//! Brute-force reference implementations used only by tests.
//!
//! Nothing here calls into the library's numeric code paths.
#![allow(dead_code)]

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

pub struct TestRng(ChaCha8Rng);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn uniform(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.0.next_u64() % n as u64) as usize
    }

    pub fn vec(&mut self, n: usize, lo: f64, hi: f64) -> Vec<f64> {
        (0..n).map(|_| self.range(lo, hi)).collect()
    }

    /// Values drawn from a small integer alphabet, so ties are common.
    pub fn tied_vec(&mut self, n: usize, levels: usize) -> Vec<f64> {
        (0..n).map(|_| self.below(levels) as f64).collect()
    }

    /// Random symmetric matrix with unit diagonal and off-diagonal entries in (-1, 1).
    pub fn similarity(&mut self, n: usize) -> Vec<f64> {
        let mut v = vec![0.0; n * n];
        for i in 0..n {
            v[i * n + i] = 1.0;
            for j in 0..i {
                let s = self.range(-0.99, 0.99);
                v[i * n + j] = s;
                v[j * n + i] = s;
            }
        }
        v
    }
}

/// Sample covariance over the product of sample standard deviations.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let cov = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / (n - 1.0);
    let sx = (x.iter().map(|a| (a - mx).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let sy = (y.iter().map(|b| (b - my).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    cov / (sx * sy)
}

/// Average ranks by pairwise counting: `1 + #{less} + (#{equal} - 1) / 2`.
pub fn ranks(x: &[f64]) -> Vec<f64> {
    x.iter()
        .map(|&xi| {
            let less = x.iter().filter(|&&xj| xj < xi).count() as f64;
            let equal = x.iter().filter(|&&xj| xj == xi).count() as f64;
            1.0 + less + (equal - 1.0) / 2.0
        })
        .collect()
}

pub fn has_ties(x: &[f64]) -> bool {
    x.iter().enumerate().any(|(i, a)| x[..i].contains(a))
}

pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    pearson(&ranks(x), &ranks(y))
}

pub fn spearman_closed_form(x: &[f64], y: &[f64]) -> f64 {
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let d2: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - b).powi(2)).sum();
    1.0 - 6.0 * d2 / (n * (n * n - 1.0))
}

/// `n × n` dissimilarities `1 - pearson(row_i, row_j)` computed pair by pair.
pub fn rdm(rows: &[Vec<f64>]) -> Vec<f64> {
    let n = rows.len();
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                out[i * n + j] = 1.0 - pearson(&rows[i], &rows[j]);
            }
        }
    }
    out
}

/// Lower triangle by explicit index enumeration of `(i, j)`, `i > j`.
pub fn lower_triangle(values: &[f64], n: usize) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i > j {
                out.push(values[i * n + j]);
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleLinkage {
    Average,
    Complete,
    Single,
}

/// Naive agglomeration: every step rescans all active pairs and recomputes
/// their linkage from the member lists. Returns `(left, right, height)`.
pub fn agglomerate(sim: &[f64], n: usize, linkage: OracleLinkage) -> Vec<(usize, usize, f64)> {
    let dist = |a: usize, b: usize| 1.0 - sim[a * n + b];
    let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut active: Vec<usize> = (0..n).collect();
    let mut merges = Vec::new();
    for step in 0..n - 1 {
        let mut best: Option<(usize, usize, f64)> = None;
        let mut sorted = active.clone();
        sorted.sort_unstable();
        for (x, &a) in sorted.iter().enumerate() {
            for &b in &sorted[x + 1..] {
                let ds: Vec<f64> = members[a]
                    .iter()
                    .flat_map(|&p| members[b].iter().map(move |&q| (p, q)))
                    .map(|(p, q)| dist(p, q))
                    .collect();
                let d = match linkage {
                    OracleLinkage::Single => ds.iter().cloned().fold(f64::INFINITY, f64::min),
                    OracleLinkage::Complete => ds.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
                    OracleLinkage::Average => ds.iter().sum::<f64>() / ds.len() as f64,
                };
                match best {
                    Some((_, _, bd)) if d >= bd => {}
                    _ => best = Some((a, b, d)),
                }
            }
        }
        let (a, b, h) = best.unwrap();
        let mut joined = members[a].clone();
        joined.extend_from_slice(&members[b]);
        members.push(joined);
        active.retain(|&x| x != a && x != b);
        active.push(n + step);
        merges.push((a, b, h));
    }
    merges
}

/// Recursive-descent check of Newick syntax with branch lengths on every
/// non-root node. Returns the leaf names in order.
pub fn parse_newick(text: &str) -> Result<Vec<String>, String> {
    struct P<'a> {
        s: &'a [u8],
        i: usize,
        leaves: Vec<String>,
    }
    impl P<'_> {
        fn peek(&self) -> Option<u8> {
            self.s.get(self.i).copied()
        }
        fn expect(&mut self, c: u8) -> Result<(), String> {
            if self.peek() == Some(c) {
                self.i += 1;
                Ok(())
            } else {
                Err(format!("expected `{}` at {}", c as char, self.i))
            }
        }
        fn name(&mut self) -> Result<String, String> {
            if self.peek() == Some(b'\'') {
                self.i += 1;
                let mut out = Vec::new();
                loop {
                    match self.peek() {
                        None => return Err("unterminated quote".into()),
                        Some(b'\'') if self.s.get(self.i + 1) == Some(&b'\'') => {
                            out.push(b'\'');
                            self.i += 2;
                        }
                        Some(b'\'') => {
                            self.i += 1;
                            break;
                        }
                        Some(c) => {
                            out.push(c);
                            self.i += 1;
                        }
                    }
                }
                return String::from_utf8(out).map_err(|e| e.to_string());
            }
            let start = self.i;
            while let Some(c) = self.peek() {
                if b"()[]':;, \t\n".contains(&c) {
                    break;
                }
                self.i += 1;
            }
            if self.i == start {
                return Err(format!("empty name at {start}"));
            }
            Ok(String::from_utf8(self.s[start..self.i].to_vec()).unwrap())
        }
        fn length(&mut self) -> Result<f64, String> {
            self.expect(b':')?;
            let start = self.i;
            while let Some(c) = self.peek() {
                if c.is_ascii_digit() || b"+-.eE".contains(&c) {
                    self.i += 1;
                } else {
                    break;
                }
            }
            let v: f64 = std::str::from_utf8(&self.s[start..self.i])
                .unwrap()
                .parse()
                .map_err(|e| format!("bad length at {start}: {e}"))?;
            if v < 0.0 {
                return Err(format!("negative branch length at {start}"));
            }
            Ok(v)
        }
        fn subtree(&mut self) -> Result<(), String> {
            if self.peek() == Some(b'(') {
                self.i += 1;
                self.subtree()?;
                self.length()?;
                let mut children = 1;
                while self.peek() == Some(b',') {
                    self.i += 1;
                    self.subtree()?;
                    self.length()?;
                    children += 1;
                }
                self.expect(b')')?;
                if children < 2 {
                    return Err("internal node with one child".into());
                }
                Ok(())
            } else {
                let n = self.name()?;
                self.leaves.push(n);
                Ok(())
            }
        }
    }
    let mut p = P {
        s: text.trim_end().as_bytes(),
        i: 0,
        leaves: Vec::new(),
    };
    p.subtree()?;
    p.expect(b';')?;
    if p.i != p.s.len() {
        return Err(format!("trailing input at {}", p.i));
    }
    Ok(p.leaves)
}
