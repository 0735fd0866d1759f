//! Synthetic task families with known group structure.
//!
//! A shared condition latent `L` (`n_conditions × latent_dim`) stands for the
//! content of the stimuli. Each group reads it out through its own mixing
//! map, `G_g = L · M_g`. Every task `t` in group `g` then gets
//!
//! ```text
//! X_t = (α_g · G_g + (1 − α_g) · P_t) · A_t + σ · E_t
//! ```
//!
//! where `P_t` is a task-private latent of the same shape as `L`, `A_t` a
//! `latent_dim × feature_dim` projection and `E_t` standard Gaussian noise.
//! `M_g` and `A_t` have entries `N(0, 1/latent_dim)`. Groups are related to
//! each other through `L`; with `α = 0` a task is independent of every other.
//!
//! # Random stream
//!
//! All draws come from ChaCha20 keyed with the seed (little-endian in key
//! bytes 0..8, remaining key bytes zero) with one 64-bit stream id per
//! matrix:
//!
//! | matrix                 | stream id                 |
//! |------------------------|---------------------------|
//! | `L`                    | `0`                       |
//! | `M_g`                  | `1 << 32 \| g`            |
//! | `P_t`                  | `2 << 32 \| t`            |
//! | `A_t`                  | `3 << 32 \| t`            |
//! | `A` shared by group g  | `4 << 32 \| g`            |
//! | `E_t`                  | `5 << 32 \| t`            |
//!
//! `g` and `t` are zero-based indices in spec order (tasks numbered across
//! groups). Matrices are filled row-major. Each standard normal consumes two
//! `u64` words `w1, w2`: `u1 = ((w1 >> 11) + 1) · 2⁻⁵³`, `u2 = (w2 >> 11) · 2⁻⁵³`,
//! `z = sqrt(−2 ln u1) · cos(2π u2)`. Because conditions are rows, a spec with
//! more conditions extends a smaller one without changing the shared rows.

use std::collections::HashSet;

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::types::{FeatureMatrix, TaskId};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticGroup {
    pub name: String,
    pub tasks: Vec<String>,
    /// Weight of the shared group latent, in `[0, 1]`.
    pub alpha: f64,
    /// Use one projection map for every member instead of one per task.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub shared_projection: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub seed: u64,
    pub n_conditions: usize,
    pub latent_dim: usize,
    pub groups: Vec<SyntheticGroup>,
    pub feature_dim_per_task: usize,
    pub noise_sigma: f64,
}

impl SyntheticSpec {
    /// Checks every field; the error message names the offending one.
    pub fn validate(&self) -> Result<()> {
        let bad = |field: String, why: &str| Err(Error::InvalidInput(format!("{field}: {why}")));
        if self.n_conditions < FeatureMatrix::<f64>::MIN_CONDITIONS {
            return bad("n_conditions".into(), "must be at least 3");
        }
        if self.latent_dim < 2 {
            return bad("latent_dim".into(), "must be at least 2");
        }
        if self.feature_dim_per_task < 2 {
            return bad("feature_dim_per_task".into(), "must be at least 2");
        }
        if !self.noise_sigma.is_finite() || self.noise_sigma < 0.0 {
            return bad("noise_sigma".into(), "must be finite and non-negative");
        }
        if self.groups.is_empty() {
            return bad("groups".into(), "must not be empty");
        }
        let mut seen = HashSet::new();
        for (g, group) in self.groups.iter().enumerate() {
            if !group.alpha.is_finite() || !(0.0..=1.0).contains(&group.alpha) {
                return bad(format!("groups[{g}].alpha"), "must lie in [0, 1]");
            }
            if group.tasks.is_empty() {
                return bad(format!("groups[{g}].tasks"), "must not be empty");
            }
            for (i, t) in group.tasks.iter().enumerate() {
                if t.is_empty() {
                    return bad(format!("groups[{g}].tasks[{i}]"), "must be non-empty");
                }
                if !seen.insert(t.as_str()) {
                    return bad(format!("groups[{g}].tasks[{i}]"), "duplicate task name");
                }
            }
        }
        Ok(())
    }

    /// `(task, group index)` in generation order.
    pub fn task_groups(&self) -> Vec<(String, usize)> {
        self.groups
            .iter()
            .enumerate()
            .flat_map(|(g, group)| group.tasks.iter().map(move |t| (t.clone(), g)))
            .collect()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }
}

/// Standard-normal source over one ChaCha20 stream.
pub struct NormalStream {
    rng: ChaCha20Rng,
}

impl NormalStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        let mut rng = ChaCha20Rng::from_seed(key);
        rng.set_stream(stream);
        Self { rng }
    }

    pub fn next_normal(&mut self) -> f64 {
        const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
        let u1 = ((self.rng.next_u64() >> 11) + 1) as f64 * SCALE;
        let u2 = (self.rng.next_u64() >> 11) as f64 * SCALE;
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// `rows × cols` row-major matrix of `scale · N(0, 1)` draws.
    pub fn matrix(&mut self, rows: usize, cols: usize, scale: f64) -> Vec<f64> {
        (0..rows * cols).map(|_| scale * self.next_normal()).collect()
    }
}

const CONDITION_LATENT: u64 = 0;
const GROUP_MIXING: u64 = 1 << 32;
const TASK_LATENT: u64 = 2 << 32;
const TASK_PROJECTION: u64 = 3 << 32;
const GROUP_PROJECTION: u64 = 4 << 32;
const TASK_NOISE: u64 = 5 << 32;

/// `(rows × inner) · (inner × cols)`, row-major.
fn matmul(a: &[f64], b: &[f64], rows: usize, inner: usize, cols: usize) -> Vec<f64> {
    let mut out = vec![0.0; rows * cols];
    for i in 0..rows {
        for k in 0..inner {
            let aik = a[i * inner + k];
            for j in 0..cols {
                out[i * cols + j] += aik * b[k * cols + j];
            }
        }
    }
    out
}

/// Generates one feature matrix per task, in spec order.
pub fn generate<T: Scalar>(spec: &SyntheticSpec) -> Result<Vec<FeatureMatrix<T>>> {
    spec.validate()?;
    let (n, d, f) = (spec.n_conditions, spec.latent_dim, spec.feature_dim_per_task);
    let conditions: Vec<String> = (0..n).map(|i| format!("c{i}")).collect();
    let proj_scale = 1.0 / (d as f64).sqrt();

    let condition_latent = NormalStream::new(spec.seed, CONDITION_LATENT).matrix(n, d, 1.0);
    let group_latents: Vec<Vec<f64>> = (0..spec.groups.len())
        .map(|g| {
            let mixing = NormalStream::new(spec.seed, GROUP_MIXING | g as u64).matrix(d, d, proj_scale);
            matmul(&condition_latent, &mixing, n, d, d)
        })
        .collect();

    let mut out = Vec::new();
    let mut t = 0u64;
    for (g, group) in spec.groups.iter().enumerate() {
        let shared = &group_latents[g];
        let alpha = group.alpha;
        for name in &group.tasks {
            let private = NormalStream::new(spec.seed, TASK_LATENT | t).matrix(n, d, 1.0);
            let proj_stream = if group.shared_projection {
                GROUP_PROJECTION | g as u64
            } else {
                TASK_PROJECTION | t
            };
            let proj = NormalStream::new(spec.seed, proj_stream).matrix(d, f, proj_scale);
            let mut noise = NormalStream::new(spec.seed, TASK_NOISE | t);

            let mut data = Vec::with_capacity(n * f);
            let mut latent = vec![0.0; d];
            for i in 0..n {
                for (k, z) in latent.iter_mut().enumerate() {
                    *z = alpha * shared[i * d + k] + (1.0 - alpha) * private[i * d + k];
                }
                for col in 0..f {
                    let mut v = 0.0;
                    for (k, z) in latent.iter().enumerate() {
                        v += z * proj[k * f + col];
                    }
                    if spec.noise_sigma > 0.0 {
                        v += spec.noise_sigma * noise.next_normal();
                    }
                    data.push(T::lit(v));
                }
            }
            out.push(FeatureMatrix::new(
                TaskId::new(name.clone())?,
                conditions.clone(),
                f,
                data,
            )?);
            t += 1;
        }
    }
    Ok(out)
}
