//! Deterministic 2-D toy data generators.
//!
//! Six labeled sets: three Gaussian pairs of increasing separation and
//! three shapes (concentric circles, a four-blob exclusive-or layout, two
//! interleaved spirals) that only a nonlinear kernel separates, plus the
//! one-class arrangement with a shifted anomaly cluster.

use std::str::FromStr;
use std::sync::Arc;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng::SplitMix64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SyntheticSet {
    Gauss1,
    Gauss2,
    Gauss5,
    Circle,
    Xor,
    Spiral,
}

impl SyntheticSet {
    pub const ALL: [SyntheticSet; 6] = [
        SyntheticSet::Gauss1,
        SyntheticSet::Gauss2,
        SyntheticSet::Gauss5,
        SyntheticSet::Circle,
        SyntheticSet::Xor,
        SyntheticSet::Spiral,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SyntheticSet::Gauss1 => "gauss1",
            SyntheticSet::Gauss2 => "gauss2",
            SyntheticSet::Gauss5 => "gauss5",
            SyntheticSet::Circle => "circle",
            SyntheticSet::Xor => "xor",
            SyntheticSet::Spiral => "spiral",
        }
    }
}

impl FromStr for SyntheticSet {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gauss1" => Ok(SyntheticSet::Gauss1),
            "gauss2" => Ok(SyntheticSet::Gauss2),
            "gauss5" => Ok(SyntheticSet::Gauss5),
            "circle" => Ok(SyntheticSet::Circle),
            "xor" => Ok(SyntheticSet::Xor),
            "spiral" => Ok(SyntheticSet::Spiral),
            other => Err(Error::input(format!("unknown synthetic set '{other}'"))),
        }
    }
}

fn gaussian_pair(n: usize, mu: f64, rng: &mut SplitMix64, feats: &mut Vec<f64>, labels: &mut Vec<f64>) {
    for &(m, y) in &[(mu, 1.0), (-mu, -1.0)] {
        for _ in 0..n {
            feats.push(m + rng.normal());
            feats.push(m + rng.normal());
            labels.push(y);
        }
    }
}

pub fn generate(set: SyntheticSet, n_per_class: usize, seed: u64) -> Arc<Dataset> {
    let mut rng = SplitMix64::new(seed ^ 0xD1CE_F00D);
    let mut feats = Vec::with_capacity(4 * n_per_class);
    let mut labels = Vec::with_capacity(2 * n_per_class);
    match set {
        SyntheticSet::Gauss1 => gaussian_pair(n_per_class, 1.0, &mut rng, &mut feats, &mut labels),
        SyntheticSet::Gauss2 => gaussian_pair(n_per_class, 2.0, &mut rng, &mut feats, &mut labels),
        SyntheticSet::Gauss5 => gaussian_pair(n_per_class, 5.0, &mut rng, &mut feats, &mut labels),
        SyntheticSet::Circle => {
            for &(radius, y) in &[(1.0, 1.0), (3.0, -1.0)] {
                for _ in 0..n_per_class {
                    let r: f64 = radius + 0.25 * rng.normal();
                    let th = rng.range(0.0, std::f64::consts::TAU);
                    feats.push(r * th.cos());
                    feats.push(r * th.sin());
                    labels.push(y);
                }
            }
        }
        SyntheticSet::Xor => {
            for c in 0..2 {
                for k in 0..n_per_class {
                    let sx = if k % 2 == 0 { 2.0 } else { -2.0 };
                    let sy = if c == 0 { sx } else { -sx };
                    feats.push(sx + 0.6 * rng.normal());
                    feats.push(sy + 0.6 * rng.normal());
                    labels.push(if c == 0 { 1.0 } else { -1.0 });
                }
            }
        }
        SyntheticSet::Spiral => {
            for c in 0..2 {
                for _ in 0..n_per_class {
                    let t = 0.5 + 2.5 * std::f64::consts::PI * rng.next_f64();
                    let th = t + c as f64 * std::f64::consts::PI;
                    feats.push((t * th.cos()) / 3.0 + 0.08 * rng.normal());
                    feats.push((t * th.sin()) / 3.0 + 0.08 * rng.normal());
                    labels.push(if c == 0 { 1.0 } else { -1.0 });
                }
            }
        }
    }
    Arc::new(Dataset::new(feats, 2, Some(labels)).expect("generated data is valid"))
}

/// One-class layout: a normal cluster at (mu_normal, mu_normal) and a
/// smaller anomaly cluster at (mu_anomaly, mu_anomaly). Returned labeled:
/// +1 normal, −1 anomaly; callers train on the +1 rows only.
pub fn generate_oc(
    n_normal: usize,
    n_anomaly: usize,
    mu_normal: f64,
    mu_anomaly: f64,
    seed: u64,
) -> Arc<Dataset> {
    let mut rng = SplitMix64::new(seed ^ 0x0C_5E7);
    let mut feats = Vec::with_capacity(2 * (n_normal + n_anomaly));
    let mut labels = Vec::with_capacity(n_normal + n_anomaly);
    for _ in 0..n_normal {
        feats.push(mu_normal + rng.normal());
        feats.push(mu_normal + rng.normal());
        labels.push(1.0);
    }
    for _ in 0..n_anomaly {
        feats.push(mu_anomaly + rng.normal());
        feats.push(mu_anomaly + rng.normal());
        labels.push(-1.0);
    }
    Arc::new(Dataset::new(feats, 2, Some(labels)).expect("generated data is valid"))
}
