//! Euclidean projection onto a box intersected with one linear constraint.
//!
//! The projection of `v` has the closed form `clip(v + λe, 0, upper)` for
//! a scalar shift λ; the sum of that expression is continuous and
//! nondecreasing in λ, so λ is found by bisection.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub enum LinearConstraint {
    /// `Σx ≥ floor` (half-space).
    SumAtLeast(f64),
    /// `Σx = target` (hyperplane).
    SumEquals(f64),
}

fn shifted_sum(v: &[f64], upper: f64, lambda: f64) -> f64 {
    v.iter().map(|&x| (x + lambda).clamp(0.0, upper)).sum()
}

fn clip_at(v: &[f64], upper: f64, lambda: f64) -> Vec<f64> {
    v.iter().map(|&x| (x + lambda).clamp(0.0, upper)).collect()
}

/// Find λ with `shifted_sum(λ) = want`, preferring the feasible (upper)
/// side of the bracket.
fn bisect(v: &[f64], upper: f64, want: f64) -> f64 {
    let vmax = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let vmin = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut lo = -vmax - 1.0; // everything clips to 0
    let mut hi = upper - vmin + 1.0; // everything clips to upper
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if shifted_sum(v, upper, mid) >= want {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= f64::EPSILON * (1.0 + hi.abs()) {
            break;
        }
    }
    hi
}

/// Project `v` onto `{x : 0 ≤ x ≤ upper} ∩ constraint`.
pub fn project_box_linear(v: &[f64], upper: f64, constraint: LinearConstraint) -> Result<Vec<f64>> {
    if !(upper >= 0.0) || !upper.is_finite() {
        return Err(Error::input("projection upper bound must be finite and nonnegative"));
    }
    let capacity = v.len() as f64 * upper;
    match constraint {
        LinearConstraint::SumAtLeast(floor) => {
            if floor > capacity + 1e-12 {
                return Err(Error::input(format!("empty feasible set: floor {floor} > capacity {capacity}")));
            }
            let plain = clip_at(v, upper, 0.0);
            if plain.iter().sum::<f64>() >= floor {
                return Ok(plain);
            }
            Ok(clip_at(v, upper, bisect(v, upper, floor)))
        }
        LinearConstraint::SumEquals(target) => {
            if target < -1e-12 || target > capacity + 1e-12 {
                return Err(Error::input(format!("empty feasible set: target {target} outside [0, {capacity}]")));
            }
            Ok(clip_at(v, upper, bisect(v, upper, target)))
        }
    }
}
