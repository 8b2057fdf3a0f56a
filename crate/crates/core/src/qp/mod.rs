//! Dual QP solvers.
//!
//! Three solvers cover the two constraint shapes that arise in training:
//!
//! * [`dcdm_solve`] — cyclic dual coordinate descent for the box with a
//!   sum *floor* (`eᵀα ≥ floor`, `0 ≤ α ≤ upper`),
//! * [`smo_equality_solve`] — two-coordinate exchange steps for the box
//!   with a sum *equality* (`eᵀα = target`),
//! * [`pg_reference_solve`] — plain projected gradient, deliberately
//!   independent of the other two; it is the correctness oracle the test
//!   suites compare against.

pub mod access;
mod dcdm;
mod projection;
mod reference;
mod smo;

pub use access::{qp_objective, DenseMatrix, QuadAccess};
pub use dcdm::{dcdm_solve, dcdm_solve_with};
pub use projection::{project_box_linear, LinearConstraint};
pub use reference::{pg_reference_solve, ConstraintSet};
pub use smo::{smo_equality_solve, smo_equality_solve_with};

use crate::error::{Error, Result};

pub(crate) const FEAS_TOL: f64 = 1e-8;

/// Feasible set of the nu-shaped dual: `0 ≤ α ≤ upper`, `eᵀα ≥ linear_floor`.
///
/// Full problems have `upper = 1/l` and `linear_floor = ν`; reduced
/// problems keep the box and shift the floor by the mass already fixed.
#[derive(Clone, Copy, Debug)]
pub struct NuBoxConstraints {
    pub upper: f64,
    pub linear_floor: f64,
}

impl NuBoxConstraints {
    pub fn full(nu: f64, l: usize) -> Result<Self> {
        if l == 0 {
            return Err(Error::input("empty problem"));
        }
        if !(0.0 < nu && nu < 1.0) {
            return Err(Error::input(format!("nu must be in (0,1), got {nu}")));
        }
        Ok(NuBoxConstraints { upper: 1.0 / l as f64, linear_floor: nu })
    }

    pub fn reduced(upper: f64, floor: f64) -> Self {
        NuBoxConstraints { upper, linear_floor: floor.max(0.0) }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if !(self.upper >= 0.0) {
            return Err(Error::input("box upper bound must be nonnegative"));
        }
        if self.linear_floor > dim as f64 * self.upper + FEAS_TOL {
            return Err(Error::input(format!(
                "infeasible: floor {} exceeds box capacity {}",
                self.linear_floor,
                dim as f64 * self.upper
            )));
        }
        Ok(())
    }

    pub fn is_feasible(&self, alpha: &[f64], tol: f64) -> bool {
        alpha.iter().all(|&a| a >= -tol && a <= self.upper + tol)
            && alpha.iter().sum::<f64>() >= self.linear_floor - tol
    }
}

/// Feasible set of the one-class dual: `0 ≤ α ≤ upper`, `eᵀα = sum_target`.
#[derive(Clone, Copy, Debug)]
pub struct SimplexBoxConstraints {
    pub upper: f64,
    pub sum_target: f64,
}

impl SimplexBoxConstraints {
    pub fn full(nu: f64, l: usize) -> Result<Self> {
        if l == 0 {
            return Err(Error::input("empty problem"));
        }
        if !(0.0 < nu && nu <= 1.0) {
            return Err(Error::input(format!("nu must be in (0,1], got {nu}")));
        }
        Ok(SimplexBoxConstraints { upper: 1.0 / (nu * l as f64), sum_target: 1.0 })
    }

    pub fn reduced(upper: f64, sum_target: f64) -> Self {
        SimplexBoxConstraints { upper, sum_target }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if !(self.upper > 0.0) {
            return Err(Error::input("box upper bound must be positive"));
        }
        if self.sum_target < -FEAS_TOL || self.sum_target > dim as f64 * self.upper + FEAS_TOL {
            return Err(Error::input(format!(
                "infeasible: sum target {} outside [0, {}]",
                self.sum_target,
                dim as f64 * self.upper
            )));
        }
        Ok(())
    }

    pub fn is_feasible(&self, alpha: &[f64], tol: f64) -> bool {
        alpha.iter().all(|&a| a >= -tol && a <= self.upper + tol)
            && (alpha.iter().sum::<f64>() - self.sum_target).abs() <= tol
    }
}

/// Solver output: the dual vector plus convergence diagnostics.
#[derive(Clone, Debug)]
pub struct DualSolution {
    pub alpha: Vec<f64>,
    pub objective: f64,
    pub sweeps: usize,
    pub max_projected_gradient: f64,
    pub converged: bool,
}

pub(crate) fn check_finite(x: f64, what: &str) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::numeric(format!("{what} is not finite")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nu_box_validation() {
        assert!(NuBoxConstraints::full(0.5, 0).is_err());
        assert!(NuBoxConstraints::full(0.0, 4).is_err());
        assert!(NuBoxConstraints::full(1.0, 4).is_err());
        let c = NuBoxConstraints::full(0.5, 4).unwrap();
        assert_eq!(c.upper, 0.25);
        c.validate(4).unwrap();
        // floor above capacity
        let bad = NuBoxConstraints { upper: 0.1, linear_floor: 0.5 };
        assert!(bad.validate(4).is_err());
    }

    #[test]
    fn simplex_validation() {
        let c = SimplexBoxConstraints::full(0.5, 4).unwrap();
        assert_eq!(c.upper, 0.5);
        c.validate(4).unwrap();
        assert!(SimplexBoxConstraints::full(1.5, 4).is_err());
        let bad = SimplexBoxConstraints { upper: 0.1, sum_target: 1.0 };
        assert!(bad.validate(4).is_err());
    }
}
