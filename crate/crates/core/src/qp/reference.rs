//! Projected-gradient reference solver.
//!
//! Deliberately the dumbest correct method: a fixed step of 1/L (L from
//! power iteration with a 1.1 safety factor) and an exact Euclidean
//! projection after every step. It shares no code path with the
//! production solvers and exists so their solutions can be checked
//! against an independent route.

use super::access::{qp_objective, QuadAccess};
use super::projection::{project_box_linear, LinearConstraint};
use super::{DualSolution, NuBoxConstraints, SimplexBoxConstraints};
use crate::error::{Error, Result};
use crate::rng::SplitMix64;

#[derive(Clone, Copy, Debug)]
pub enum ConstraintSet {
    NuBox(NuBoxConstraints),
    SimplexBox(SimplexBoxConstraints),
}

impl ConstraintSet {
    fn upper(&self) -> f64 {
        match self {
            ConstraintSet::NuBox(c) => c.upper,
            ConstraintSet::SimplexBox(c) => c.upper,
        }
    }

    fn linear(&self) -> LinearConstraint {
        match self {
            ConstraintSet::NuBox(c) => LinearConstraint::SumAtLeast(c.linear_floor),
            ConstraintSet::SimplexBox(c) => LinearConstraint::SumEquals(c.sum_target),
        }
    }

    fn validate(&self, dim: usize) -> Result<()> {
        match self {
            ConstraintSet::NuBox(c) => c.validate(dim),
            ConstraintSet::SimplexBox(c) => c.validate(dim),
        }
    }

    pub fn project(&self, v: &[f64]) -> Result<Vec<f64>> {
        project_box_linear(v, self.upper(), self.linear())
    }
}

/// Largest-eigenvalue estimate by 20 power iterations, inflated by 1.1.
fn lipschitz_estimate<Q: QuadAccess + ?Sized>(q: &Q) -> f64 {
    let n = q.dim();
    let mut rng = SplitMix64::new(0x5eed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
    let mut qv = vec![0.0; n];
    let mut lambda = 0.0;
    for _ in 0..20 {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm <= 1e-300 {
            break;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        q.mat_vec(&v, &mut qv);
        lambda = qv.iter().map(|x| x * x).sum::<f64>().sqrt();
        std::mem::swap(&mut v, &mut qv);
    }
    (lambda * 1.1).max(1e-12)
}

pub fn pg_reference_solve<Q: QuadAccess + ?Sized>(
    q: &Q,
    linear: Option<&[f64]>,
    cons: &ConstraintSet,
    alpha0: Option<&[f64]>,
    eps: f64,
    max_iters: usize,
) -> Result<DualSolution> {
    let n = q.dim();
    cons.validate(n)?;
    if !(eps > 0.0) {
        return Err(Error::input("eps must be positive"));
    }
    if let Some(f) = linear {
        if f.len() != n {
            return Err(Error::input("linear term length mismatch"));
        }
    }

    let mut alpha = match alpha0 {
        Some(a0) if a0.len() == n => cons.project(a0)?,
        Some(_) => return Err(Error::input("alpha0 length mismatch")),
        None => cons.project(&vec![0.0; n])?,
    };

    let step = 1.0 / lipschitz_estimate(q);
    let mut grad = vec![0.0; n];
    let mut probe = vec![0.0; n];
    let mut iters = 0;
    let mut converged = false;
    let mut residual = f64::INFINITY;

    while iters < max_iters {
        iters += 1;
        q.mat_vec(&alpha, &mut grad);
        if let Some(f) = linear {
            for (g, fi) in grad.iter_mut().zip(f) {
                *g += fi;
            }
        }
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::numeric("gradient is not finite"));
        }

        // optimality residual at unit step
        for ((p, a), g) in probe.iter_mut().zip(&alpha).zip(&grad) {
            *p = a - g;
        }
        let fixed = cons.project(&probe)?;
        residual = alpha.iter().zip(&fixed).map(|(a, p)| (a - p).abs()).fold(0.0, f64::max);
        if residual <= eps {
            converged = true;
            break;
        }

        for ((p, a), g) in probe.iter_mut().zip(&alpha).zip(&grad) {
            *p = a - step * g;
        }
        alpha = cons.project(&probe)?;
    }

    let objective = qp_objective(q, linear, &alpha);
    Ok(DualSolution { alpha, objective, sweeps: iters, max_projected_gradient: residual, converged })
}
