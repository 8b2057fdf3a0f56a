//! Two-coordinate exchange solver for the equality-constrained dual.
//!
//! Single-coordinate moves cannot preserve `eᵀα = target`, so the solver
//! repeatedly picks the maximally violating pair — the largest gradient
//! among coordinates that can give mass versus the smallest among those
//! that can receive it — and transfers the exact line-search amount
//! between them, clipped to the box.

use super::access::{qp_objective, QuadAccess};
use super::{check_finite, DualSolution, SimplexBoxConstraints, FEAS_TOL};
use crate::error::{Error, Result};
use crate::qp::{project_box_linear, LinearConstraint};

const CURVATURE_FLOOR: f64 = 1e-12;

pub fn smo_equality_solve<Q: QuadAccess + ?Sized>(
    q: &Q,
    linear: Option<&[f64]>,
    cons: &SimplexBoxConstraints,
    alpha0: Option<&[f64]>,
    eps: f64,
    max_sweeps: usize,
) -> Result<DualSolution> {
    smo_equality_solve_with(q, linear, cons, alpha0, eps, max_sweeps, |_| {})
}

pub fn smo_equality_solve_with<Q: QuadAccess + ?Sized, F: FnMut(&[f64])>(
    q: &Q,
    linear: Option<&[f64]>,
    cons: &SimplexBoxConstraints,
    alpha0: Option<&[f64]>,
    eps: f64,
    max_sweeps: usize,
    mut on_update: F,
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
    let upper = cons.upper;

    let mut alpha = match alpha0 {
        None => vec![cons.sum_target / n as f64; n],
        Some(a0) => {
            if a0.len() != n {
                return Err(Error::input("alpha0 length mismatch"));
            }
            if !cons.is_feasible(a0, FEAS_TOL) {
                return Err(Error::input("alpha0 is not feasible"));
            }
            // snap tiny violations back onto the set exactly
            project_box_linear(a0, upper, LinearConstraint::SumEquals(cons.sum_target))?
        }
    };

    let mut g = vec![0.0; n];
    let refresh = |alpha: &[f64], g: &mut Vec<f64>| {
        q.mat_vec(alpha, g);
        if let Some(f) = linear {
            for (gi, fi) in g.iter_mut().zip(f) {
                *gi += fi;
            }
        }
    };
    refresh(&alpha, &mut g);

    let mut sweeps = 0;
    let mut converged = false;
    let mut violation = f64::INFINITY;

    'outer: while sweeps < max_sweeps {
        sweeps += 1;
        for _ in 0..n.max(1) {
            let mut from = usize::MAX;
            let mut to = usize::MAX;
            let mut g_hi = f64::NEG_INFINITY;
            let mut g_lo = f64::INFINITY;
            for i in 0..n {
                check_finite(g[i], "gradient")?;
                if alpha[i] > 0.0 && g[i] > g_hi {
                    g_hi = g[i];
                    from = i;
                }
                if alpha[i] < upper && g[i] < g_lo {
                    g_lo = g[i];
                    to = i;
                }
            }
            violation = if from == usize::MAX || to == usize::MAX { 0.0 } else { g_hi - g_lo };
            if from == to || violation <= eps {
                converged = true;
                break 'outer;
            }
            let denom = (q.diag(from) + q.diag(to) - 2.0 * q.entry(from, to)).max(CURVATURE_FLOOR);
            let t = (violation / denom).min(alpha[from]).min(upper - alpha[to]);
            // snap clipped moves exactly onto the bound (see dcdm)
            let new_from = if t >= alpha[from] { 0.0 } else { alpha[from] - t };
            let new_to = if t >= upper - alpha[to] { upper } else { alpha[to] + t };
            if new_from == alpha[from] && new_to == alpha[to] {
                converged = true;
                break 'outer;
            }
            alpha[from] = new_from;
            alpha[to] = new_to;
            q.add_scaled_row(from, -t, &mut g);
            q.add_scaled_row(to, t, &mut g);
            on_update(&alpha);
        }
        // refresh the incrementally maintained gradient once per sweep
        refresh(&alpha, &mut g);
    }

    let objective = qp_objective(q, linear, &alpha);
    Ok(DualSolution { alpha, objective, sweeps, max_projected_gradient: violation, converged })
}
