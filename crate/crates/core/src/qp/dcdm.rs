//! Cyclic dual coordinate descent for the nu-shaped constraint set.
//!
//! Coordinates are visited in a fixed cyclic order. Per coordinate the
//! gradient `G = Q[i,:]·α + f_i` is projected against the active bounds
//! (box above, the larger of 0 and the sum floor below) and the
//! coordinate moves by the exact single-variable minimizer `G'/Q_ii`,
//! clipped back into its bounds. The sum constraint is enforced through
//! the per-coordinate lower bound `max(0, floor − Σ_{k≠i} α_k)`, so every
//! intermediate iterate stays feasible.
//!
//! Single-coordinate moves alone admit spurious fixed points once the sum
//! constraint is tight: no coordinate may move down individually, yet a
//! transfer between two coordinates could still descend. Whenever the
//! floor is (nearly) active — and always before accepting a point — a
//! max-violating-pair exchange pass (which keeps the sum constant) clears
//! those directions; the solver stops only when a sweep and the pair pass
//! are both quiet, which is a KKT point.

use super::access::{qp_objective, QuadAccess};
use super::{check_finite, DualSolution, NuBoxConstraints, FEAS_TOL};
use crate::error::{Error, Result};

const STEP_DIAG_FLOOR: f64 = 1e-12;
const CURVATURE_FLOOR: f64 = 1e-12;

pub fn dcdm_solve<Q: QuadAccess + ?Sized>(
    q: &Q,
    linear: Option<&[f64]>,
    cons: &NuBoxConstraints,
    alpha0: Option<&[f64]>,
    eps: f64,
    max_sweeps: usize,
) -> Result<DualSolution> {
    dcdm_solve_with(q, linear, cons, alpha0, eps, max_sweeps, |_| {})
}

/// Same as [`dcdm_solve`] but invokes `on_update` after every coordinate
/// or pair move. Tests use the hook to assert per-update feasibility and
/// objective descent.
pub fn dcdm_solve_with<Q: QuadAccess + ?Sized, F: FnMut(&[f64])>(
    q: &Q,
    linear: Option<&[f64]>,
    cons: &NuBoxConstraints,
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
        if f.iter().any(|x| !x.is_finite()) {
            return Err(Error::numeric("linear term contains non-finite entries"));
        }
    }
    let upper = cons.upper;
    let floor = cons.linear_floor;
    let f_at = |i: usize| linear.map_or(0.0, |f| f[i]);

    let mut alpha = init_alpha(cons, alpha0, n)?;

    let mut sweeps = 0;
    let mut converged = false;
    let mut max_pg = f64::INFINITY;

    while sweeps < max_sweeps {
        sweeps += 1;
        // recomputed per sweep to kill incremental drift
        let mut sum: f64 = alpha.iter().sum();
        max_pg = 0.0;
        let mut moved_any = false;

        for i in 0..n {
            let qii = q.diag(i);
            if qii <= STEP_DIAG_FLOOR {
                continue;
            }
            let g = check_finite(q.dot_row(i, &alpha) + f_at(i), "gradient")?;
            // roundoff in `sum` can push the floor a ulp past the box
            let low = (floor - (sum - alpha[i])).max(0.0).min(upper);
            // one-sided projection against whichever bounds are active;
            // a coordinate pinned from both sides (sum floor meets the
            // box) has no usable single-coordinate direction at all
            let gp = match (alpha[i] - low < eps, upper - alpha[i] < eps) {
                (true, true) => 0.0,
                (true, false) => g.min(0.0),
                (false, true) => g.max(0.0),
                (false, false) => g,
            };
            if gp.abs() > eps {
                let new = (alpha[i] - gp / qii).clamp(low, upper);
                // A positive gradient whose step clamps against the sum
                // floor is not a residual violation: the downhill
                // direction is blocked there, and the floor itself shifts
                // as other coordinates move. The next sweep classifies
                // the coordinate one-sided, like the box branches.
                if !(gp > 0.0 && new <= low) {
                    max_pg = max_pg.max(gp.abs());
                }
                if new != alpha[i] {
                    sum += new - alpha[i];
                    alpha[i] = new;
                    moved_any = true;
                    on_update(&alpha);
                }
            } else {
                max_pg = max_pg.max(gp.abs());
            }
        }

        // Single-coordinate moves cannot trade mass between coordinates
        // once the sum constraint is tight: every coordinate individually
        // pins against the floor while transfers between them would still
        // descend. Whenever the floor is (nearly) active, clear those pair
        // directions; a point is accepted only when a sweep and the pair
        // pass are both quiet.
        let quiet = max_pg <= eps && !moved_any;
        let slack = alpha.iter().sum::<f64>() - floor;
        if quiet || slack <= n as f64 * eps {
            let pair_moved = exchange_pass(q, linear, upper, eps, &mut alpha, &mut on_update)?;
            if quiet && !pair_moved {
                converged = true;
                break;
            }
        }
    }

    let objective = qp_objective(q, linear, &alpha);
    Ok(DualSolution { alpha, objective, sweeps, max_projected_gradient: max_pg, converged })
}

fn init_alpha(cons: &NuBoxConstraints, alpha0: Option<&[f64]>, n: usize) -> Result<Vec<f64>> {
    match alpha0 {
        None => Ok(vec![cons.linear_floor / n as f64; n]),
        Some(a0) => {
            if a0.len() != n {
                return Err(Error::input("alpha0 length mismatch"));
            }
            if !cons.is_feasible(a0, FEAS_TOL) {
                return Err(Error::input("alpha0 is not feasible"));
            }
            let mut a: Vec<f64> = a0.iter().map(|&x| x.clamp(0.0, cons.upper)).collect();
            let sum: f64 = a.iter().sum();
            let deficit = cons.linear_floor - sum;
            if deficit > 0.0 {
                // clamping shaved at most n*FEAS_TOL off the sum; spread it
                // over the remaining headroom
                let headroom: f64 = a.iter().map(|&x| cons.upper - x).sum();
                if headroom > 0.0 {
                    let scale = (deficit / headroom).min(1.0);
                    for x in a.iter_mut() {
                        *x += scale * (cons.upper - *x);
                    }
                }
            }
            Ok(a)
        }
    }
}

/// Move mass between coordinate pairs along `e_to − e_from` (sum is
/// unchanged) while the largest gradient gap among movable coordinates
/// exceeds eps. Returns whether anything moved.
fn exchange_pass<Q: QuadAccess + ?Sized, F: FnMut(&[f64])>(
    q: &Q,
    linear: Option<&[f64]>,
    upper: f64,
    eps: f64,
    alpha: &mut [f64],
    on_update: &mut F,
) -> Result<bool> {
    let n = alpha.len();
    let mut g = vec![0.0; n];
    q.mat_vec(alpha, &mut g);
    if let Some(f) = linear {
        for (gi, fi) in g.iter_mut().zip(f) {
            *gi += fi;
        }
    }
    let mut moved = false;
    for _ in 0..10 * n {
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
        if from == usize::MAX || to == usize::MAX || from == to || g_hi - g_lo <= eps {
            break;
        }
        let denom = (q.diag(from) + q.diag(to) - 2.0 * q.entry(from, to)).max(CURVATURE_FLOOR);
        let t = ((g_hi - g_lo) / denom).min(alpha[from]).min(upper - alpha[to]);
        if t <= 0.0 {
            break;
        }
        // snap exactly onto a bound when the move is clipped there, so a
        // parked coordinate is never re-selected over a 1-ulp residue
        let new_from = if t >= alpha[from] { 0.0 } else { alpha[from] - t };
        let new_to = if t >= upper - alpha[to] { upper } else { alpha[to] + t };
        if new_from == alpha[from] && new_to == alpha[to] {
            break;
        }
        alpha[from] = new_from;
        alpha[to] = new_to;
        q.add_scaled_row(from, -t, &mut g);
        q.add_scaled_row(to, t, &mut g);
        moved = true;
        on_update(alpha);
    }
    Ok(moved)
}
