//! Safe sample screening across a ν grid.
//!
//! Given the optimum α⁰ at ν₀ and any δ with α⁰ + δ feasible at ν₁, the
//! next weight vector w₁ lies in a ball around c = w₀ + ½Zᵀδ of squared
//! radius r(δ) = ¼δᵀQδ + α⁰ᵀQδ — everything expressible through Q, so the
//! ball is never materialized in feature space. Cauchy-Schwarz turns the
//! ball into per-sample score intervals, order statistics of those
//! intervals bracket ρ*(ν₁), and samples whose interval clears the
//! bracket have their dual coordinate fixed before the solver runs:
//!
//! * interval entirely above the bracket → the sample is correctly
//!   classified with room to spare, α = 0;
//! * interval entirely below → margin violator, α = 1/l.
//!
//! The radius shrinks as δ improves, so δ is itself optimized: a full QP
//! once at the start of the grid, then cheap repairs of the previous δ at
//! every later step.

use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::kernel::{GramMode, GramOracle, GramSubset, KernelSpec};
use crate::nusvm::{validate_nu, NuSvmModel, SolverKind};
use crate::qp::{
    dcdm_solve, pg_reference_solve, project_box_linear, ConstraintSet, LinearConstraint,
    NuBoxConstraints, QuadAccess,
};

const FEAS_EPS: f64 = 1e-10;

/// Ball known to contain the next weight vector, in dual coordinates:
/// center c = Zᵀ·beta with beta = α⁰ + δ/2.
#[derive(Clone, Debug)]
pub struct SafeBall {
    pub beta: Vec<f64>,
    pub radius_sq: f64,
    pub nu_from: f64,
    pub nu_to: f64,
}

impl SafeBall {
    pub fn new(oracle: &GramOracle, alpha0: &[f64], delta: &[f64], nu_from: f64, nu_to: f64) -> SafeBall {
        let beta: Vec<f64> = alpha0.iter().zip(delta).map(|(a, d)| a + 0.5 * d).collect();
        SafeBall { beta, radius_sq: radius_of(oracle, alpha0, delta), nu_from, nu_to }
    }
}

/// r(δ) = ¼ δᵀQδ + α⁰ᵀQδ, clamped at zero (roundoff can leave a tiny
/// negative where the true value is 0).
pub fn radius_of(oracle: &GramOracle, alpha0: &[f64], delta: &[f64]) -> f64 {
    let mut qd = vec![0.0; delta.len()];
    oracle.mat_vec(delta, &mut qd);
    let quad: f64 = delta.iter().zip(&qd).map(|(d, q)| d * q).sum();
    let cross: f64 = alpha0.iter().zip(&qd).map(|(a, q)| a * q).sum();
    (0.25 * quad + cross).max(0.0)
}

/// Membership test for Δ = {δ : eᵀ(α⁰+δ) ≥ ν₁, 0 ≤ α⁰+δ ≤ upper}.
pub fn delta_feasible(alpha0: &[f64], delta: &[f64], nu_to: f64, box_upper: f64) -> bool {
    let mut sum = 0.0;
    for (&a, &d) in alpha0.iter().zip(delta) {
        let u = a + d;
        if !(-FEAS_EPS..=box_upper + FEAS_EPS).contains(&u) {
            return false;
        }
        sum += u;
    }
    sum >= nu_to - FEAS_EPS
}

/// Minimize r(δ) over Δ. Substituting u = α⁰ + δ turns this into the
/// standard dual shape with linear term Qα⁰, handled by the coordinate
/// solver. When α⁰ already reaches the new sum floor, δ = 0 is optimal
/// (r ≥ 0 on Δ and r(0) = 0).
pub fn solve_delta_full(
    oracle: &GramOracle,
    alpha0: &[f64],
    nu_to: f64,
    box_upper: f64,
    eps: f64,
    max_sweeps: usize,
) -> Result<Vec<f64>> {
    let l = oracle.len();
    if alpha0.len() != l {
        return Err(Error::input("alpha0 length mismatch"));
    }
    if nu_to > l as f64 * box_upper + FEAS_EPS {
        return Err(Error::input("empty delta set: nu_to exceeds box capacity"));
    }
    if alpha0.iter().sum::<f64>() >= nu_to - FEAS_EPS {
        return Ok(vec![0.0; l]);
    }
    let mut f = vec![0.0; l];
    oracle.mat_vec(alpha0, &mut f);
    let cons = NuBoxConstraints { upper: box_upper, linear_floor: nu_to };
    let start = project_box_linear(alpha0, box_upper, LinearConstraint::SumAtLeast(nu_to))?;
    let sol = dcdm_solve(oracle, Some(&f), &cons, Some(&start), eps, max_sweeps)?;
    Ok(sol.alpha.iter().zip(alpha0).map(|(u, a)| u - a).collect())
}

/// Repair the previous δ for the next grid step instead of solving the
/// full δ problem again: only coordinates where α_k + δ_k leaves the box
/// (plus, if needed, the largest-headroom coordinates until the sum floor
/// is reachable) are re-optimized; the rest stay frozen.
pub fn solve_delta_warm(
    oracle: &GramOracle,
    alpha_k: &[f64],
    delta_k: &[f64],
    nu_next: f64,
    box_upper: f64,
    eps: f64,
    max_sweeps: usize,
) -> Result<Vec<f64>> {
    let l = oracle.len();
    if alpha_k.len() != l || delta_k.len() != l {
        return Err(Error::input("vector length mismatch"));
    }
    if nu_next > l as f64 * box_upper + FEAS_EPS {
        return Err(Error::input("empty delta set: nu_next exceeds box capacity"));
    }
    let u: Vec<f64> = alpha_k.iter().zip(delta_k).map(|(a, d)| a + d).collect();
    let mut in_repair = vec![false; l];
    for (i, &ui) in u.iter().enumerate() {
        if !(-FEAS_EPS..=box_upper + FEAS_EPS).contains(&ui) {
            in_repair[i] = true;
        }
    }

    let mut sum_frozen: f64 = u.iter().zip(&in_repair).filter(|(_, &r)| !r).map(|(&ui, _)| ui).sum();
    let mut n_repair = in_repair.iter().filter(|&&r| r).count();
    if n_repair == 0 && sum_frozen >= nu_next - FEAS_EPS {
        return Ok(delta_k.to_vec());
    }
    // grow the repair set by largest headroom until the floor is reachable
    while sum_frozen + n_repair as f64 * box_upper < nu_next - FEAS_EPS {
        let candidate = (0..l)
            .filter(|&i| !in_repair[i])
            .max_by(|&a, &b| (box_upper - u[a]).total_cmp(&(box_upper - u[b])));
        match candidate {
            Some(i) => {
                in_repair[i] = true;
                sum_frozen -= u[i];
                n_repair += 1;
            }
            None => return Err(Error::input("empty delta set: cannot reach the sum floor")),
        }
    }

    let repair: Vec<usize> = (0..l).filter(|&i| in_repair[i]).collect();
    // linear term of the sub-problem: rows of Q against (α_k + frozen u)
    let mut carrier = vec![0.0; l];
    for i in 0..l {
        carrier[i] = alpha_k[i] + if in_repair[i] { 0.0 } else { u[i] };
    }
    let mut g = vec![0.0; l];
    oracle.mat_vec(&carrier, &mut g);
    let f_sub: Vec<f64> = repair.iter().map(|&i| g[i]).collect();

    let floor = (nu_next - sum_frozen).max(0.0);
    let cons = NuBoxConstraints { upper: box_upper, linear_floor: floor };
    let clipped: Vec<f64> = repair.iter().map(|&i| u[i].clamp(0.0, box_upper)).collect();
    let start = project_box_linear(&clipped, box_upper, LinearConstraint::SumAtLeast(floor))?;
    let sub = GramSubset::new(oracle, repair.clone());
    let sol = dcdm_solve(&sub, Some(&f_sub), &cons, Some(&start), eps, max_sweeps)?;

    let mut delta = delta_k.to_vec();
    for (slot, &i) in repair.iter().enumerate() {
        delta[i] = sol.alpha[slot] - alpha_k[i];
    }
    debug_assert!(delta_feasible(alpha_k, &delta, nu_next, box_upper));
    Ok(delta)
}

/// Per-sample score intervals implied by a ball.
#[derive(Clone, Debug)]
pub struct ScoreBounds {
    /// (Qβ)_i — the score of sample i at the ball center.
    pub center_score: Vec<f64>,
    /// √(Q_ii) = ‖Z_i‖.
    pub self_norm: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

pub fn score_bounds(oracle: &GramOracle, ball: &SafeBall) -> ScoreBounds {
    let l = oracle.len();
    let mut center_score = vec![0.0; l];
    oracle.mat_vec(&ball.beta, &mut center_score);
    let rt = ball.radius_sq.max(0.0).sqrt();
    let self_norm: Vec<f64> = (0..l).map(|i| oracle.diag(i).max(0.0).sqrt()).collect();
    let lower: Vec<f64> = center_score.iter().zip(&self_norm).map(|(c, n)| c - rt * n).collect();
    let upper: Vec<f64> = center_score.iter().zip(&self_norm).map(|(c, n)| c + rt * n).collect();
    ScoreBounds { center_score, self_norm, lower, upper }
}

/// k-th largest element, 1-based; k past either end clamps to the
/// extremes so degenerate grids stay well-defined.
fn kth_largest(values: &[f64], k: usize) -> f64 {
    let mut v = values.to_vec();
    let k = k.clamp(1, v.len());
    let (_, kth, _) = v.select_nth_unstable_by(k - 1, |a, b| b.total_cmp(a));
    *kth
}

/// Bracket ρ*(ν₁): the margins sorted descending satisfy
/// d(⌈i*⌉) ≤ ρ* ≤ d(⌊i*⌋) at i* = l − ν₁·l, and order statistics of the
/// pointwise interval ends dominate/minorize the corresponding order
/// statistics of the true margins.
pub fn rho_bounds(bounds: &ScoreBounds, nu_to: f64, l: usize) -> (f64, f64) {
    let i_star = ((l as f64) - nu_to * l as f64).clamp(1.0, l as f64);
    let rho_upper = kth_largest(&bounds.upper, i_star.floor() as usize);
    let rho_lower = kth_largest(&bounds.lower, i_star.ceil() as usize);
    (rho_lower, rho_upper)
}

/// Index partition produced by the screening rule.
#[derive(Clone, Debug, Serialize)]
pub struct ScreenOutcome {
    /// Samples fixed at α = 0 (score interval above the ρ bracket).
    pub fixed_zero: Vec<usize>,
    /// Samples fixed at the box bound (interval below the bracket).
    pub fixed_upper: Vec<usize>,
    /// Everything else: enters the reduced solve.
    pub survivors: Vec<usize>,
    /// The value assigned to `fixed_upper` coordinates.
    pub box_upper: f64,
    pub rho_lower: f64,
    pub rho_upper: f64,
    pub screening_ratio: f64,
}

pub fn screen(bounds: &ScoreBounds, rho_lower: f64, rho_upper: f64, box_upper: f64) -> ScreenOutcome {
    let l = bounds.lower.len();
    // The rule is stated with strict inequalities under exact arithmetic.
    // Degenerate problems (singular Gram, every optimum at objective 0)
    // collapse all bounds onto the bracket, where rounding noise of
    // ~1e-16 relative would otherwise decide fates; a guard band at the
    // float-noise scale of the inputs keeps those coordinates unscreened.
    let scale = bounds
        .lower
        .iter()
        .chain(bounds.upper.iter())
        .fold(0.0f64, |m, &v| m.max(v.abs()));
    let guard = 1e-9 * (1.0 + scale);
    let mut fixed_zero = Vec::new();
    let mut fixed_upper = Vec::new();
    let mut survivors = Vec::new();
    for i in 0..l {
        if bounds.lower[i] > rho_upper + guard {
            fixed_zero.push(i);
        } else if bounds.upper[i] < rho_lower - guard {
            fixed_upper.push(i);
        } else {
            survivors.push(i);
        }
    }
    let screening_ratio = (fixed_zero.len() + fixed_upper.len()) as f64 / l as f64;
    ScreenOutcome { fixed_zero, fixed_upper, survivors, box_upper, rho_lower, rho_upper, screening_ratio }
}

impl ScreenOutcome {
    /// Full-length α with the fixed coordinates filled in and survivors 0.
    pub fn fixed_alpha(&self, l: usize) -> Vec<f64> {
        let mut alpha = vec![0.0; l];
        for &i in &self.fixed_upper {
            alpha[i] = self.box_upper;
        }
        alpha
    }

    /// Scatter solved survivor values into the fixed background.
    pub fn combine(&self, l: usize, survivors_alpha: &[f64]) -> Vec<f64> {
        let mut alpha = self.fixed_alpha(l);
        for (&i, &a) in self.survivors.iter().zip(survivors_alpha) {
            alpha[i] = a;
        }
        alpha
    }
}

/// Survivor-only problem: Q₁ = Q[S,S], f = Q[S,D]·α_D, and the sum floor
/// shifted by the fixed mass.
pub fn reduced_problem<'a>(
    oracle: &'a GramOracle,
    outcome: &ScreenOutcome,
    nu_to: f64,
) -> (GramSubset<'a>, Vec<f64>, NuBoxConstraints) {
    let l = oracle.len();
    let fixed = outcome.fixed_alpha(l);
    let fixed_sum: f64 = fixed.iter().sum();
    let mut qf = vec![0.0; l];
    oracle.mat_vec(&fixed, &mut qf);
    let f: Vec<f64> = outcome.survivors.iter().map(|&i| qf[i]).collect();
    let cons = NuBoxConstraints { upper: 1.0 / l as f64, linear_floor: (nu_to - fixed_sum).max(0.0) };
    (GramSubset::new(oracle, outcome.survivors.clone()), f, cons)
}

#[derive(Clone, Copy, Debug)]
pub struct PathOptions {
    pub solver: SolverKind,
    pub eps: f64,
    pub max_sweeps: usize,
    /// Accuracy of the δ problems; they only tighten the ball, so looser
    /// values trade screening ratio for speed, never safety.
    pub delta_eps: f64,
    pub delta_max_sweeps: usize,
}

impl Default for PathOptions {
    fn default() -> Self {
        PathOptions {
            solver: SolverKind::Dcdm,
            eps: 1e-8,
            max_sweeps: 10_000,
            delta_eps: 1e-8,
            delta_max_sweeps: 10_000,
        }
    }
}

/// One grid point of a ν path.
#[derive(Clone, Debug, Serialize)]
pub struct PathStepRecord {
    pub nu: f64,
    pub screening_ratio: f64,
    pub objective: f64,
    pub wall_ms: f64,
    pub n_survivors: usize,
}

/// A solved ν path: the per-step records plus the models themselves.
pub struct NuPath {
    pub steps: Vec<PathStepRecord>,
    pub models: Vec<NuSvmModel>,
}

impl NuPath {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.steps)?)
    }
}

/// Solve the survivor problem from the solver's own default start. A
/// deliberately cold start: when the rule fixes nothing the reduced
/// problem *is* the full problem, and starting identically to a plain
/// solve makes the screened path reproduce it bit for bit.
fn reduced_solve(
    oracle: &GramOracle,
    outcome: &ScreenOutcome,
    nu_to: f64,
    opts: &PathOptions,
) -> Result<Vec<f64>> {
    let l = oracle.len();
    if outcome.survivors.is_empty() {
        return Ok(outcome.fixed_alpha(l));
    }
    let (sub, f, cons) = reduced_problem(oracle, outcome, nu_to);
    let sol = match opts.solver {
        SolverKind::Dcdm => dcdm_solve(&sub, Some(&f), &cons, None, opts.eps, opts.max_sweeps)?,
        SolverKind::Reference => pg_reference_solve(
            &sub,
            Some(&f),
            &ConstraintSet::NuBox(cons),
            None,
            opts.eps,
            crate::nusvm::DEFAULT_MAX_REFERENCE_ITERS,
        )?,
    };
    Ok(outcome.combine(l, &sol.alpha))
}

/// Run the ν grid with screening: one full solve at the first grid point,
/// then per step a δ repair, the ball, the rule, and a survivor-only
/// solve whose combination with the fixed coordinates is the next model.
pub fn solve_path(
    data: Arc<Dataset>,
    kernel: KernelSpec,
    nu_grid: &[f64],
    opts: &PathOptions,
) -> Result<NuPath> {
    let oracle = Arc::new(GramOracle::new(data, kernel, GramMode::Supervised)?);
    solve_path_with_oracle(oracle, nu_grid, opts)
}

pub fn solve_path_with_oracle(
    oracle: Arc<GramOracle>,
    nu_grid: &[f64],
    opts: &PathOptions,
) -> Result<NuPath> {
    let l = oracle.len();
    if nu_grid.is_empty() {
        return Err(Error::input("empty nu grid"));
    }
    for w in nu_grid.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::input("nu grid must be strictly ascending"));
        }
    }
    for &nu in nu_grid {
        validate_nu(nu, l)?;
    }
    let upper = 1.0 / l as f64;

    let mut steps = Vec::with_capacity(nu_grid.len());
    let mut models: Vec<NuSvmModel> = Vec::with_capacity(nu_grid.len());

    let t0 = Instant::now();
    let first = NuSvmModel::train_with_oracle(oracle.clone(), nu_grid[0], opts.solver, opts.eps)?;
    steps.push(PathStepRecord {
        nu: nu_grid[0],
        screening_ratio: 0.0,
        objective: first.objective,
        wall_ms: t0.elapsed().as_secs_f64() * 1e3,
        n_survivors: l,
    });
    models.push(first);

    let mut delta: Option<Vec<f64>> = None;
    for k in 0..nu_grid.len() - 1 {
        let nu_next = nu_grid[k + 1];
        let t = Instant::now();
        let alpha_k = models[k].alpha.clone();
        let d = match delta.take() {
            None => solve_delta_full(&oracle, &alpha_k, nu_next, upper, opts.delta_eps, opts.delta_max_sweeps)?,
            Some(prev) => solve_delta_warm(&oracle, &alpha_k, &prev, nu_next, upper, opts.delta_eps, opts.delta_max_sweeps)?,
        };
        let mut ball = SafeBall::new(&oracle, &alpha_k, &d, nu_grid[k], nu_next);
        // α_k is only eps-accurate; the variational inequality behind the
        // ball can be short by O(eps) and the squared radius must absorb
        // that slack, or degenerate problems screen on solver noise
        ball.radius_sq += 4.0 * opts.eps;
        let bounds = score_bounds(&oracle, &ball);
        let (rho_lower, rho_upper) = rho_bounds(&bounds, nu_next, l);
        let outcome = screen(&bounds, rho_lower, rho_upper, upper);
        let alpha_next = reduced_solve(&oracle, &outcome, nu_next, opts)?;
        let model = NuSvmModel::from_alpha(oracle.clone(), nu_next, alpha_next)?;
        steps.push(PathStepRecord {
            nu: nu_next,
            screening_ratio: outcome.screening_ratio,
            objective: model.objective,
            wall_ms: t.elapsed().as_secs_f64() * 1e3,
            n_survivors: outcome.survivors.len(),
        });
        models.push(model);
        delta = Some(d);
    }

    Ok(NuPath { steps, models })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn random_supervised(l: usize, p: usize, seed: u64) -> Arc<GramOracle> {
        let mut rng = SplitMix64::new(seed);
        let feats: Vec<f64> = (0..l * p).map(|_| rng.normal()).collect();
        let labels: Vec<f64> = (0..l).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let data = Arc::new(Dataset::new(feats, p, Some(labels)).unwrap());
        Arc::new(GramOracle::new(data, KernelSpec::linear(true), GramMode::Supervised).unwrap())
    }

    fn random_feasible_u(rng: &mut SplitMix64, l: usize, nu: f64, upper: f64) -> Vec<f64> {
        let raw: Vec<f64> = (0..l).map(|_| rng.next_f64() * upper * 1.5 - 0.2 * upper).collect();
        project_box_linear(&raw, upper, LinearConstraint::SumAtLeast(nu)).unwrap()
    }

    #[test]
    fn radius_zero_at_zero_delta() {
        let q = random_supervised(6, 2, 1);
        let alpha0 = vec![0.05; 6];
        assert_eq!(radius_of(&q, &alpha0, &vec![0.0; 6]), 0.0);
    }

    #[test]
    fn radius_pure_quadratic_when_alpha_zero() {
        let q = random_supervised(6, 2, 2);
        let mut rng = SplitMix64::new(3);
        for _ in 0..20 {
            let delta: Vec<f64> = (0..6).map(|_| rng.normal() * 0.1).collect();
            assert!(radius_of(&q, &vec![0.0; 6], &delta) >= 0.0);
        }
    }

    #[test]
    fn radius_matches_center_norm_identity() {
        // r = beta^T Q beta - alpha0^T Q alpha0 with beta = alpha0 + delta/2
        let q = random_supervised(8, 3, 4);
        let mut rng = SplitMix64::new(5);
        for _ in 0..20 {
            let alpha0: Vec<f64> = (0..8).map(|_| rng.next_f64() * 0.125).collect();
            let delta: Vec<f64> = (0..8).map(|_| rng.normal() * 0.05).collect();
            let beta: Vec<f64> = alpha0.iter().zip(&delta).map(|(a, d)| a + 0.5 * d).collect();
            let want = q.quad_form(&beta, &beta).unwrap() - q.quad_form(&alpha0, &alpha0).unwrap();
            let got = radius_of(&q, &alpha0, &delta);
            assert!((got - want.max(0.0)).abs() < 1e-10, "{got} vs {want}");
        }
    }

    #[test]
    fn delta_feasibility_cases() {
        let alpha0 = vec![0.1, 0.1];
        // sum constraint fails at delta = 0
        assert!(!delta_feasible(&alpha0, &[0.0, 0.0], 0.5, 0.5));
        // uniform shift stays in the box
        let alpha0 = vec![0.15, 0.15]; // nu0 = 0.3, l = 2
        let shift = (0.6 - 0.3) / 2.0;
        assert!(delta_feasible(&alpha0, &[shift, shift], 0.6, 0.5));
        // pushing one coordinate above the box fails
        assert!(!delta_feasible(&alpha0, &[0.4, 0.0], 0.3, 0.5));
    }

    #[test]
    fn delta_full_zero_when_floor_already_met() {
        let q = random_supervised(6, 2, 7);
        let alpha0 = vec![0.1; 6]; // sum 0.6
        let d = solve_delta_full(&q, &alpha0, 0.5, 1.0 / 6.0, 1e-9, 1000).unwrap();
        assert_eq!(d, vec![0.0; 6]);
    }

    #[test]
    fn delta_full_beats_grid_search_two_vars() {
        let q = random_supervised(2, 2, 11);
        let alpha0 = vec![0.1, 0.2];
        let (nu_to, upper) = (0.7, 0.5);
        let d = solve_delta_full(&q, &alpha0, nu_to, upper, 1e-11, 10_000).unwrap();
        assert!(delta_feasible(&alpha0, &d, nu_to, upper));
        let r_opt = radius_of(&q, &alpha0, &d);

        // exhaustive grid over the admissible rectangle at resolution 1e-3
        let mut best = f64::INFINITY;
        let steps = 1000;
        for a in 0..=steps {
            for b in 0..=steps {
                let da = -alpha0[0] + (upper) * a as f64 / steps as f64;
                let db = -alpha0[1] + (upper) * b as f64 / steps as f64;
                if delta_feasible(&alpha0, &[da, db], nu_to, upper) {
                    best = best.min(radius_of(&q, &alpha0, &[da, db]));
                }
            }
        }
        assert!(r_opt <= best + 1e-6, "solver {r_opt} vs grid {best}");
    }

    #[test]
    fn delta_full_dominates_random_probes() {
        let mut rng = SplitMix64::new(13);
        let l = 10;
        let upper = 1.0 / l as f64;
        for trial in 0..5 {
            let q = random_supervised(l, 3, 100 + trial);
            let nu0 = 0.2 + 0.2 * rng.next_f64();
            let nu1 = nu0 + 0.2 + 0.3 * rng.next_f64();
            let alpha0 = random_feasible_u(&mut rng, l, nu0, upper);
            let d = solve_delta_full(&q, &alpha0, nu1, upper, 1e-10, 10_000).unwrap();
            let r_opt = radius_of(&q, &alpha0, &d);
            for _ in 0..1000 {
                let u = random_feasible_u(&mut rng, l, nu1, upper);
                let probe: Vec<f64> = u.iter().zip(&alpha0).map(|(u, a)| u - a).collect();
                let r = radius_of(&q, &alpha0, &probe);
                assert!(r_opt <= r + 1e-6, "trial {trial}: {r_opt} > probe {r}");
            }
        }
    }

    #[test]
    fn delta_warm_keeps_feasible_delta() {
        let q = random_supervised(6, 2, 17);
        let alpha0 = vec![0.1; 6];
        let d0 = solve_delta_full(&q, &alpha0, 0.8, 1.0 / 6.0, 1e-9, 5000).unwrap();
        // same target again: nothing violates, delta passes through
        let d1 = solve_delta_warm(&q, &alpha0, &d0, 0.8, 1.0 / 6.0, 1e-9, 5000).unwrap();
        assert_eq!(d0, d1);
    }

    #[test]
    fn delta_warm_repairs_box_violation() {
        let q = random_supervised(3, 2, 19);
        let upper = 1.0 / 3.0;
        let alpha_k = vec![0.3, 0.2, 0.1];
        // previous delta pushes coordinate 0 above the box
        let delta_k = vec![0.1, 0.0, 0.0];
        let d = solve_delta_warm(&q, &alpha_k, &delta_k, 0.6, upper, 1e-10, 5000).unwrap();
        assert!(delta_feasible(&alpha_k, &d, 0.6, upper));
        // untouched coordinates froze
        assert_eq!(d[1], 0.0);
        assert_eq!(d[2], 0.0);
        assert!(alpha_k[0] + d[0] <= upper + 1e-12);
    }

    #[test]
    fn delta_warm_radius_between_full_and_clip() {
        let mut rng = SplitMix64::new(23);
        let l = 12;
        let upper = 1.0 / l as f64;
        let mut compared = 0;
        for trial in 0..20 {
            let q = random_supervised(l, 3, 200 + trial);
            let nu0 = 0.15 + 0.2 * rng.next_f64();
            let nu1 = nu0 + 0.1 + 0.1 * rng.next_f64();
            let nu2 = nu1 + 0.1 + 0.1 * rng.next_f64();
            let alpha0 = random_feasible_u(&mut rng, l, nu0, upper);
            let d01 = solve_delta_full(&q, &alpha0, nu1, upper, 1e-10, 10_000).unwrap();
            // pretend alpha moved to the nu1 optimum's neighborhood
            let alpha1 = random_feasible_u(&mut rng, l, nu1, upper);

            let warm = solve_delta_warm(&q, &alpha1, &d01, nu2, upper, 1e-10, 10_000).unwrap();
            let full = solve_delta_full(&q, &alpha1, nu2, upper, 1e-10, 10_000).unwrap();
            let r_warm = radius_of(&q, &alpha1, &warm);
            let r_full = radius_of(&q, &alpha1, &full);
            assert!(r_full <= r_warm + 1e-8, "trial {trial}: full {r_full} > warm {r_warm}");

            // naive clip of the stale delta, when it happens to be feasible
            let clip: Vec<f64> = alpha1
                .iter()
                .zip(&d01)
                .map(|(a, d)| (a + d).clamp(0.0, upper) - a)
                .collect();
            if delta_feasible(&alpha1, &clip, nu2, upper) {
                compared += 1;
                let r_clip = radius_of(&q, &alpha1, &clip);
                assert!(r_warm <= r_clip + 1e-8, "trial {trial}: warm {r_warm} > clip {r_clip}");
            }
        }
        assert!(compared > 0, "no clip-comparable trials");
    }

    #[test]
    fn zero_radius_bounds_collapse() {
        let q = random_supervised(5, 2, 29);
        let alpha0 = vec![0.08; 5];
        let ball = SafeBall::new(&q, &alpha0, &vec![0.0; 5], 0.3, 0.4);
        assert_eq!(ball.radius_sq, 0.0);
        let b = score_bounds(&q, &ball);
        assert_eq!(b.lower, b.center_score);
        assert_eq!(b.upper, b.center_score);
    }

    #[test]
    fn doubling_radius_scales_interval_by_sqrt2() {
        let q = random_supervised(5, 2, 31);
        let alpha0 = vec![0.08; 5];
        let mut ball = SafeBall::new(&q, &alpha0, &[0.02, -0.01, 0.0, 0.05, 0.0], 0.3, 0.5);
        let b1 = score_bounds(&q, &ball);
        ball.radius_sq *= 2.0;
        let b2 = score_bounds(&q, &ball);
        for i in 0..5 {
            let w1 = b1.upper[i] - b1.center_score[i];
            let w2 = b2.upper[i] - b2.center_score[i];
            if w1 > 1e-15 {
                assert!((w2 / w1 - 2f64.sqrt()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn rho_bounds_exact_at_zero_radius() {
        let bounds = ScoreBounds {
            center_score: vec![3.0, 2.0, 1.0, 0.0],
            self_norm: vec![1.0; 4],
            lower: vec![3.0, 2.0, 1.0, 0.0],
            upper: vec![3.0, 2.0, 1.0, 0.0],
        };
        let (lo, hi) = rho_bounds(&bounds, 0.5, 4);
        assert_eq!((lo, hi), (2.0, 2.0));
    }

    #[test]
    fn rho_bounds_near_one_uses_top_scores() {
        let bounds = ScoreBounds {
            center_score: vec![3.0, 2.0, 1.0, 0.0],
            self_norm: vec![1.0; 4],
            lower: vec![2.9, 1.9, 0.9, -0.1],
            upper: vec![3.1, 2.1, 1.1, 0.1],
        };
        let (lo, hi) = rho_bounds(&bounds, 0.999, 4);
        // i* clamps to 1: both bounds come from the largest entries
        assert_eq!(hi, 3.1);
        assert_eq!(lo, 2.9);
        assert!(lo <= hi);
    }

    #[test]
    fn huge_radius_screens_nothing() {
        let q = random_supervised(10, 2, 37);
        let alpha0 = vec![0.05; 10];
        let mut ball = SafeBall::new(&q, &alpha0, &vec![0.0; 10], 0.3, 0.5);
        ball.radius_sq = 1e6;
        let b = score_bounds(&q, &ball);
        let (lo, hi) = rho_bounds(&b, 0.5, 10);
        let out = screen(&b, lo, hi, 0.1);
        assert_eq!(out.screening_ratio, 0.0);
        assert_eq!(out.survivors.len(), 10);
    }

    #[test]
    fn widening_radius_never_screens_more() {
        let q = random_supervised(20, 2, 41);
        let mut rng = SplitMix64::new(43);
        let upper = 0.05;
        let alpha0 = random_feasible_u(&mut rng, 20, 0.4, upper);
        let delta = solve_delta_full(&q, &alpha0, 0.6, upper, 1e-9, 5000).unwrap();
        let ball = SafeBall::new(&q, &alpha0, &delta, 0.4, 0.6);
        let mut prev_fixed = usize::MAX;
        for scale in [1.0, 2.0, 4.0, 16.0] {
            let mut b = ball.clone();
            b.radius_sq *= scale;
            let sb = score_bounds(&q, &b);
            let (lo, hi) = rho_bounds(&sb, 0.6, 20);
            let out = screen(&sb, lo, hi, upper);
            let fixed = out.fixed_zero.len() + out.fixed_upper.len();
            assert!(fixed <= prev_fixed, "fixing grew with radius");
            prev_fixed = fixed;
        }
    }

    #[test]
    fn reduced_problem_degenerate_cases() {
        let q = random_supervised(6, 2, 47);
        // nothing screened
        let out = ScreenOutcome {
            fixed_zero: vec![],
            fixed_upper: vec![],
            survivors: (0..6).collect(),
            box_upper: 1.0 / 6.0,
            rho_lower: 0.0,
            rho_upper: 0.0,
            screening_ratio: 0.0,
        };
        let (sub, f, cons) = reduced_problem(&q, &out, 0.5);
        assert_eq!(sub.dim(), 6);
        assert!(f.iter().all(|&x| x == 0.0));
        assert_eq!(cons.linear_floor, 0.5);

        // everything screened
        let out = ScreenOutcome {
            fixed_zero: vec![0, 1, 2],
            fixed_upper: vec![3, 4, 5],
            survivors: vec![],
            box_upper: 1.0 / 6.0,
            rho_lower: 0.0,
            rho_upper: 0.0,
            screening_ratio: 1.0,
        };
        let alpha = out.fixed_alpha(6);
        assert_eq!(alpha, vec![0.0, 0.0, 0.0, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0]);
    }

    #[test]
    fn single_point_grid_is_plain_training() {
        let mut rng = SplitMix64::new(53);
        let feats: Vec<f64> = (0..40).map(|_| rng.normal()).collect();
        let labels: Vec<f64> = (0..20).map(|i| if i < 10 { 1.0 } else { -1.0 }).collect();
        let data = Arc::new(Dataset::new(feats, 2, Some(labels)).unwrap());
        let path = solve_path(data.clone(), KernelSpec::linear(true), &[0.4], &PathOptions::default()).unwrap();
        assert_eq!(path.steps.len(), 1);
        assert_eq!(path.steps[0].screening_ratio, 0.0);
        let direct = NuSvmModel::train_full(data, KernelSpec::linear(true), 0.4, SolverKind::Dcdm, 1e-8).unwrap();
        assert!((path.models[0].objective - direct.objective).abs() < 1e-12);
    }

    #[test]
    fn invalid_grids_rejected() {
        let q = random_supervised(10, 2, 59);
        let data = q.dataset().clone();
        let opts = PathOptions::default();
        assert!(solve_path(data.clone(), KernelSpec::linear(true), &[], &opts).is_err());
        assert!(solve_path(data.clone(), KernelSpec::linear(true), &[0.5, 0.5], &opts).is_err());
        assert!(solve_path(data.clone(), KernelSpec::linear(true), &[0.5, 0.4], &opts).is_err());
        assert!(solve_path(data, KernelSpec::linear(true), &[0.5, 0.95], &opts).is_err());
    }

    #[test]
    fn screened_path_equals_cold_solves() {
        let mut rng = SplitMix64::new(61);
        let n = 30;
        let mut feats = Vec::new();
        let mut labels = Vec::new();
        for i in 0..n {
            let mu = if i < n / 2 { 2.0 } else { -2.0 };
            feats.push(mu + rng.normal());
            feats.push(mu + rng.normal());
            labels.push(if i < n / 2 { 1.0 } else { -1.0 });
        }
        let data = Arc::new(Dataset::new(feats, 2, Some(labels)).unwrap());
        let grid = [0.2, 0.4, 0.6, 0.8];
        let opts = PathOptions { eps: 1e-10, delta_eps: 1e-10, ..PathOptions::default() };
        let path = solve_path(data.clone(), KernelSpec::linear(true), &grid, &opts).unwrap();
        for (k, &nu) in grid.iter().enumerate() {
            let cold = NuSvmModel::train_full(data.clone(), KernelSpec::linear(true), nu, SolverKind::Dcdm, 1e-10).unwrap();
            let rel = (path.models[k].objective - cold.objective).abs() / (1.0 + cold.objective.abs());
            assert!(rel < 1e-7, "step {k}: path {} vs cold {}", path.models[k].objective, cold.objective);
        }
    }
}
