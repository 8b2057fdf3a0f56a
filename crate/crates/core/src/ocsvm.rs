//! One-class SVM and its screened ν path.
//!
//! The dual is `min ½ αᵀHα` over `{eᵀα = 1, 0 ≤ α ≤ 1/(νl)}` with the raw
//! kernel matrix H. The screening machinery is the supervised one with H
//! in place of Q and the equality constraint in the δ set; larger ν means
//! a *smaller* box, so a stale δ may violate the new bounds and the warm
//! repair has to both clip and rebalance the equality.

use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::kernel::{kernel_eval, GramMode, GramOracle, GramSubset, KernelSpec};
use crate::metrics;
use crate::nusvm::{alpha_tol, ModelDocument};
use crate::qp::{
    project_box_linear, smo_equality_solve, LinearConstraint, QuadAccess, SimplexBoxConstraints,
};
use crate::screening::{rho_bounds, screen, score_bounds, SafeBall, ScoreBounds, ScreenOutcome};

pub const DEFAULT_MAX_SWEEPS: usize = 10_000;
const FEAS_EPS: f64 = 1e-10;

pub struct OcSvmModel {
    pub alpha: Vec<f64>,
    pub nu: f64,
    pub kernel: KernelSpec,
    pub rho: f64,
    pub objective: f64,
    oracle: Arc<GramOracle>,
}

fn validate_nu_oc(nu: f64) -> Result<()> {
    if !(0.0 < nu && nu <= 1.0) {
        return Err(Error::input(format!("one-class nu must be in (0,1], got {nu}")));
    }
    Ok(())
}

/// Mean score over free support vectors; with none, the median score of
/// the support set.
fn recover_rho_oc(scores: &[f64], alpha: &[f64], upper: f64) -> f64 {
    let tol = alpha_tol(upper);
    let free: Vec<f64> = alpha
        .iter()
        .zip(scores)
        .filter(|(&a, _)| a > tol && a < upper - tol)
        .map(|(_, &s)| s)
        .collect();
    if !free.is_empty() {
        return free.iter().sum::<f64>() / free.len() as f64;
    }
    let mut support: Vec<f64> = alpha
        .iter()
        .zip(scores)
        .filter(|(&a, _)| a > tol)
        .map(|(_, &s)| s)
        .collect();
    if support.is_empty() {
        return 0.0;
    }
    support.sort_by(f64::total_cmp);
    let m = support.len();
    if m % 2 == 1 {
        support[m / 2]
    } else {
        0.5 * (support[m / 2 - 1] + support[m / 2])
    }
}

impl OcSvmModel {
    pub fn train_full(data: Arc<Dataset>, kernel: KernelSpec, nu: f64, eps: f64) -> Result<OcSvmModel> {
        let oracle = Arc::new(GramOracle::new(data, kernel, GramMode::OneClass)?);
        Self::train_with_oracle(oracle, nu, eps)
    }

    pub fn train_with_oracle(oracle: Arc<GramOracle>, nu: f64, eps: f64) -> Result<OcSvmModel> {
        validate_nu_oc(nu)?;
        let l = oracle.len();
        if l == 0 {
            return Err(Error::input("empty training set"));
        }
        let cons = SimplexBoxConstraints::full(nu, l)?;
        let sol = smo_equality_solve(oracle.as_ref(), None, &cons, None, eps, DEFAULT_MAX_SWEEPS)?;
        Self::from_alpha_internal(oracle, nu, sol.alpha, Some(sol.objective))
    }

    pub fn from_alpha(oracle: Arc<GramOracle>, nu: f64, alpha: Vec<f64>) -> Result<OcSvmModel> {
        Self::from_alpha_internal(oracle, nu, alpha, None)
    }

    fn from_alpha_internal(
        oracle: Arc<GramOracle>,
        nu: f64,
        alpha: Vec<f64>,
        objective: Option<f64>,
    ) -> Result<OcSvmModel> {
        validate_nu_oc(nu)?;
        let l = oracle.len();
        if alpha.len() != l {
            return Err(Error::input("alpha length does not match dataset"));
        }
        let mut scores = vec![0.0; l];
        oracle.mat_vec(&alpha, &mut scores);
        let objective =
            objective.unwrap_or_else(|| 0.5 * alpha.iter().zip(&scores).map(|(a, s)| a * s).sum::<f64>());
        let upper = 1.0 / (nu * l as f64);
        let rho = recover_rho_oc(&scores, &alpha, upper);
        Ok(OcSvmModel { alpha, nu, kernel: *oracle.spec(), rho, objective, oracle })
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    pub fn oracle(&self) -> &Arc<GramOracle> {
        &self.oracle
    }

    /// Training-point scores (Hα)_i.
    pub fn train_scores(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.alpha.len()];
        self.oracle.mat_vec(&self.alpha, &mut out);
        out
    }

    /// score(x₀) = Σ α_i k̃(x_i, x₀) − ρ; nonnegative means normal.
    pub fn decision_values(&self, probes: &Dataset) -> Result<Vec<f64>> {
        let train = self.oracle.dataset();
        if probes.n_features() != train.n_features() {
            return Err(Error::input("probe dimension mismatch"));
        }
        let active: Vec<(usize, f64)> = self
            .alpha
            .iter()
            .enumerate()
            .filter(|(_, &a)| a != 0.0)
            .map(|(i, &a)| (i, a))
            .collect();
        let kernel = self.kernel;
        let rho = self.rho;
        let train = train.clone();
        Ok(crate::par::map_n(probes.len(), move |p| {
            let x = probes.row(p);
            let s: f64 = active
                .iter()
                .map(|&(i, a)| a * kernel_eval(&kernel, train.row(i), x).expect("dims checked"))
                .sum();
            s - rho
        }))
    }

    /// +1 for normal (score ≥ 0), −1 for anomalous.
    pub fn predict(&self, probes: &Dataset) -> Result<Vec<f64>> {
        Ok(self.decision_values(probes)?.iter().map(|&v| if v >= 0.0 { 1.0 } else { -1.0 }).collect())
    }

    /// Fractions (outliers, support vectors) among the training points.
    pub fn outlier_property(&self, tol: f64) -> (f64, f64) {
        let l = self.alpha.len() as f64;
        let scores = self.train_scores();
        let support = self.alpha.iter().filter(|&&a| a > tol).count() as f64;
        let outliers = scores.iter().filter(|&&s| s < self.rho - tol).count() as f64;
        (outliers / l, support / l)
    }

    pub fn to_document(&self) -> ModelDocument {
        ModelDocument {
            schema_version: 1,
            task: "oc_svm".into(),
            kernel: self.kernel,
            nu: self.nu,
            rho: self.rho,
            objective: self.objective,
            alpha: self.alpha.clone(),
            dataset_checksum: format!("{:016x}", self.oracle.dataset().checksum()),
        }
    }
}

/// Minimize the ball radius over Δ = {δ : eᵀ(α_k+δ) = 1, 0 ≤ α_k+δ ≤ upper}:
/// the same substitution as the supervised case, solved with pair moves
/// because of the equality.
pub fn solve_delta_oc_full(
    oracle: &GramOracle,
    alpha_k: &[f64],
    nu_next: f64,
    eps: f64,
    max_sweeps: usize,
) -> Result<Vec<f64>> {
    let l = oracle.len();
    validate_nu_oc(nu_next)?;
    let upper = 1.0 / (nu_next * l as f64);
    if alpha_k.iter().all(|&a| (-FEAS_EPS..=upper + FEAS_EPS).contains(&a)) {
        // the old optimum fits the shrunken box: δ = 0 gives radius 0
        return Ok(vec![0.0; l]);
    }
    let mut f = vec![0.0; l];
    oracle.mat_vec(alpha_k, &mut f);
    let cons = SimplexBoxConstraints { upper, sum_target: 1.0 };
    let start = project_box_linear(alpha_k, upper, LinearConstraint::SumEquals(1.0))?;
    let sol = smo_equality_solve(oracle, Some(&f), &cons, Some(&start), eps, max_sweeps)?;
    Ok(sol.alpha.iter().zip(alpha_k).map(|(u, a)| u - a).collect())
}

/// Equality-constrained warm repair of a stale δ: re-optimize the box
/// violators plus however many coordinates are needed to rebalance
/// eᵀ(α+δ) = 1 inside the new box.
pub fn solve_delta_oc_warm(
    oracle: &GramOracle,
    alpha_k: &[f64],
    delta_k: &[f64],
    nu_next: f64,
    eps: f64,
    max_sweeps: usize,
) -> Result<Vec<f64>> {
    let l = oracle.len();
    validate_nu_oc(nu_next)?;
    let upper = 1.0 / (nu_next * l as f64);
    let u: Vec<f64> = alpha_k.iter().zip(delta_k).map(|(a, d)| a + d).collect();
    let mut in_repair: Vec<bool> = u.iter().map(|&ui| !(-FEAS_EPS..=upper + FEAS_EPS).contains(&ui)).collect();

    let mut frozen: f64 = u.iter().zip(&in_repair).filter(|(_, &r)| !r).map(|(&ui, _)| ui).sum();
    let mut n_repair = in_repair.iter().filter(|&&r| r).count();
    if n_repair == 0 && (frozen - 1.0).abs() <= FEAS_EPS {
        return Ok(delta_k.to_vec());
    }
    // the repair coordinates must absorb exactly 1 - frozen
    loop {
        let need = 1.0 - frozen;
        if need >= -FEAS_EPS && need <= n_repair as f64 * upper + FEAS_EPS {
            break;
        }
        let candidate = if need < 0.0 {
            // frozen mass too large: free the biggest frozen coordinate
            (0..l).filter(|&i| !in_repair[i]).max_by(|&a, &b| u[a].total_cmp(&u[b]))
        } else {
            // not enough capacity: free the most headroom
            (0..l).filter(|&i| !in_repair[i]).max_by(|&a, &b| (upper - u[a]).total_cmp(&(upper - u[b])))
        };
        match candidate {
            Some(i) => {
                in_repair[i] = true;
                frozen -= u[i];
                n_repair += 1;
            }
            None => return Err(Error::input("empty delta set for the one-class repair")),
        }
    }

    let repair: Vec<usize> = (0..l).filter(|&i| in_repair[i]).collect();
    let mut carrier = vec![0.0; l];
    for i in 0..l {
        carrier[i] = alpha_k[i] + if in_repair[i] { 0.0 } else { u[i] };
    }
    let mut g = vec![0.0; l];
    oracle.mat_vec(&carrier, &mut g);
    let f_sub: Vec<f64> = repair.iter().map(|&i| g[i]).collect();

    let target = 1.0 - frozen;
    let cons = SimplexBoxConstraints { upper, sum_target: target };
    let clipped: Vec<f64> = repair.iter().map(|&i| u[i].clamp(0.0, upper)).collect();
    let start = project_box_linear(&clipped, upper, LinearConstraint::SumEquals(target))?;
    let sub = GramSubset::new(oracle, repair.clone());
    let sol = smo_equality_solve(&sub, Some(&f_sub), &cons, Some(&start), eps, max_sweeps)?;

    let mut delta = delta_k.to_vec();
    for (slot, &i) in repair.iter().enumerate() {
        delta[i] = sol.alpha[slot] - alpha_k[i];
    }
    Ok(delta)
}

/// The one-class screening rule for the step to `nu_next`, given the
/// previous optimum and a repaired δ. Scores use H, the box is the new
/// 1/(ν_next · l), and the ρ bracket uses i* = l − ν_next·l.
pub fn screen_oc(
    oracle: &GramOracle,
    alpha_k: &[f64],
    delta_k: &[f64],
    nu_next: f64,
) -> Result<(ScreenOutcome, ScoreBounds, SafeBall)> {
    screen_oc_padded(oracle, alpha_k, delta_k, nu_next, 0.0)
}

fn screen_oc_padded(
    oracle: &GramOracle,
    alpha_k: &[f64],
    delta_k: &[f64],
    nu_next: f64,
    radius_pad: f64,
) -> Result<(ScreenOutcome, ScoreBounds, SafeBall)> {
    let l = oracle.len();
    validate_nu_oc(nu_next)?;
    if alpha_k.len() != l || delta_k.len() != l {
        return Err(Error::input("vector length mismatch"));
    }
    let upper = 1.0 / (nu_next * l as f64);
    let mut ball = SafeBall::new(oracle, alpha_k, delta_k, f64::NAN, nu_next);
    ball.radius_sq += radius_pad;
    let bounds = score_bounds(oracle, &ball);
    let (rho_lower, rho_upper) = rho_bounds(&bounds, nu_next, l);
    let outcome = screen(&bounds, rho_lower, rho_upper, upper);
    Ok((outcome, bounds, ball))
}

#[derive(Clone, Debug, Serialize)]
pub struct OcPathStepRecord {
    pub nu: f64,
    pub screening_ratio: f64,
    pub objective: f64,
    pub wall_ms: f64,
    pub n_survivors: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub auc: Option<f64>,
}

pub struct OcPath {
    pub steps: Vec<OcPathStepRecord>,
    pub models: Vec<OcSvmModel>,
}

impl OcPath {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.steps)?)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct OcPathOptions {
    pub eps: f64,
    pub max_sweeps: usize,
    pub delta_eps: f64,
    pub delta_max_sweeps: usize,
}

impl Default for OcPathOptions {
    fn default() -> Self {
        OcPathOptions { eps: 1e-8, max_sweeps: 10_000, delta_eps: 1e-8, delta_max_sweeps: 10_000 }
    }
}

fn auc_of(model: &OcSvmModel, eval: Option<&Dataset>) -> Result<Option<f64>> {
    match eval {
        None => Ok(None),
        Some(set) => {
            let labels = set
                .labels()
                .ok_or_else(|| Error::input("evaluation set for the one-class path needs labels"))?;
            let scores = model.decision_values(set)?;
            Ok(Some(metrics::auc(&scores, labels)?))
        }
    }
}

/// Screened ascending ν path for the one-class model. When `eval` is
/// given (±1 labels: +1 normal), each step also records the AUC.
pub fn solve_path_oc(
    data: Arc<Dataset>,
    kernel: KernelSpec,
    nu_grid: &[f64],
    opts: &OcPathOptions,
    eval: Option<&Dataset>,
) -> Result<OcPath> {
    let oracle = Arc::new(GramOracle::new(data, kernel, GramMode::OneClass)?);
    solve_path_oc_with_oracle(oracle, nu_grid, opts, eval)
}

pub fn solve_path_oc_with_oracle(
    oracle: Arc<GramOracle>,
    nu_grid: &[f64],
    opts: &OcPathOptions,
    eval: Option<&Dataset>,
) -> Result<OcPath> {
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
        validate_nu_oc(nu)?;
    }

    let mut steps = Vec::with_capacity(nu_grid.len());
    let mut models: Vec<OcSvmModel> = Vec::with_capacity(nu_grid.len());

    let t0 = Instant::now();
    let first = OcSvmModel::train_with_oracle(oracle.clone(), nu_grid[0], opts.eps)?;
    steps.push(OcPathStepRecord {
        nu: nu_grid[0],
        screening_ratio: 0.0,
        objective: first.objective,
        wall_ms: t0.elapsed().as_secs_f64() * 1e3,
        n_survivors: l,
        auc: auc_of(&first, eval)?,
    });
    models.push(first);

    let mut delta: Option<Vec<f64>> = None;
    for k in 0..nu_grid.len() - 1 {
        let nu_next = nu_grid[k + 1];
        let t = Instant::now();
        let alpha_k = models[k].alpha.clone();
        let d = match delta.take() {
            None => solve_delta_oc_full(&oracle, &alpha_k, nu_next, opts.delta_eps, opts.delta_max_sweeps)?,
            Some(prev) => {
                solve_delta_oc_warm(&oracle, &alpha_k, &prev, nu_next, opts.delta_eps, opts.delta_max_sweeps)?
            }
        };
        // same radius inflation as the supervised driver: α_k is only
        // eps-accurate and the ball inequality can be short by O(eps)
        let (outcome, _, _) = screen_oc_padded(&oracle, &alpha_k, &d, nu_next, 4.0 * opts.eps)?;
        let alpha_next = reduced_solve_oc(&oracle, &outcome, opts)?;
        let model = OcSvmModel::from_alpha(oracle.clone(), nu_next, alpha_next)?;
        steps.push(OcPathStepRecord {
            nu: nu_next,
            screening_ratio: outcome.screening_ratio,
            objective: model.objective,
            wall_ms: t.elapsed().as_secs_f64() * 1e3,
            n_survivors: outcome.survivors.len(),
            auc: auc_of(&model, eval)?,
        });
        models.push(model);
        delta = Some(d);
    }

    Ok(OcPath { steps, models })
}

/// Cold-started survivor solve (see the supervised path driver: with an
/// empty rule outcome this reproduces the plain solve exactly).
fn reduced_solve_oc(
    oracle: &GramOracle,
    outcome: &ScreenOutcome,
    opts: &OcPathOptions,
) -> Result<Vec<f64>> {
    let l = oracle.len();
    if outcome.survivors.is_empty() {
        return Ok(outcome.fixed_alpha(l));
    }
    let fixed = outcome.fixed_alpha(l);
    let fixed_sum: f64 = fixed.iter().sum();
    let mut qf = vec![0.0; l];
    oracle.mat_vec(&fixed, &mut qf);
    let f: Vec<f64> = outcome.survivors.iter().map(|&i| qf[i]).collect();
    let target = 1.0 - fixed_sum;
    let cons = SimplexBoxConstraints { upper: outcome.box_upper, sum_target: target };
    let sub = GramSubset::new(oracle, outcome.survivors.clone());
    let sol = smo_equality_solve(&sub, Some(&f), &cons, None, opts.eps, opts.max_sweeps)?;
    Ok(outcome.combine(l, &sol.alpha))
}
