//! ν-SVM training, prediction and optimality audits.
//!
//! Training solves `min ½ αᵀQα` over `{eᵀα ≥ ν, 0 ≤ α ≤ 1/l}`. The
//! decision function needs no intercept (the kernel carries the bias
//! fold): a probe is scored by `Σ_i y_i α_i k̃(x_i, x)` and labeled by
//! sign, with sign(0) fixed to +1.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::kernel::{kernel_eval, GramMode, GramOracle, KernelSpec};
use crate::qp::{dcdm_solve, pg_reference_solve, ConstraintSet, NuBoxConstraints};

pub const DEFAULT_MAX_SWEEPS: usize = 10_000;
pub const DEFAULT_MAX_REFERENCE_ITERS: usize = 2_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Dcdm,
    Reference,
}

/// A trained ν-SVM. Immutable once built; prediction is pure.
pub struct NuSvmModel {
    pub alpha: Vec<f64>,
    pub nu: f64,
    pub kernel: KernelSpec,
    pub rho: f64,
    pub objective: f64,
    oracle: Arc<GramOracle>,
}

/// KKT multipliers, residuals and the margin partition of one model.
#[derive(Clone, Debug)]
pub struct KktReport {
    /// d_i = (Qα)_i, the signed margins of the training points.
    pub margins: Vec<f64>,
    /// Multipliers of the upper box constraints: 1/l − α_i.
    pub beta_mult: Vec<f64>,
    /// Multiplier of the sum constraint: eᵀα − ν.
    pub gamma_mult: f64,
    /// Slacks ξ_i = max(0, ρ − d_i).
    pub xi: Vec<f64>,
    /// Largest feasibility or complementary-slackness residual.
    pub max_violation: f64,
    /// Indices with |d_i − ρ| ≤ tol (on the margin).
    pub on_margin: Vec<usize>,
    /// Indices with d_i > ρ + tol (strictly outside; α must be 0).
    pub outside: Vec<usize>,
    /// Indices with d_i < ρ − tol (inside/violating; α must be 1/l).
    pub inside: Vec<usize>,
}

/// Boundary tolerance for classifying α against its box; scales with the
/// box size.
pub(crate) fn alpha_tol(upper: f64) -> f64 {
    1e-6 * upper
}

/// ρ from the KKT system: the mean margin over free support vectors, or,
/// when none exist, the midpoint of the bracket formed by bound
/// coordinates. Clamped at 0, matching the primal constraint.
pub(crate) fn recover_rho(margins: &[f64], alpha: &[f64], upper: f64) -> f64 {
    let tol = alpha_tol(upper);
    let mut free_sum = 0.0;
    let mut free_count = 0usize;
    let mut lo = f64::NEG_INFINITY; // margins of coordinates at the upper bound stay below rho
    let mut hi = f64::INFINITY; // margins of zero coordinates stay above rho
    for (&a, &d) in alpha.iter().zip(margins) {
        if a > tol && a < upper - tol {
            free_sum += d;
            free_count += 1;
        } else if a >= upper - tol {
            lo = lo.max(d);
        } else {
            hi = hi.min(d);
        }
    }
    let rho = if free_count > 0 {
        free_sum / free_count as f64
    } else if lo.is_finite() && hi.is_finite() {
        0.5 * (lo + hi)
    } else if lo.is_finite() {
        lo
    } else if hi.is_finite() {
        hi
    } else {
        0.0
    };
    rho.max(0.0)
}

impl NuSvmModel {
    /// Train on the full dataset.
    pub fn train_full(
        data: Arc<Dataset>,
        kernel: KernelSpec,
        nu: f64,
        solver: SolverKind,
        eps: f64,
    ) -> Result<NuSvmModel> {
        let oracle = Arc::new(GramOracle::new(data, kernel, GramMode::Supervised)?);
        Self::train_with_oracle(oracle, nu, solver, eps)
    }

    /// Train against an existing oracle (path drivers share one).
    pub fn train_with_oracle(
        oracle: Arc<GramOracle>,
        nu: f64,
        solver: SolverKind,
        eps: f64,
    ) -> Result<NuSvmModel> {
        let l = oracle.len();
        validate_nu(nu, l)?;
        let labels = oracle.dataset().labels().expect("supervised oracle has labels");
        let pos = labels.iter().filter(|&&y| y > 0.0).count();
        if pos == 0 || pos == l {
            return Err(Error::input("training data must contain both classes"));
        }
        let cons = NuBoxConstraints::full(nu, l)?;
        let sol = match solver {
            SolverKind::Dcdm => dcdm_solve(oracle.as_ref(), None, &cons, None, eps, DEFAULT_MAX_SWEEPS)?,
            SolverKind::Reference => pg_reference_solve(
                oracle.as_ref(),
                None,
                &ConstraintSet::NuBox(cons),
                None,
                eps,
                DEFAULT_MAX_REFERENCE_ITERS,
            )?,
        };
        Self::from_alpha_internal(oracle, nu, sol.alpha, Some(sol.objective))
    }

    /// Assemble a model from an externally obtained dual vector (screened
    /// path steps combine fixed and solved coordinates, then call this).
    pub fn from_alpha(oracle: Arc<GramOracle>, nu: f64, alpha: Vec<f64>) -> Result<NuSvmModel> {
        Self::from_alpha_internal(oracle, nu, alpha, None)
    }

    fn from_alpha_internal(
        oracle: Arc<GramOracle>,
        nu: f64,
        alpha: Vec<f64>,
        objective: Option<f64>,
    ) -> Result<NuSvmModel> {
        let l = oracle.len();
        if alpha.len() != l {
            return Err(Error::input("alpha length does not match dataset"));
        }
        let margins = margins_of(&oracle, &alpha);
        let objective = objective
            .unwrap_or_else(|| 0.5 * alpha.iter().zip(&margins).map(|(a, d)| a * d).sum::<f64>());
        let rho = recover_rho(&margins, &alpha, 1.0 / l as f64);
        Ok(NuSvmModel { alpha, nu, kernel: *oracle.spec(), rho, objective, oracle })
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

    pub fn train_data(&self) -> &Arc<Dataset> {
        self.oracle.dataset()
    }

    /// Raw decision values `k̃(x₀, X) diag(Y) α` for each probe row.
    pub fn decision_values(&self, probes: &Dataset) -> Result<Vec<f64>> {
        let train = self.oracle.dataset();
        if probes.n_features() != train.n_features() {
            return Err(Error::input(format!(
                "probe dimension {} does not match training dimension {}",
                probes.n_features(),
                train.n_features()
            )));
        }
        let labels = train.labels().expect("supervised model");
        let active: Vec<(usize, f64)> = self
            .alpha
            .iter()
            .enumerate()
            .filter(|(_, &a)| a != 0.0)
            .map(|(i, &a)| (i, labels[i] * a))
            .collect();
        let kernel = self.kernel;
        let train = train.clone();
        Ok(crate::par::map_n(probes.len(), move |p| {
            let x = probes.row(p);
            active
                .iter()
                .map(|&(i, w)| w * kernel_eval(&kernel, train.row(i), x).expect("dims checked"))
                .sum()
        }))
    }

    /// Signed predictions; sign(0) is +1.
    pub fn predict(&self, probes: &Dataset) -> Result<Vec<f64>> {
        Ok(self.decision_values(probes)?.iter().map(|&v| if v >= 0.0 { 1.0 } else { -1.0 }).collect())
    }

    /// Training-point margins d_i = (Qα)_i.
    pub fn margins(&self) -> Vec<f64> {
        margins_of(&self.oracle, &self.alpha)
    }

    /// Recompute multipliers and residuals against the stored ρ.
    /// Violations are reported, never thrown.
    pub fn kkt_audit(&self, tol: f64) -> KktReport {
        let l = self.alpha.len();
        let upper = 1.0 / l as f64;
        let margins = self.margins();
        let rho = self.rho;
        let beta_mult: Vec<f64> = self.alpha.iter().map(|&a| upper - a).collect();
        let sum: f64 = self.alpha.iter().sum();
        let gamma_mult = sum - self.nu;
        let xi: Vec<f64> = margins.iter().map(|&d| (rho - d).max(0.0)).collect();

        let mut max_violation = (self.nu - sum).max(0.0); // sum feasibility
        max_violation = max_violation.max(-rho.min(0.0)); // rho >= 0
        max_violation = max_violation.max((gamma_mult * rho).abs()); // gamma * rho = 0
        let mut on_margin = Vec::new();
        let mut outside = Vec::new();
        let mut inside = Vec::new();
        for i in 0..l {
            let a = self.alpha[i];
            max_violation = max_violation.max(-a.min(0.0)); // alpha >= 0
            max_violation = max_violation.max((a - upper).max(0.0)); // alpha <= 1/l
            max_violation = max_violation.max(a * (margins[i] - rho).max(0.0)); // alpha complementarity
            max_violation = max_violation.max((beta_mult[i] * xi[i]).abs()); // beta complementarity
            let gap = margins[i] - rho;
            if gap > tol {
                outside.push(i);
            } else if gap < -tol {
                inside.push(i);
            } else {
                on_margin.push(i);
            }
        }
        KktReport { margins, beta_mult, gamma_mult, xi, max_violation, on_margin, outside, inside }
    }

    /// Fractions (margin errors, support vectors); for a converged model
    /// both bracket ν up to boundary ties: m/l ≤ ν + 2/l and ν ≤ s/l + 2/l.
    pub fn nu_property(&self, tol: f64) -> (f64, f64) {
        let l = self.alpha.len() as f64;
        let margins = self.margins();
        let support = self.alpha.iter().filter(|&&a| a > tol).count() as f64;
        let errors = margins.iter().filter(|&&d| d < self.rho - tol).count() as f64;
        (errors / l, support / l)
    }

    /// ½‖w‖² − νρ + (1/l) Σ max(0, ρ − d_i), with ‖w‖² = αᵀQα.
    pub fn primal_objective(&self) -> f64 {
        let margins = self.margins();
        let w2: f64 = self.alpha.iter().zip(&margins).map(|(a, d)| a * d).sum();
        let l = self.alpha.len() as f64;
        let hinge: f64 = margins.iter().map(|&d| (self.rho - d).max(0.0)).sum();
        0.5 * w2 - self.nu * self.rho + hinge / l
    }

    pub fn to_document(&self) -> ModelDocument {
        ModelDocument {
            schema_version: 1,
            task: "nu_svm".into(),
            kernel: self.kernel,
            nu: self.nu,
            rho: self.rho,
            objective: self.objective,
            alpha: self.alpha.clone(),
            dataset_checksum: format!("{:016x}", self.oracle.dataset().checksum()),
        }
    }

    /// Rebuild a model from its JSON document and the original data.
    pub fn from_document(doc: &ModelDocument, data: Arc<Dataset>) -> Result<NuSvmModel> {
        if doc.task != "nu_svm" {
            return Err(Error::input(format!("expected a nu_svm document, got '{}'", doc.task)));
        }
        let sum = format!("{:016x}", data.checksum());
        if sum != doc.dataset_checksum {
            return Err(Error::input("dataset checksum does not match the model document"));
        }
        let oracle = Arc::new(GramOracle::new(data, doc.kernel, GramMode::Supervised)?);
        Self::from_alpha(oracle, doc.nu, doc.alpha.clone())
    }
}

pub(crate) fn margins_of(oracle: &GramOracle, alpha: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; alpha.len()];
    crate::qp::QuadAccess::mat_vec(oracle, alpha, &mut out);
    out
}

pub(crate) fn validate_nu(nu: f64, l: usize) -> Result<()> {
    let hi = 1.0 - 1.0 / l as f64;
    if !(0.0 < nu && nu <= hi) {
        return Err(Error::input(format!("nu must be in (0, {hi}] for {l} samples, got {nu}")));
    }
    Ok(())
}

/// Serialized model: everything needed to predict given the training data.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModelDocument {
    pub schema_version: u32,
    pub task: String,
    pub kernel: KernelSpec,
    pub nu: f64,
    pub rho: f64,
    pub objective: f64,
    pub alpha: Vec<f64>,
    pub dataset_checksum: String,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn dataset(rows: &[&[f64]], labels: &[f64]) -> Arc<Dataset> {
        let p = rows[0].len();
        let feats: Vec<f64> = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Arc::new(Dataset::new(feats, p, Some(labels.to_vec())).unwrap())
    }

    fn gaussians(n_per_class: usize, mu: f64, seed: u64) -> Arc<Dataset> {
        let mut rng = SplitMix64::new(seed);
        let mut feats = Vec::new();
        let mut labels = Vec::new();
        for &(m, y) in &[(mu, 1.0), (-mu, -1.0)] {
            for _ in 0..n_per_class {
                feats.push(m + rng.normal());
                feats.push(m + rng.normal());
                labels.push(y);
            }
        }
        Arc::new(Dataset::new(feats, 2, Some(labels)).unwrap())
    }

    fn two_point_model(solver: SolverKind) -> NuSvmModel {
        let data = dataset(&[&[1.0, 0.0], &[0.0, 1.0]], &[1.0, -1.0]);
        NuSvmModel::train_full(data, KernelSpec::linear(true), 0.5, solver, 1e-10).unwrap()
    }

    #[test]
    fn orthonormal_pair_hand_kkt() {
        for solver in [SolverKind::Dcdm, SolverKind::Reference] {
            let m = two_point_model(solver);
            assert!((m.alpha[0] - 0.25).abs() < 1e-7, "{:?}", m.alpha);
            assert!((m.alpha[1] - 0.25).abs() < 1e-7);
            assert!((m.rho - 0.25).abs() < 1e-6);
            assert!((m.objective - 0.0625).abs() < 1e-8);
        }
    }

    #[test]
    fn nu_near_upper_limit_saturates_box() {
        let data = gaussians(5, 1.0, 42); // l = 10
        let nu = 0.88; // just below 1 - 1/l = 0.9
        let m = NuSvmModel::train_full(data, KernelSpec::linear(true), nu, SolverKind::Reference, 1e-10).unwrap();
        let sum: f64 = m.alpha.iter().sum();
        assert!(sum >= nu - 1e-8);
        let near_upper = m.alpha.iter().filter(|&&a| a > 0.1 - 1e-4).count();
        assert!(near_upper >= 8, "only {near_upper} of 10 coordinates near 1/l");
    }

    #[test]
    fn nu_out_of_range_rejected() {
        let data = gaussians(5, 1.0, 1);
        for nu in [0.0, 0.95, 1.0, -0.2] {
            assert!(NuSvmModel::train_full(data.clone(), KernelSpec::linear(true), nu, SolverKind::Dcdm, 1e-8).is_err());
        }
    }

    #[test]
    fn single_class_rejected() {
        let data = dataset(&[&[1.0], &[2.0]], &[1.0, 1.0]);
        assert!(NuSvmModel::train_full(data, KernelSpec::linear(true), 0.4, SolverKind::Dcdm, 1e-8).is_err());
    }

    #[test]
    fn duplicated_dataset_same_decisions() {
        let base = gaussians(4, 1.5, 7);
        let mut feats = Vec::new();
        let mut labels = Vec::new();
        for i in 0..base.len() {
            for _ in 0..2 {
                feats.extend_from_slice(base.row(i));
                labels.push(base.label(i).unwrap());
            }
        }
        let doubled = Arc::new(Dataset::new(feats, 2, Some(labels)).unwrap());
        let spec = KernelSpec::linear(true);
        let m1 = NuSvmModel::train_full(base.clone(), spec, 0.5, SolverKind::Reference, 1e-11).unwrap();
        let m2 = NuSvmModel::train_full(doubled, spec, 0.5, SolverKind::Reference, 1e-11).unwrap();

        let probes = gaussians(6, 1.5, 99);
        let v1 = m1.decision_values(&probes).unwrap();
        let v2 = m2.decision_values(&probes).unwrap();
        for (a, b) in v1.iter().zip(&v2) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn decision_single_training_point() {
        let data = dataset(&[&[1.0]], &[1.0]);
        let oracle = Arc::new(GramOracle::new(data, KernelSpec::linear(true), GramMode::Supervised).unwrap());
        let m = NuSvmModel::from_alpha(oracle, 0.5, vec![1.0]).unwrap();
        let probes = Dataset::new(vec![2.0], 1, None).unwrap();
        let v = m.decision_values(&probes).unwrap();
        assert_eq!(v, vec![3.0]);
        assert_eq!(m.predict(&probes).unwrap(), vec![1.0]);
    }

    #[test]
    fn zero_alpha_predicts_positive_everywhere() {
        let data = dataset(&[&[1.0], &[-1.0]], &[1.0, -1.0]);
        let oracle = Arc::new(GramOracle::new(data, KernelSpec::linear(true), GramMode::Supervised).unwrap());
        let m = NuSvmModel::from_alpha(oracle, 0.5, vec![0.0, 0.0]).unwrap();
        let probes = Dataset::new(vec![0.3, -5.0, 2.0], 1, None).unwrap();
        assert_eq!(m.decision_values(&probes).unwrap(), vec![0.0, 0.0, 0.0]);
        assert_eq!(m.predict(&probes).unwrap(), vec![1.0, 1.0, 1.0]);
        assert_eq!(m.rho, 0.0);
        assert_eq!(m.primal_objective(), 0.0);
    }

    #[test]
    fn symmetric_model_zero_at_midpoint() {
        let data = dataset(&[&[1.0], &[-1.0]], &[1.0, -1.0]);
        let m = NuSvmModel::train_full(data, KernelSpec::linear(false), 0.4, SolverKind::Dcdm, 1e-10).unwrap();
        let probes = Dataset::new(vec![0.0], 1, None).unwrap();
        let v = m.decision_values(&probes).unwrap();
        assert!(v[0].abs() < 1e-12);
    }

    #[test]
    fn probe_dimension_mismatch() {
        let m = two_point_model(SolverKind::Dcdm);
        let probes = Dataset::new(vec![1.0, 2.0, 3.0], 3, None).unwrap();
        assert!(m.decision_values(&probes).is_err());
    }

    #[test]
    fn margins_match_decisions_times_labels() {
        let data = gaussians(6, 2.0, 3);
        let m = NuSvmModel::train_full(data.clone(), KernelSpec::rbf(1.0, true).unwrap(), 0.3, SolverKind::Dcdm, 1e-9).unwrap();
        let margins = m.margins();
        let values = m.decision_values(&data).unwrap();
        let labels = data.labels().unwrap();
        for i in 0..data.len() {
            assert!((margins[i] - labels[i] * values[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn margins_of_identity_like_model() {
        let data = dataset(&[&[1.0, 0.0], &[0.0, 1.0]], &[1.0, 1.0]);
        let oracle = Arc::new(GramOracle::new(data, KernelSpec::linear(false), GramMode::Supervised).unwrap());
        let m = NuSvmModel::from_alpha(oracle, 0.4, vec![0.25, 0.25]).unwrap();
        assert_eq!(m.margins(), vec![0.25, 0.25]);
    }

    #[test]
    fn kkt_clean_on_separated_gaussians() {
        let data = gaussians(20, 5.0, 11);
        let m = NuSvmModel::train_full(data, KernelSpec::linear(true), 0.5, SolverKind::Reference, 1e-10).unwrap();
        let report = m.kkt_audit(1e-6);
        assert!(report.max_violation <= 1e-6, "violation {}", report.max_violation);
        // partition covers all indices exactly once
        let total = report.on_margin.len() + report.outside.len() + report.inside.len();
        assert_eq!(total, m.len());
        // implications of the margin partition
        for &i in &report.outside {
            assert!(m.alpha[i] <= 1e-6, "outside sample {i} carries alpha {}", m.alpha[i]);
        }
        for &i in &report.inside {
            assert!(m.alpha[i] >= 1.0 / m.len() as f64 - 1e-6);
        }
    }

    #[test]
    fn kkt_clean_on_hand_model() {
        let m = two_point_model(SolverKind::Dcdm);
        let report = m.kkt_audit(1e-8);
        assert!(report.max_violation <= 1e-10, "violation {}", report.max_violation);
        assert!((report.gamma_mult).abs() < 1e-9);
        assert_eq!(report.on_margin.len(), 2);
    }

    fn copy_model(m: &NuSvmModel) -> NuSvmModel {
        NuSvmModel {
            alpha: m.alpha.clone(),
            nu: m.nu,
            kernel: m.kernel,
            rho: m.rho,
            objective: m.objective,
            oracle: m.oracle.clone(),
        }
    }

    #[test]
    fn perturbation_raises_violation() {
        let data = gaussians(20, 5.0, 13);
        let m = NuSvmModel::train_full(data, KernelSpec::linear(true), 0.5, SolverKind::Reference, 1e-10).unwrap();
        let base = m.kkt_audit(1e-6).max_violation;

        let l = m.len();
        let upper = 1.0 / l as f64;
        // nudge a box-bound coordinate off its bound
        let target = (0..l).find(|&i| m.alpha[i] >= upper - 1e-9).expect("saturated coordinate exists");
        let mut alpha = m.alpha.clone();
        alpha[target] -= 0.1 * upper;
        let perturbed = NuSvmModel { alpha, ..copy_model(&m) };
        let bumped = perturbed.kkt_audit(1e-6).max_violation;
        assert!(bumped > base * 10.0 + 1e-8, "base {base}, bumped {bumped}");
    }

    #[test]
    fn nu_property_bracket_on_random_models() {
        let mut rng = SplitMix64::new(19);
        for trial in 0..30 {
            let n = 6 + rng.below(10);
            let mu = 0.5 + 2.0 * rng.next_f64();
            let data = gaussians(n, mu, rng.next_u64());
            let l = 2 * n;
            let nu = 0.1 + 0.7 * rng.next_f64();
            let m = NuSvmModel::train_full(data, KernelSpec::linear(true), nu, SolverKind::Reference, 1e-10).unwrap();
            let (me, sv) = m.nu_property(alpha_tol(1.0 / l as f64));
            let slack = 2.0 / l as f64;
            assert!(me <= nu + slack, "trial {trial}: margin errors {me} vs nu {nu}");
            assert!(nu <= sv + slack, "trial {trial}: support fraction {sv} vs nu {nu}");
        }
    }

    #[test]
    fn nu_property_saturated_model() {
        let data = gaussians(5, 1.0, 23); // l = 10
        let m = NuSvmModel::train_full(data, KernelSpec::linear(true), 0.88, SolverKind::Reference, 1e-10).unwrap();
        let (_, sv) = m.nu_property(1e-9);
        assert!(sv >= 0.88 - 0.2, "support fraction {sv}");
    }

    #[test]
    fn duality_gap_shrinks_with_eps() {
        let data = gaussians(10, 1.0, 31);
        let spec = KernelSpec::linear(true);
        let loose = NuSvmModel::train_full(data.clone(), spec, 0.5, SolverKind::Reference, 1e-3).unwrap();
        let tight = NuSvmModel::train_full(data, spec, 0.5, SolverKind::Reference, 1e-10).unwrap();
        let gap = |m: &NuSvmModel| (m.primal_objective() + m.objective).abs();
        assert!(gap(&tight) <= gap(&loose) + 1e-12, "loose {} tight {}", gap(&loose), gap(&tight));
        assert!(gap(&tight) < 1e-6, "gap {}", gap(&tight));
    }

    #[test]
    fn primal_objective_two_point_by_hand() {
        let m = two_point_model(SolverKind::Dcdm);
        // w2 = 0.125, rho = 0.25, xi = 0: 0.0625 - 0.125 + 0 = -0.0625
        assert!((m.primal_objective() + 0.0625).abs() < 1e-8);
    }

    #[test]
    fn permuting_training_order_keeps_decisions() {
        let data = gaussians(8, 1.0, 47);
        let l = data.len();
        let mut idx: Vec<usize> = (0..l).collect();
        SplitMix64::new(3).shuffle(&mut idx);
        let permuted = Arc::new(data.select(&idx));

        let spec = KernelSpec::rbf(1.2, true).unwrap();
        let m1 = NuSvmModel::train_full(data, spec, 0.4, SolverKind::Dcdm, 1e-12).unwrap();
        let m2 = NuSvmModel::train_full(permuted, spec, 0.4, SolverKind::Dcdm, 1e-12).unwrap();
        let probes = gaussians(5, 1.0, 101);
        let v1 = m1.decision_values(&probes).unwrap();
        let v2 = m2.decision_values(&probes).unwrap();
        for (a, b) in v1.iter().zip(&v2) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn model_document_round_trip() {
        let data = gaussians(6, 2.0, 5);
        let m = NuSvmModel::train_full(data.clone(), KernelSpec::rbf(0.7, true).unwrap(), 0.3, SolverKind::Dcdm, 1e-9).unwrap();
        let json = serde_json::to_string(&m.to_document()).unwrap();
        let doc: ModelDocument = serde_json::from_str(&json).unwrap();
        let restored = NuSvmModel::from_document(&doc, data.clone()).unwrap();
        assert_eq!(restored.alpha, m.alpha);
        assert!((restored.rho - m.rho).abs() < 1e-12);

        // checksum mismatch is rejected
        let other = gaussians(6, 2.0, 6);
        assert!(NuSvmModel::from_document(&doc, other).is_err());
    }

    #[test]
    fn trained_model_invariants() {
        let mut rng = SplitMix64::new(71);
        for _ in 0..10 {
            let data = gaussians(8, 1.0 + rng.next_f64(), rng.next_u64());
            let nu = 0.1 + 0.6 * rng.next_f64();
            let m = NuSvmModel::train_full(data, KernelSpec::linear(true), nu, SolverKind::Dcdm, 1e-9).unwrap();
            let sum: f64 = m.alpha.iter().sum();
            assert!(sum >= nu - 1e-8 && sum <= 1.0 + 1e-8);
            let upper = 1.0 / m.len() as f64;
            assert!(m.alpha.iter().all(|&a| (-1e-10..=upper + 1e-10).contains(&a)));
            assert!(m.rho >= -1e-8);
        }
    }
}
