//! Grid-search experiment harness.
//!
//! One experiment fixes a dataset and a kernel family and walks a ν grid
//! twice per σ cell: a baseline arm that trains cold at every grid point
//! and a screened arm that runs the path driver. Both arms share the Gram
//! oracle, so timing compares solving strategies, not cache warm-up.
//! Timings take the median of `timing_repeats` runs of each arm; metric
//! fields are computed once (they are deterministic under a fixed seed).

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::data::{parse_csv, parse_libsvm, split, Dataset, ScaleMethod, Scaler};
use crate::error::{Error, Result};
use crate::kernel::{GramMode, GramOracle, KernelSpec};
use crate::metrics::{accuracy, auc};
use crate::nusvm::{NuSvmModel, SolverKind};
use crate::ocsvm::{solve_path_oc_with_oracle, OcPathOptions, OcSvmModel};
use crate::screening::{solve_path_with_oracle, PathOptions};
use crate::synth::{generate, SyntheticSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    Nusvm,
    Ocsvm,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataFormat {
    Libsvm,
    Csv,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "lowercase")]
pub enum DataSource {
    File {
        path: PathBuf,
        format: DataFormat,
        #[serde(default)]
        label_column: Option<usize>,
        #[serde(default)]
        zero_as_negative: bool,
    },
    Synthetic {
        name: String,
        n_per_class: usize,
    },
}

/// `start:step:end`, inclusive of `end` up to rounding.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GridSpec {
    pub start: f64,
    pub step: f64,
    pub end: f64,
}

impl GridSpec {
    pub fn expand(&self) -> Result<Vec<f64>> {
        if !(self.step > 0.0) || self.end < self.start {
            return Err(Error::input(format!("bad grid {}:{}:{}", self.start, self.step, self.end)));
        }
        let mut out = Vec::new();
        let mut k = 0usize;
        loop {
            let v = self.start + self.step * k as f64;
            if v > self.end + 1e-12 {
                break;
            }
            out.push(v);
            k += 1;
            if k > 1_000_000 {
                return Err(Error::input("grid has more than 1e6 points"));
            }
        }
        if out.is_empty() {
            return Err(Error::input("empty grid"));
        }
        Ok(out)
    }
}

impl std::str::FromStr for GridSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::input(format!("grid must be start:step:end, got '{s}'")));
        }
        let num = |t: &str| -> Result<f64> {
            t.parse().map_err(|_| Error::input(format!("bad grid number '{t}'")))
        };
        Ok(GridSpec { start: num(parts[0])?, step: num(parts[1])?, end: num(parts[2])? })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelFamily {
    Linear,
    Rbf,
}

fn default_train_fraction() -> f64 {
    0.8
}

fn default_timing_repeats() -> usize {
    3
}

fn default_augment() -> bool {
    true
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub task: TaskKind,
    pub data: DataSource,
    pub kernel: KernelFamily,
    /// Bandwidths to sweep; required (non-empty) for the RBF family.
    #[serde(default)]
    pub sigma_grid: Vec<f64>,
    #[serde(default = "default_augment")]
    pub augment_bias: bool,
    pub nu_grid: GridSpec,
    #[serde(default = "default_solver")]
    pub solver: SolverKind,
    #[serde(default = "default_eps")]
    pub eps: f64,
    pub seed: u64,
    #[serde(default)]
    pub scaling: Option<ScaleMethod>,
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
    #[serde(default = "default_timing_repeats")]
    pub timing_repeats: usize,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn default_solver() -> SolverKind {
    SolverKind::Dcdm
}

fn default_eps() -> f64 {
    1e-8
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EnvironmentStamp {
    pub package_version: String,
    pub os: String,
    pub cpu_threads: usize,
    pub unix_time_s: u64,
}

impl EnvironmentStamp {
    fn capture() -> Self {
        EnvironmentStamp {
            package_version: env!("CARGO_PKG_VERSION").to_string(),
            os: std::env::consts::OS.to_string(),
            cpu_threads: std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
            unix_time_s: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }
}

/// One (σ, ν) grid cell with both arms' results. `metric` is accuracy in
/// percent for the supervised task and AUC for the one-class task.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CellRecord {
    pub sigma: Option<f64>,
    pub nu: f64,
    pub metric_baseline: f64,
    pub metric_screened: f64,
    pub screening_ratio: f64,
    pub wall_ms_baseline: f64,
    pub wall_ms_screened: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Aggregate {
    pub mean_screening_ratio: f64,
    /// Total baseline time over total screened time (median-of-repeats).
    pub speedup_ratio: f64,
    pub best_metric: f64,
    pub best_sigma: Option<f64>,
    pub best_nu: f64,
    /// Screened-vs-baseline metric comparison across cells; a safe run
    /// reads (0, cells, 0).
    pub metric_wins: usize,
    pub metric_draws: usize,
    pub metric_losses: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub task: TaskKind,
    pub kernel: KernelFamily,
    pub scaling: Option<ScaleMethod>,
    pub seed: u64,
    pub environment: EnvironmentStamp,
    pub cells: Vec<CellRecord>,
    pub aggregate: Aggregate,
}

impl RunReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "sigma,nu,metric_baseline,metric_screened,screening_ratio,wall_ms_baseline,wall_ms_screened\n",
        );
        for c in &self.cells {
            let sigma = c.sigma.map_or(String::from(""), |s| s.to_string());
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                sigma,
                c.nu,
                c.metric_baseline,
                c.metric_screened,
                c.screening_ratio,
                c.wall_ms_baseline,
                c.wall_ms_screened
            ));
        }
        out
    }
}

pub fn load_data(source: &DataSource) -> Result<Arc<Dataset>> {
    match source {
        DataSource::File { path, format, label_column, zero_as_negative } => {
            let text = std::fs::read_to_string(path)?;
            let data = match format {
                DataFormat::Libsvm => parse_libsvm(&text, *zero_as_negative)?,
                DataFormat::Csv => parse_csv(&text, *label_column)?,
            };
            Ok(Arc::new(data))
        }
        DataSource::Synthetic { name, n_per_class } => {
            let set: SyntheticSet = name.parse()?;
            Ok(generate(set, *n_per_class, 0xDA7A))
        }
    }
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let m = xs.len();
    if m % 2 == 1 {
        xs[m / 2]
    } else {
        0.5 * (xs[m / 2 - 1] + xs[m / 2])
    }
}

struct ArmOutcome {
    metrics: Vec<f64>,
    ratios: Vec<f64>,
    wall_ms: Vec<f64>,
    total_ms: f64,
}

fn run_nusvm_cell(
    train: &Arc<Dataset>,
    test: &Dataset,
    spec: KernelSpec,
    nu_grid: &[f64],
    cfg: &ExperimentConfig,
) -> Result<(ArmOutcome, ArmOutcome)> {
    let oracle = Arc::new(GramOracle::new(train.clone(), spec, GramMode::Supervised)?);
    let test_labels = test.labels().ok_or_else(|| Error::input("test set lost its labels"))?;

    let baseline_run = || -> Result<(Vec<f64>, Vec<f64>, f64)> {
        let mut metrics = Vec::new();
        let mut walls = Vec::new();
        let mut total = 0.0;
        for &nu in nu_grid {
            let t = Instant::now();
            let model = NuSvmModel::train_with_oracle(oracle.clone(), nu, cfg.solver, cfg.eps)?;
            let ms = t.elapsed().as_secs_f64() * 1e3;
            total += ms;
            walls.push(ms);
            metrics.push(accuracy(&model.predict(test)?, test_labels)?);
        }
        Ok((metrics, walls, total))
    };
    let screened_run = || -> Result<(Vec<f64>, Vec<f64>, Vec<f64>, f64)> {
        let opts = PathOptions { solver: cfg.solver, eps: cfg.eps, delta_eps: cfg.eps, ..PathOptions::default() };
        let path = solve_path_with_oracle(oracle.clone(), nu_grid, &opts)?;
        let mut metrics = Vec::new();
        for model in &path.models {
            metrics.push(accuracy(&model.predict(test)?, test_labels)?);
        }
        let ratios: Vec<f64> = path.steps.iter().map(|s| s.screening_ratio).collect();
        let walls: Vec<f64> = path.steps.iter().map(|s| s.wall_ms).collect();
        let total = walls.iter().sum();
        Ok((metrics, ratios, walls, total))
    };

    // metrics from the first run; timing medians over repeats
    let (base_metrics, base_walls, mut base_totals) = {
        let (m, w, t) = baseline_run()?;
        (m, w, vec![t])
    };
    let (scr_metrics, scr_ratios, scr_walls, mut scr_totals) = {
        let (m, r, w, t) = screened_run()?;
        (m, r, w, vec![t])
    };
    for _ in 1..cfg.timing_repeats.max(1) {
        base_totals.push(baseline_run()?.2);
        scr_totals.push(screened_run()?.3);
    }

    Ok((
        ArmOutcome { metrics: base_metrics, ratios: vec![0.0; nu_grid.len()], wall_ms: base_walls, total_ms: median(base_totals) },
        ArmOutcome { metrics: scr_metrics, ratios: scr_ratios, wall_ms: scr_walls, total_ms: median(scr_totals) },
    ))
}

fn run_ocsvm_cell(
    train: &Arc<Dataset>,
    test: &Dataset,
    spec: KernelSpec,
    nu_grid: &[f64],
    cfg: &ExperimentConfig,
) -> Result<(ArmOutcome, ArmOutcome)> {
    let oracle = Arc::new(GramOracle::new(train.clone(), spec, GramMode::OneClass)?);
    let test_labels = test.labels().ok_or_else(|| Error::input("one-class evaluation needs labels"))?;

    let baseline_run = || -> Result<(Vec<f64>, Vec<f64>, f64)> {
        let mut metrics = Vec::new();
        let mut walls = Vec::new();
        let mut total = 0.0;
        for &nu in nu_grid {
            let t = Instant::now();
            let model = OcSvmModel::train_with_oracle(oracle.clone(), nu, cfg.eps)?;
            let ms = t.elapsed().as_secs_f64() * 1e3;
            total += ms;
            walls.push(ms);
            metrics.push(auc(&model.decision_values(test)?, test_labels)?);
        }
        Ok((metrics, walls, total))
    };
    let screened_run = || -> Result<(Vec<f64>, Vec<f64>, Vec<f64>, f64)> {
        let opts = OcPathOptions { eps: cfg.eps, delta_eps: cfg.eps, ..OcPathOptions::default() };
        let path = solve_path_oc_with_oracle(oracle.clone(), nu_grid, &opts, None)?;
        let mut metrics = Vec::new();
        for model in &path.models {
            metrics.push(auc(&model.decision_values(test)?, test_labels)?);
        }
        let ratios: Vec<f64> = path.steps.iter().map(|s| s.screening_ratio).collect();
        let walls: Vec<f64> = path.steps.iter().map(|s| s.wall_ms).collect();
        let total = walls.iter().sum();
        Ok((metrics, ratios, walls, total))
    };

    let (base_metrics, base_walls, mut base_totals) = {
        let (m, w, t) = baseline_run()?;
        (m, w, vec![t])
    };
    let (scr_metrics, scr_ratios, scr_walls, mut scr_totals) = {
        let (m, r, w, t) = screened_run()?;
        (m, r, w, vec![t])
    };
    for _ in 1..cfg.timing_repeats.max(1) {
        base_totals.push(baseline_run()?.2);
        scr_totals.push(screened_run()?.3);
    }

    Ok((
        ArmOutcome { metrics: base_metrics, ratios: vec![0.0; nu_grid.len()], wall_ms: base_walls, total_ms: median(base_totals) },
        ArmOutcome { metrics: scr_metrics, ratios: scr_ratios, wall_ms: scr_walls, total_ms: median(scr_totals) },
    ))
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunReport> {
    let full = load_data(&cfg.data)?;
    if full.labels().is_none() {
        return Err(Error::input("the experiment harness needs labeled data"));
    }
    let (train_raw, test_raw) = split(&full, cfg.train_fraction, cfg.seed)?;

    let (train, test) = match cfg.scaling {
        None => (train_raw, test_raw),
        Some(method) => {
            let scaler = Scaler::fit(method, &train_raw);
            (scaler.apply(&train_raw)?, scaler.apply(&test_raw)?)
        }
    };

    // the one-class task trains on the normal class only
    let train = match cfg.task {
        TaskKind::Nusvm => Arc::new(train),
        TaskKind::Ocsvm => {
            let labels = train.labels().expect("checked above");
            let keep: Vec<usize> = (0..train.len()).filter(|&i| labels[i] > 0.0).collect();
            if keep.is_empty() {
                return Err(Error::input("no normal-class samples in the training split"));
            }
            Arc::new(train.select(&keep).without_labels())
        }
    };

    let nu_grid = cfg.nu_grid.expand()?;
    let sigma_cells: Vec<Option<f64>> = match cfg.kernel {
        KernelFamily::Linear => vec![None],
        KernelFamily::Rbf => {
            if cfg.sigma_grid.is_empty() {
                return Err(Error::input("rbf kernel needs a non-empty sigma_grid"));
            }
            cfg.sigma_grid.iter().map(|&s| Some(s)).collect()
        }
    };

    let mut cells = Vec::new();
    let mut total_base = 0.0;
    let mut total_screened = 0.0;
    for &sigma in &sigma_cells {
        let spec = match sigma {
            None => KernelSpec::linear(cfg.augment_bias),
            Some(s) => KernelSpec::rbf(s, cfg.augment_bias)?,
        };
        let (base, screened) = match cfg.task {
            TaskKind::Nusvm => run_nusvm_cell(&train, &test, spec, &nu_grid, cfg)?,
            TaskKind::Ocsvm => run_ocsvm_cell(&train, &test, spec, &nu_grid, cfg)?,
        };
        total_base += base.total_ms;
        total_screened += screened.total_ms;
        for (k, &nu) in nu_grid.iter().enumerate() {
            cells.push(CellRecord {
                sigma,
                nu,
                metric_baseline: base.metrics[k],
                metric_screened: screened.metrics[k],
                screening_ratio: screened.ratios[k],
                wall_ms_baseline: base.wall_ms[k],
                wall_ms_screened: screened.wall_ms[k],
            });
        }
    }

    let mean_ratio = cells.iter().map(|c| c.screening_ratio).sum::<f64>() / cells.len() as f64;
    let best = cells
        .iter()
        .max_by(|a, b| a.metric_screened.total_cmp(&b.metric_screened))
        .expect("at least one cell");
    let wins = cells.iter().filter(|c| c.metric_screened > c.metric_baseline).count();
    let draws = cells.iter().filter(|c| c.metric_screened == c.metric_baseline).count();
    let report = RunReport {
        schema_version: 1,
        task: cfg.task,
        kernel: cfg.kernel,
        scaling: cfg.scaling,
        seed: cfg.seed,
        environment: EnvironmentStamp::capture(),
        aggregate: Aggregate {
            mean_screening_ratio: mean_ratio,
            speedup_ratio: total_base / total_screened.max(1e-12),
            best_metric: best.metric_screened,
            best_sigma: best.sigma,
            best_nu: best.nu,
            metric_wins: wins,
            metric_draws: draws,
            metric_losses: cells.len() - wins - draws,
        },
        cells,
    };

    if let Some(path) = &cfg.output {
        write_report(&report, path)?;
    }
    Ok(report)
}

/// Write the JSON report and a plot-ready CSV next to it.
pub fn write_report(report: &RunReport, path: &Path) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(report)?)?;
    std::fs::write(path.with_extension("csv"), report.to_csv())?;
    Ok(())
}
