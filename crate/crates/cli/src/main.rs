//! Command line front end: train single models, sweep ν grids with or
//! without screening, run experiment configs, and generate toy datasets.

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};

use svmscreen::data::{split, Dataset, ScaleMethod, Scaler};
use svmscreen::error::Error;
use svmscreen::experiment::{
    load_data, run_experiment, write_report, DataFormat, DataSource, ExperimentConfig, GridSpec,
};
use svmscreen::kernel::KernelSpec;
use svmscreen::metrics::{accuracy, auc};
use svmscreen::nusvm::{NuSvmModel, SolverKind};
use svmscreen::ocsvm::{solve_path_oc, OcPathOptions, OcSvmModel};
use svmscreen::screening::{solve_path, PathOptions};
use svmscreen::synth::{generate, SyntheticSet};

#[derive(Parser)]
#[command(name = "svmscreen", version, about = "nu-SVM / one-class SVM training with safe sample screening")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a single model and print a summary.
    Train(TrainArgs),
    /// Sweep a nu grid, optionally with the screening rule.
    Path(PathArgs),
    /// Run a full experiment config (JSON) and write a report.
    Bench(BenchArgs),
    /// Generate a synthetic dataset.
    Gen(GenArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum TaskArg {
    Nusvm,
    Ocsvm,
}

#[derive(Clone, Copy, ValueEnum)]
enum KernelArg {
    Linear,
    Rbf,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Libsvm,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScaleArg {
    Minmax,
    Zscore,
    None,
}

#[derive(Args)]
struct DataArgs {
    /// Input file.
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Libsvm)]
    format: FormatArg,
    /// CSV column holding the label.
    #[arg(long)]
    label_col: Option<usize>,
    /// Map label 0 to -1 when parsing LIBSVM text.
    #[arg(long, default_value_t = false)]
    zero_as_negative: bool,
    #[arg(long, value_enum, default_value_t = ScaleArg::Minmax)]
    scale: ScaleArg,
    /// Train-side fraction of the shuffled split.
    #[arg(long, default_value_t = 0.8)]
    train_frac: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long, value_enum, default_value_t = TaskArg::Nusvm)]
    task: TaskArg,
    #[arg(long, value_enum, default_value_t = KernelArg::Rbf)]
    kernel: KernelArg,
    /// RBF bandwidth.
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Fold the bias into the kernel (+1 on every value).
    #[arg(long, default_value_t = true)]
    augment_bias: bool,
    #[arg(long, default_value_t = 1e-8)]
    eps: f64,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    nu: f64,
    /// Write the model document (JSON) here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PathArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    model: ModelArgs,
    /// Grid as start:step:end.
    #[arg(long)]
    nu_grid: String,
    /// Screen inactive samples between grid points.
    #[arg(long, default_value_t = false)]
    srbo: bool,
    /// Write per-step records (JSON) here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Experiment config JSON.
    #[arg(long)]
    config: PathBuf,
    /// Override the config's output path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    /// gauss1 | gauss2 | gauss5 | circle | xor | spiral
    #[arg(long)]
    name: String,
    /// Samples per class.
    #[arg(long, default_value_t = 200)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = FormatArg::Libsvm)]
    format: FormatArg,
    #[arg(long)]
    out: PathBuf,
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Input(_) | Error::Serde(_) => 2,
        Error::Parse { .. } | Error::Io(_) => 3,
        Error::Numeric(_) => 4,
    }
}

fn kernel_spec(model: &ModelArgs) -> Result<KernelSpec, Error> {
    match model.kernel {
        KernelArg::Linear => Ok(KernelSpec::linear(model.augment_bias)),
        KernelArg::Rbf => KernelSpec::rbf(model.sigma, model.augment_bias),
    }
}

struct Prepared {
    train: Arc<Dataset>,
    test: Dataset,
}

/// Load, split and scale; for the one-class task the train side keeps
/// only the normal (+1) rows and drops its labels.
fn prepare(data_args: &DataArgs, task: TaskArg) -> Result<Prepared, Error> {
    let source = DataSource::File {
        path: data_args.data.clone(),
        format: match data_args.format {
            FormatArg::Libsvm => DataFormat::Libsvm,
            FormatArg::Csv => DataFormat::Csv,
        },
        label_column: data_args.label_col,
        zero_as_negative: data_args.zero_as_negative,
    };
    let full = load_data(&source)?;
    let (train_raw, test_raw) = split(&full, data_args.train_frac, data_args.seed)?;
    let (train, test) = match data_args.scale {
        ScaleArg::None => (train_raw, test_raw),
        ScaleArg::Minmax => {
            let s = Scaler::fit(ScaleMethod::Minmax01, &train_raw);
            (s.apply(&train_raw)?, s.apply(&test_raw)?)
        }
        ScaleArg::Zscore => {
            let s = Scaler::fit(ScaleMethod::Zscore, &train_raw);
            (s.apply(&train_raw)?, s.apply(&test_raw)?)
        }
    };
    let train = match task {
        TaskArg::Nusvm => Arc::new(train),
        TaskArg::Ocsvm => match train.labels() {
            None => Arc::new(train),
            Some(labels) => {
                let keep: Vec<usize> = (0..train.len()).filter(|&i| labels[i] > 0.0).collect();
                if keep.is_empty() {
                    return Err(Error::Input("no normal-class rows in the training split".into()));
                }
                Arc::new(train.select(&keep).without_labels())
            }
        },
    };
    Ok(Prepared { train, test })
}

fn cmd_train(args: &TrainArgs) -> Result<(), Error> {
    let spec = kernel_spec(&args.model)?;
    let prep = prepare(&args.data, args.model.task)?;
    match args.model.task {
        TaskArg::Nusvm => {
            let model = NuSvmModel::train_full(
                prep.train.clone(),
                spec,
                args.nu,
                SolverKind::Dcdm,
                args.model.eps,
            )?;
            let (me, sv) = model.nu_property(1e-6 / model.len() as f64);
            println!("trained nu-svm: l={} p={}", model.len(), prep.train.n_features());
            println!("  nu={} rho={:.6} objective={:.6e}", model.nu, model.rho, model.objective);
            println!("  support fraction {sv:.3}, margin-error fraction {me:.3}");
            if let Some(labels) = prep.test.labels() {
                let acc = accuracy(&model.predict(&prep.test)?, labels)?;
                println!("  test accuracy {:.2}% on {} held-out samples", acc, prep.test.len());
            }
            if let Some(out) = &args.out {
                std::fs::write(out, serde_json::to_string_pretty(&model.to_document())?)?;
                println!("  model written to {}", out.display());
            }
        }
        TaskArg::Ocsvm => {
            let model = OcSvmModel::train_full(prep.train.clone(), spec, args.nu, args.model.eps)?;
            let (out_frac, sv) = model.outlier_property(1e-9);
            println!("trained one-class svm: l={} p={}", model.len(), prep.train.n_features());
            println!("  nu={} rho={:.6} objective={:.6e}", model.nu, model.rho, model.objective);
            println!("  support fraction {sv:.3}, training outlier fraction {out_frac:.3}");
            if let Some(labels) = prep.test.labels() {
                let a = auc(&model.decision_values(&prep.test)?, labels)?;
                println!("  test auc {:.4} on {} held-out samples", a, prep.test.len());
            }
            if let Some(out) = &args.out {
                std::fs::write(out, serde_json::to_string_pretty(&model.to_document())?)?;
                println!("  model written to {}", out.display());
            }
        }
    }
    Ok(())
}

fn cmd_path(args: &PathArgs) -> Result<(), Error> {
    let spec = kernel_spec(&args.model)?;
    let prep = prepare(&args.data, args.model.task)?;
    let grid = GridSpec::from_str(&args.nu_grid)?.expand()?;
    let eps = args.model.eps;

    let json;
    match args.model.task {
        TaskArg::Nusvm => {
            let labels = prep.test.labels().map(|l| l.to_vec());
            if args.srbo {
                let opts = PathOptions { eps, delta_eps: eps, ..PathOptions::default() };
                let path = solve_path(prep.train.clone(), spec, &grid, &opts)?;
                for (step, model) in path.steps.iter().zip(&path.models) {
                    let acc = match &labels {
                        Some(l) => format!(" acc={:.2}%", accuracy(&model.predict(&prep.test)?, l)?),
                        None => String::new(),
                    };
                    println!(
                        "nu={:.4} objective={:.6e} screened={:.1}% wall={:.1}ms{acc}",
                        step.nu,
                        step.objective,
                        100.0 * step.screening_ratio,
                        step.wall_ms
                    );
                }
                json = path.to_json()?;
            } else {
                let mut rows = Vec::new();
                for &nu in &grid {
                    let t = std::time::Instant::now();
                    let model =
                        NuSvmModel::train_full(prep.train.clone(), spec, nu, SolverKind::Dcdm, eps)?;
                    let wall = t.elapsed().as_secs_f64() * 1e3;
                    let acc = match &labels {
                        Some(l) => format!(" acc={:.2}%", accuracy(&model.predict(&prep.test)?, l)?),
                        None => String::new(),
                    };
                    println!("nu={nu:.4} objective={:.6e} wall={wall:.1}ms{acc}", model.objective);
                    rows.push(serde_json::json!({
                        "nu": nu, "objective": model.objective, "wall_ms": wall,
                    }));
                }
                json = serde_json::to_string_pretty(&rows)?;
            }
        }
        TaskArg::Ocsvm => {
            let eval = if prep.test.labels().is_some() { Some(&prep.test) } else { None };
            if args.srbo {
                let opts = OcPathOptions { eps, delta_eps: eps, ..OcPathOptions::default() };
                let path = solve_path_oc(prep.train.clone(), spec, &grid, &opts, eval)?;
                for step in &path.steps {
                    let a = step.auc.map_or(String::new(), |a| format!(" auc={a:.4}"));
                    println!(
                        "nu={:.4} objective={:.6e} screened={:.1}% wall={:.1}ms{a}",
                        step.nu,
                        step.objective,
                        100.0 * step.screening_ratio,
                        step.wall_ms
                    );
                }
                json = path.to_json()?;
            } else {
                let mut rows = Vec::new();
                for &nu in &grid {
                    let t = std::time::Instant::now();
                    let model = OcSvmModel::train_full(prep.train.clone(), spec, nu, eps)?;
                    let wall = t.elapsed().as_secs_f64() * 1e3;
                    let a = match eval {
                        Some(set) => {
                            let labels = set.labels().expect("eval has labels");
                            format!(" auc={:.4}", auc(&model.decision_values(set)?, labels)?)
                        }
                        None => String::new(),
                    };
                    println!("nu={nu:.4} objective={:.6e} wall={wall:.1}ms{a}", model.objective);
                    rows.push(serde_json::json!({
                        "nu": nu, "objective": model.objective, "wall_ms": wall,
                    }));
                }
                json = serde_json::to_string_pretty(&rows)?;
            }
        }
    }
    if let Some(out) = &args.out {
        std::fs::write(out, json)?;
        println!("report written to {}", out.display());
    }
    Ok(())
}

fn cmd_bench(args: &BenchArgs) -> Result<(), Error> {
    let text = std::fs::read_to_string(&args.config)?;
    let mut cfg: ExperimentConfig = serde_json::from_str(&text)?;
    if args.out.is_some() {
        cfg.output = args.out.clone();
    }
    let report = run_experiment(&cfg)?;
    println!(
        "{} cells, mean screening {:.1}%, speedup x{:.2}, best metric {:.4} (sigma {:?}, nu {:.3})",
        report.cells.len(),
        100.0 * report.aggregate.mean_screening_ratio,
        report.aggregate.speedup_ratio,
        report.aggregate.best_metric,
        report.aggregate.best_sigma,
        report.aggregate.best_nu
    );
    if let Some(path) = &cfg.output {
        write_report(&report, path)?;
        println!("report written to {} (+ .csv)", path.display());
    }
    Ok(())
}

fn cmd_gen(args: &GenArgs) -> Result<(), Error> {
    let set: SyntheticSet = args.name.parse()?;
    let data = generate(set, args.n, args.seed);
    let text = match args.format {
        FormatArg::Libsvm => data.to_libsvm()?,
        FormatArg::Csv => {
            let mut out = String::new();
            for i in 0..data.len() {
                for v in data.row(i) {
                    out.push_str(&format!("{v},"));
                }
                out.push_str(&format!("{}\n", data.label(i).expect("generated data is labeled")));
            }
            out
        }
    };
    std::fs::write(&args.out, text)?;
    println!("wrote {} samples to {}", data.len(), args.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Train(a) => cmd_train(a),
        Command::Path(a) => cmd_path(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Gen(a) => cmd_gen(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
