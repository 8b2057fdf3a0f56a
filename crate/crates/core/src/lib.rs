//! Kernel ν-SVM and one-class SVM training with safe sample screening.
//!
//! The toolkit trains both models by solving their dual QPs and, when a
//! whole grid of ν values is requested, prunes provably inactive samples
//! before each solve: a ball that must contain the next weight vector is
//! built from the previous solution, per-sample score intervals follow
//! from Cauchy-Schwarz, and order statistics of those intervals bracket
//! the margin offset ρ. Samples whose interval clears the bracket get
//! their dual coordinate fixed at 0 or at the box bound, and only the
//! survivors enter the solver. The screened path is *safe*: it reproduces
//! the solution of the unscreened path, which the test suites check
//! end to end.
//!
//! Modules:
//! * [`data`] — LIBSVM/CSV ingestion, splits, scaling
//! * [`kernel`] — kernel evaluation and cached Gram access
//! * [`qp`] — the dual solvers and a projected-gradient reference oracle
//! * [`nusvm`] / [`ocsvm`] — the two models
//! * [`screening`] — ball construction, bounds, the screening rule, the
//!   ν-path driver
//! * [`metrics`] — accuracy, AUC, speedup, Wilcoxon signed-rank
//! * [`synth`] — deterministic 2-D toy data generators
//! * [`experiment`] — grid-search harness producing JSON/CSV reports

pub mod data;
pub mod error;
pub mod experiment;
pub mod kernel;
pub mod metrics;
pub mod nusvm;
pub mod ocsvm;
pub(crate) mod par;
pub mod qp;
pub mod rng;
pub mod screening;
pub mod synth;

pub use error::{Error, Result};
