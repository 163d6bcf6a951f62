//! Bayesian variable selection for the normal linear model.
//!
//! Models are subsets of candidate regressors (the intercept is always
//! present) and are compared against the intercept-only model `M_0` through
//! Bayes factors that depend on the data only via the residual-sum-of-squares
//! ratio `b_j0`. On top of that sit exhaustive posterior enumeration,
//! large-sample consistency diagnostics, frequentist error curves of the
//! induced decision rules and a seeded simulation harness.

// `!(x > y)` is used on purpose throughout so that NaN takes the failing branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod bayes_factor;
pub mod cli;
pub mod error;
pub mod error_analysis;
pub mod posterior;
pub mod prior;
pub mod quadrature;
pub mod regression;
pub mod sim;
pub mod special;

pub use bayes_factor::{
    log_bayes_factor, log_bf_approx, log_bf_gn, log_bf_ip, log_bf_mix, log_bf_schwarz, BfMethod, BfMode,
    LogBayesFactor, Regime,
};
pub use error::{Error, ErrorKind, Result};
pub use posterior::{enumerate_posterior, enumerate_posterior_with_cap, PosteriorEntry, PosteriorTable};
pub use prior::ModelPrior;
pub use quadrature::QuadratureSpec;
pub use regression::{
    compute_bj0, load_dataset, pseudo_distance, read_dataset, write_dataset, residual_sum, Dataset, FitSummary, ModelSubset,
    SubsetFitter, TrueModel,
};
pub use special::{incomplete_beta_cdf, noncentral_beta_cdf};
pub use error_analysis::{critical_threshold, error_curves, error_point, CriticalRegion, ErrorCurvePoint, JRule};
pub use sim::{derive_seed, generate_synthetic, run_consistency_experiment, run_error_mc, ExperimentConfig, ExperimentResult};
