//! Log-sum-exp (LSE) convex surrogate models and their generalized-posynomial
//! (GPOS) counterparts.
//!
//! An LSE model with temperature `T > 0`, exponent rows `α_k ∈ ℝⁿ` and
//! offsets `β_k` is
//!
//! ```text
//! f_T(x) = T · log Σ_k exp((⟨α_k, x⟩ + β_k) / T)
//! ```
//!
//! It is smooth and convex, and sandwiched by its max-affine skeleton:
//! `f̄(x) ≤ f_T(x) ≤ f̄(x) + T log K`. Under `x = log z` it becomes the
//! log-log-convex function `ψ_T(z) = (Σ_k c_k Π_i z_i^{α_ki / T})^T` with
//! `c_k = exp(β_k / T)`.
//!
//! The crate covers model evaluation and calculus ([`model`]), temperature
//! and space transforms ([`transform`]), training and cross-validation
//! ([`fit`]), box-constrained design ([`optimize`]), synthetic ground truth
//! and brute-force oracles ([`synth`]), and the `lsenet` command-line tool
//! ([`cli`]).
//!
//! ```
//! use lsenet::{LseModel, BoxConstraints, SolverOptions, minimize_lse_box};
//!
//! let m = LseModel::from_rows(0.5, &[vec![1.0, 0.0], vec![-1.0, 1.0]], &[0.0, 0.5]).unwrap();
//! let b = BoxConstraints::cube(2, -1.0, 1.0).unwrap();
//! let rep = minimize_lse_box(&m, &b, &SolverOptions::default()).unwrap();
//! assert!(rep.converged && b.contains(&rep.minimizer));
//! ```

pub mod bench;
pub mod cli;
pub mod config;
pub mod dataset;
pub mod document;
pub mod error;
pub mod fit;
pub mod model;
pub mod numeric;
pub mod optimize;
pub mod synth;
pub mod transform;

pub use config::Tolerances;
pub use dataset::{Dataset, Space};
pub use document::ModelDocument;
pub use error::{Error, Result};
pub use fit::{
    compute_metrics, cross_validate, fit_gpos, fit_lse, fit_max_affine, CvConfig, CvResult,
    FitConfig, FitReport, Metrics,
};
pub use model::{GposModel, LseModel, MaxAffineModel, Model};
pub use numeric::{log_sum_exp, softmax};
pub use optimize::{
    maximize_via_reciprocal, minimize_lse_box, solve_gp_box, BoxConstraints, ReciprocalReport,
    SolveReport, SolverOptions,
};
pub use synth::{
    build_subgradient_approximator, generate_dataset, grid_minimize, Family, GeneratorSpec,
    GroundTruth,
};
pub use transform::{
    gpos_to_lse, lse_to_gpos, reduce_temperature, rescale_temperature, DEFAULT_TERM_BUDGET,
};
