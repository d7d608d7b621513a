//! Training LSE, max-affine and GPOS models from data.

mod cv;
mod lse;
mod max_affine;
mod metrics;

pub use cv::{cross_validate, select_cell, CvCell, CvConfig, CvResult};
pub use lse::{fit_gpos, fit_lse, init_lse_from_max_affine, loss_and_gradient};
pub use max_affine::{fit_max_affine, fit_max_affine_with, MaxAffineConfig};
pub use metrics::{compute_metrics, metrics_from_predictions, relative_error_bound, Metrics};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Trainer settings for [`fit_lse`] / [`fit_gpos`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitConfig {
    /// Number of terms `K`.
    pub terms: usize,
    /// Temperature `T`.
    pub temperature: f64,
    pub max_iterations: usize,
    /// Heavy-ball coefficient applied to the previous search direction.
    pub momentum: f64,
    /// Sufficient-decrease constant of the Armijo test.
    pub armijo: f64,
    /// Step shrink factor on a rejected trial.
    pub backtrack: f64,
    /// First trial step; `None` picks `1 / (2m)`.
    pub initial_step: Option<f64>,
    pub restarts: usize,
    pub seed: u64,
    /// Ridge weight `λ` on the exponent entries.
    pub regularization: f64,
    /// Stop once the relative loss decrease stays below this for `patience` steps.
    pub tolerance: f64,
    pub patience: usize,
    /// Start restart 0 from a max-affine partition fit.
    pub warm_start: bool,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            terms: 3,
            temperature: 1.0,
            max_iterations: 3000,
            momentum: 0.9,
            armijo: 1e-4,
            backtrack: 0.5,
            initial_step: None,
            restarts: 5,
            seed: 0,
            regularization: 0.0,
            tolerance: 1e-10,
            patience: 25,
            warm_start: true,
        }
    }
}

impl FitConfig {
    pub fn new(terms: usize, temperature: f64) -> Self {
        Self {
            terms,
            temperature,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |what: &str| Err(Error::input(format!("fit config: {what}")));
        if self.terms == 0 {
            return fail("terms must be at least 1");
        }
        if !(self.temperature.is_finite() && self.temperature > 0.0) {
            return fail("temperature must be positive");
        }
        if self.restarts == 0 {
            return fail("restarts must be at least 1");
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return fail("momentum must lie in [0, 1)");
        }
        if !(self.armijo > 0.0 && self.armijo < 1.0) {
            return fail("armijo constant must lie in (0, 1)");
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return fail("backtrack factor must lie in (0, 1)");
        }
        if let Some(s) = self.initial_step {
            if !(s.is_finite() && s > 0.0) {
                return fail("initial step must be positive");
            }
        }
        if !(self.regularization.is_finite() && self.regularization >= 0.0) {
            return fail("regularization must be nonnegative");
        }
        if self.tolerance.is_nan() || self.tolerance < 0.0 {
            return fail("tolerance must be nonnegative");
        }
        Ok(())
    }
}

/// Outcome of a fit. Losses are in the units of the original data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub final_loss: f64,
    /// Accepted steps taken by the winning restart.
    pub iterations: usize,
    pub best_restart: usize,
    pub restart_losses: Vec<f64>,
    /// Loss after every accepted step of the winning restart, starting with
    /// the initial loss.
    pub loss_trajectory: Vec<f64>,
    pub metrics: Metrics,
}

impl FitReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }
}

/// One independent RNG stream per (seed, stream) pair.
pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
