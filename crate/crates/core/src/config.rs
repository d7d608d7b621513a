//! Default numerical tolerances used by the property checks, the bench
//! summary and the tests. Override by constructing your own value.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Absolute slack on `0 ≤ f_T − f̄ ≤ T log K`.
    pub sandwich_abs: f64,
    /// Relative deviation allowed in `f_T(x) = T f_1(x/T)`.
    pub scaling_rel: f64,
    /// Relative value agreement after temperature reduction.
    pub reduction_rel: f64,
    /// Gradient vs central differences, relative.
    pub gradient_rel: f64,
    /// Hessian vs central differences of the gradient, relative.
    pub hessian_rel: f64,
    /// Smallest eigenvalue counted as positive definite.
    pub min_eigenvalue: f64,
    /// Relative error of the exp/log conjugation between LSE and GPOS.
    pub conjugation_rel: f64,
    /// Slack on the midpoint convexity inequality.
    pub convexity_abs: f64,
    /// Finite-difference step.
    pub fd_step: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            sandwich_abs: 1e-9,
            scaling_rel: 1e-12,
            reduction_rel: 1e-8,
            gradient_rel: 1e-6,
            hessian_rel: 1e-4,
            min_eigenvalue: 1e-12,
            conjugation_rel: 1e-10,
            convexity_abs: 1e-9,
            fd_step: 1e-5,
        }
    }
}
