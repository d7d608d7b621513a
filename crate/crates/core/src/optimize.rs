//! Box-constrained design over fitted models.
//!
//! LSE objectives are minimized by projected gradient with Armijo
//! backtracking and Barzilai-Borwein trial steps. GPOS objectives with
//! monomial bounds `l_i ≤ z_i ≤ u_i` become LSE problems over the log-box.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{GposModel, LseModel, Model};
use crate::numeric::{dot, norm, softmax_into};
use crate::transform::gpos_to_lse;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxConstraints {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BoxConstraints {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        Error::check_dim(lower.len(), upper.len())?;
        if lower.is_empty() {
            return Err(Error::input("box must have at least one coordinate"));
        }
        for (i, (l, u)) in lower.iter().zip(&upper).enumerate() {
            if !(l.is_finite() && u.is_finite()) {
                return Err(Error::input(format!("box bound {i} is not finite")));
            }
            if l > u {
                return Err(Error::input(format!(
                    "box coordinate {i}: lower {l} > upper {u}"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// `[lower, upper]ⁿ`.
    pub fn cube(dim: usize, lower: f64, upper: f64) -> Result<Self> {
        Self::new(vec![lower; dim], vec![upper; dim])
    }

    /// `[(1-r)·x̄, (1+r)·x̄]` around a nominal point.
    pub fn around(nominal: &[f64], ratio: f64) -> Result<Self> {
        let lo = nominal
            .iter()
            .map(|v| (v * (1.0 - ratio)).min(v * (1.0 + ratio)));
        let hi = nominal
            .iter()
            .map(|v| (v * (1.0 - ratio)).max(v * (1.0 + ratio)));
        Self::new(lo.collect(), hi.collect())
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn center(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| 0.5 * (l + u))
            .collect()
    }

    pub fn project(&self, x: &mut [f64]) {
        for ((v, l), u) in x.iter_mut().zip(&self.lower).zip(&self.upper) {
            *v = v.clamp(*l, *u);
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(&self.lower)
                .zip(&self.upper)
                .all(|((v, l), u)| l <= v && v <= u)
    }

    /// The image of a positive box under entry-wise `log`.
    pub fn log_box(&self) -> Result<Self> {
        if self.lower.iter().any(|l| *l <= 0.0) {
            return Err(Error::Domain(
                "geometric-program box needs 0 < lower".into(),
            ));
        }
        Self::new(
            self.lower.iter().map(|v| v.ln()).collect(),
            self.upper.iter().map(|v| v.ln()).collect(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    /// Target for the projected-gradient norm.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub armijo: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            max_iterations: 100_000,
            armijo: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub minimizer: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    /// `‖x − P(x − ∇f(x))‖₂` at the returned point.
    pub stationarity: f64,
    pub converged: bool,
    /// Objective after every accepted iterate, starting point first.
    #[serde(skip)]
    pub trace: Vec<f64>,
}

impl SolveReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }
}

/// Exact `f(x + d) − f(x)` for an LSE model given the softmax weights `w` at
/// `x`: `T log Σ_k w_k exp(⟨α_k, d⟩ / T)`. Avoids the cancellation of
/// subtracting two nearly equal evaluations.
fn lse_increment(model: &LseModel, w: &[f64], d: &[f64]) -> f64 {
    let t = model.temperature();
    let mut shifts = Vec::with_capacity(w.len());
    let mut max = f64::NEG_INFINITY;
    for (k, wk) in w.iter().enumerate() {
        let s: f64 = model
            .exponents()
            .row(k)
            .iter()
            .zip(d)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / t;
        max = max.max(if *wk > 0.0 { s } else { f64::NEG_INFINITY });
        shifts.push(s);
    }
    if max <= 0.0 {
        // every shift nonpositive: log1p keeps full precision near zero
        let acc: f64 = w.iter().zip(&shifts).map(|(wk, s)| wk * s.exp_m1()).sum();
        t * acc.ln_1p()
    } else {
        let acc: f64 = w
            .iter()
            .zip(&shifts)
            .filter(|(wk, _)| **wk > 0.0)
            .map(|(wk, s)| wk * (s - max).exp())
            .sum();
        t * (max + acc.ln())
    }
}

fn projected_gradient_norm(x: &[f64], g: &[f64], bounds: &BoxConstraints) -> f64 {
    let mut y: Vec<f64> = x.iter().zip(g).map(|(a, b)| a - b).collect();
    bounds.project(&mut y);
    x.iter()
        .zip(&y)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Minimizes a convex LSE model over a box. The returned point always lies
/// in the box; by convexity a stationary point is a global minimizer.
pub fn minimize_lse_box(
    model: &LseModel,
    bounds: &BoxConstraints,
    options: &SolverOptions,
) -> Result<SolveReport> {
    Error::check_dim(model.dim(), bounds.dim())?;
    let n = model.dim();
    let k = model.terms();
    let t = model.temperature();

    let mut x = bounds.center();
    let mut w = vec![0.0; k];
    let weights_at = |x: &[f64], w: &mut [f64]| {
        let scores: Vec<f64> = model
            .affine_scores(x)
            .expect("dimension checked")
            .iter()
            .map(|s| s / t)
            .collect();
        softmax_into(&scores, w);
    };
    let gradient = |w: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|j| (0..k).map(|r| w[r] * model.exponents()[(r, j)]).sum())
            .collect()
    };

    let f = model.eval_unchecked(&x);
    if !f.is_finite() {
        return Err(Error::NonFinite { iteration: 0 });
    }
    weights_at(&x, &mut w);
    let mut g = gradient(&w);
    let mut pg = projected_gradient_norm(&x, &g, bounds);
    let mut trace = vec![f];
    let gmax = g.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut step = if gmax > 0.0 { 1.0 / gmax } else { 1.0 };
    let mut iterations = 0;

    while pg > options.tolerance && iterations < options.max_iterations {
        let mut s = step;
        let mut accepted = None;
        while s > 1e-30 {
            let mut cand: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a - s * b).collect();
            bounds.project(&mut cand);
            let d: Vec<f64> = cand.iter().zip(&x).map(|(a, b)| a - b).collect();
            let slope = dot(&g, &d);
            if slope >= 0.0 {
                // projection swallowed the step: no descent left at this scale
                break;
            }
            let delta = lse_increment(model, &w, &d);
            if delta.is_finite() && delta <= options.armijo * slope {
                accepted = Some((cand, d));
                break;
            }
            s *= 0.5;
        }
        let Some((cand, d)) = accepted else {
            break;
        };

        let mut w_new = vec![0.0; k];
        weights_at(&cand, &mut w_new);
        let g_new = gradient(&w_new);
        let f_new = model.eval_unchecked(&cand);
        if !f_new.is_finite() {
            return Err(Error::NonFinite {
                iteration: iterations + 1,
            });
        }
        // Barzilai-Borwein trial step for the next iteration
        let dg: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let curv = dot(&d, &dg);
        step = if curv > 0.0 {
            (dot(&d, &d) / curv).clamp(1e-12, 1e12)
        } else {
            (2.0 * s).min(1e12)
        };

        x = cand;
        w = w_new;
        g = g_new;
        trace.push(f_new);
        pg = projected_gradient_norm(&x, &g, bounds);
        iterations += 1;
        if norm(&d) == 0.0 {
            break;
        }
    }

    let objective = model.eval_unchecked(&x);
    Ok(SolveReport {
        minimizer: x,
        objective,
        iterations,
        stationarity: pg,
        converged: pg <= options.tolerance,
        trace,
    })
}

/// Solves `min ψ_T(z)` subject to `l ≤ z ≤ u` with `0 < l`, through the
/// log-transformed convex problem. The objective is reported in the original
/// positive units.
pub fn solve_gp_box(
    model: &GposModel,
    bounds: &BoxConstraints,
    options: &SolverOptions,
) -> Result<SolveReport> {
    let log_box = bounds.log_box()?;
    let lse = gpos_to_lse(model);
    let mut rep = minimize_lse_box(&lse, &log_box, options)?;
    rep.minimizer = rep.minimizer.iter().map(|q| q.exp()).collect();
    // exp(log u) can round just outside the original bounds
    bounds.project(&mut rep.minimizer);
    rep.objective = rep.objective.exp();
    rep.trace = rep.trace.iter().map(|v| v.exp()).collect();
    Ok(rep)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReciprocalReport {
    #[serde(flatten)]
    pub solve: SolveReport,
    /// Minimum of the surrogate of `1/P`.
    pub surrogate_value: f64,
    /// `1 / surrogate_value`, the estimated maximum of `P`.
    pub estimated_maximum: f64,
}

/// Maximizes a positive quantity `P` through a surrogate fitted to `1/P`:
/// minimizes the surrogate and reports its reciprocal.
pub fn maximize_via_reciprocal(
    surrogate: &Model,
    bounds: &BoxConstraints,
    options: &SolverOptions,
) -> Result<ReciprocalReport> {
    let solve = match surrogate {
        Model::Lse(m) => minimize_lse_box(m, bounds, options)?,
        Model::Gpos(m) => solve_gp_box(m, bounds, options)?,
        Model::MaxAffine(_) => {
            return Err(Error::input(
                "reciprocal maximization needs an LSE or GPOS surrogate",
            ))
        }
    };
    let surrogate_value = solve.objective;
    Ok(ReciprocalReport {
        estimated_maximum: 1.0 / surrogate_value,
        surrogate_value,
        solve,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn affine_objective_hits_lower_corner() {
        let m = LseModel::from_rows(0.3, &[vec![1.0, 2.5, 0.1]], &[4.0]).unwrap();
        let b = BoxConstraints::new(vec![-1.0, 0.5, 2.0], vec![3.0, 1.0, 7.0]).unwrap();
        let rep = minimize_lse_box(&m, &b, &SolverOptions::default()).unwrap();
        assert_eq!(rep.minimizer, vec![-1.0, 0.5, 2.0]);
        assert!(rep.converged);
        assert_eq!(rep.stationarity, 0.0);
    }

    #[test]
    fn symmetric_pair_minimum_at_origin() {
        for t in [1.0, 0.1, 0.01] {
            let m = LseModel::from_rows(t, &[vec![1.0], vec![-1.0]], &[0.0, 0.0]).unwrap();
            let b = BoxConstraints::cube(1, -1.0, 1.0).unwrap();
            let rep = minimize_lse_box(&m, &b, &SolverOptions::default()).unwrap();
            assert!(rep.minimizer[0].abs() < 1e-8);
            assert_relative_eq!(rep.objective, t * 2f64.ln(), max_relative = 1e-12);
        }
    }

    #[test]
    fn off_center_interior_minimum_converges_tightly() {
        let m = LseModel::from_rows(
            0.01,
            &[
                vec![1.0, 0.0],
                vec![-1.0, 0.3],
                vec![0.2, -1.0],
                vec![0.0, 1.0],
            ],
            &[0.1, -0.2, 0.05, 0.0],
        )
        .unwrap();
        let b = BoxConstraints::cube(2, -3.0, 2.0).unwrap();
        let rep = minimize_lse_box(&m, &b, &SolverOptions::default()).unwrap();
        assert!(rep.converged, "{rep:?}");
        for w in rep.trace.windows(2) {
            assert!(w[1] <= w[0] + 4.0 * f64::EPSILON * w[0].abs());
        }
    }

    #[test]
    fn monomial_gp_picks_lower_bound() {
        let g = GposModel::from_rows(1.0, &[2.0], &[vec![1.5]]).unwrap();
        let b = BoxConstraints::cube(1, 1.0, 2.0).unwrap();
        let rep = solve_gp_box(&g, &b, &SolverOptions::default()).unwrap();
        assert_relative_eq!(rep.minimizer[0], 1.0, max_relative = 1e-12);
        assert_relative_eq!(rep.objective, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn am_gm_minimum() {
        let g = GposModel::from_rows(1.0, &[1.0, 1.0], &[vec![1.0], vec![-1.0]]).unwrap();
        let b = BoxConstraints::cube(1, 0.5, 2.0).unwrap();
        let rep = solve_gp_box(&g, &b, &SolverOptions::default()).unwrap();
        assert!((rep.minimizer[0] - 1.0).abs() < 1e-8);
        assert_relative_eq!(rep.objective, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn gp_rejects_nonpositive_box() {
        let g = GposModel::from_rows(1.0, &[1.0], &[vec![1.0]]).unwrap();
        let b = BoxConstraints::cube(1, 0.0, 2.0).unwrap();
        assert!(matches!(
            solve_gp_box(&g, &b, &SolverOptions::default()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn reciprocal_of_constant_and_inverse_monomial() {
        let constant: Model = LseModel::from_rows(1.0, &[vec![0.0]], &[0.7])
            .unwrap()
            .into();
        let b = BoxConstraints::cube(1, 1.0, 2.0).unwrap();
        let rep = maximize_via_reciprocal(&constant, &b, &SolverOptions::default()).unwrap();
        assert!(b.contains(&rep.solve.minimizer));
        assert_relative_eq!(rep.estimated_maximum, 1.0 / 0.7, max_relative = 1e-15);

        let inv: Model = GposModel::from_rows(1.0, &[1.0], &[vec![-1.0]])
            .unwrap()
            .into();
        let rep = maximize_via_reciprocal(&inv, &b, &SolverOptions::default()).unwrap();
        assert_relative_eq!(rep.solve.minimizer[0], 2.0, max_relative = 1e-12);
        assert_relative_eq!(rep.estimated_maximum, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn box_validation() {
        assert!(BoxConstraints::new(vec![1.0], vec![0.0]).is_err());
        assert!(BoxConstraints::new(vec![0.0, 1.0], vec![1.0]).is_err());
        assert!(BoxConstraints::new(vec![f64::NAN], vec![1.0]).is_err());
        let b = BoxConstraints::around(&[10.0, 2.0], 0.1).unwrap();
        assert_relative_eq!(b.lower()[0], 9.0);
        assert_relative_eq!(b.upper()[1], 2.2);
    }
}
