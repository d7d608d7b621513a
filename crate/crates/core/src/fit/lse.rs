//! LSE training by full-batch preconditioned gradient descent with momentum
//! and Armijo backtracking.
//!
//! Fitting at temperature `T` is done on the pre-scaled data `(x/T, y/T)`
//! with a unit-temperature model; the result is mapped back with
//! `f_T^{(α,β)}(x) = T f_1^{(α,β/T)}(x/T)`, so `β = T β₁`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use super::max_affine::{affine_least_squares, fit_max_affine};
use super::{metrics_from_predictions, stream_rng, FitConfig, FitReport};
use crate::dataset::{Dataset, Space};
use crate::error::{Error, Result};
use crate::model::{GposModel, LseModel, MaxAffineModel};
use crate::transform::lse_to_gpos;

/// Warm start: the same pieces as an LSE model at temperature `T`.
pub fn init_lse_from_max_affine(ma: &MaxAffineModel, temperature: f64) -> Result<LseModel> {
    LseModel::new(temperature, ma.exponents().clone(), ma.offsets().clone())
}

/// Packed parameters: `K·n` exponent entries (row-major) followed by `K` offsets.
#[derive(Debug, Clone, PartialEq)]
struct Params {
    terms: usize,
    dim: usize,
    values: Vec<f64>,
}

impl Params {
    fn from_model(model: &LseModel) -> Self {
        let (k, n) = (model.terms(), model.dim());
        let mut values = Vec::with_capacity(k * (n + 1));
        for r in 0..k {
            values.extend(model.exponents().row(r).iter());
        }
        values.extend(model.offsets().iter());
        Self {
            terms: k,
            dim: n,
            values,
        }
    }

    fn alpha(&self, k: usize) -> &[f64] {
        &self.values[k * self.dim..(k + 1) * self.dim]
    }

    fn beta(&self, k: usize) -> f64 {
        self.values[self.terms * self.dim + k]
    }

    fn to_model(&self, temperature: f64) -> Result<LseModel> {
        let (k, n) = (self.terms, self.dim);
        let exps = DMatrix::from_fn(k, n, |r, c| self.values[r * n + c]);
        let offs = DVector::from_iterator(k, self.values[k * n..].iter().copied());
        LseModel::new(temperature, exps, offs)
    }
}

/// Squared-error loss of a unit-temperature model plus the ridge term, and
/// its gradient in the packed layout.
struct Objective<'a> {
    data: &'a Dataset,
    ridge: f64,
}

impl Objective<'_> {
    fn loss(&self, p: &Params) -> f64 {
        self.evaluate(p, None)
    }

    fn loss_grad(&self, p: &Params, grad: &mut [f64]) -> f64 {
        self.evaluate(p, Some(grad))
    }

    fn evaluate(&self, p: &Params, mut grad: Option<&mut [f64]>) -> f64 {
        let (k, n) = (p.terms, p.dim);
        if let Some(g) = grad.as_deref_mut() {
            g.iter_mut().for_each(|v| *v = 0.0);
        }
        let mut scores = vec![0.0; k];
        let mut total = 0.0;
        for (x, y) in self.data.inputs().zip(self.data.targets()) {
            let mut max = f64::NEG_INFINITY;
            for (j, s) in scores.iter_mut().enumerate() {
                *s = p.alpha(j).iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + p.beta(j);
                max = max.max(*s);
            }
            let mut sum = 0.0;
            for s in scores.iter_mut() {
                *s = (*s - max).exp();
                sum += *s;
            }
            let residual = max + sum.ln() - y;
            total += residual * residual;
            if let Some(g) = grad.as_deref_mut() {
                for (j, e) in scores.iter().enumerate() {
                    let coef = 2.0 * residual * e / sum;
                    g[k * n + j] += coef;
                    for (gi, xi) in g[j * n..(j + 1) * n].iter_mut().zip(x) {
                        *gi += coef * xi;
                    }
                }
            }
        }
        if self.ridge > 0.0 {
            total += self.ridge * p.values[..k * n].iter().map(|v| v * v).sum::<f64>();
            if let Some(g) = grad {
                for (gi, v) in g[..k * n].iter_mut().zip(&p.values[..k * n]) {
                    *gi += 2.0 * self.ridge * v;
                }
            }
        }
        total
    }
}

/// Loss `Σ (f(x_i) − y_i)² + λ‖α‖²_F` of `model` on `data` and its gradient
/// with respect to `(α, β)`, as `(loss, ∂L/∂α (K×n), ∂L/∂β)`. The model is
/// evaluated at its own temperature.
pub fn loss_and_gradient(
    model: &LseModel,
    data: &Dataset,
    ridge: f64,
) -> Result<(f64, DMatrix<f64>, DVector<f64>)> {
    Error::check_dim(model.dim(), data.dim())?;
    let t = model.temperature();
    // f_T(x) = T f_1(x/T) with offsets β/T, so gradients pick up the chain rule
    let unit = LseModel::new(1.0, model.exponents().clone(), model.offsets() / t)?;
    let scaled = data.scaled_down(t);
    let p = Params::from_model(&unit);
    let mut g = vec![0.0; p.values.len()];
    let obj = Objective {
        data: &scaled,
        ridge: 0.0,
    };
    let loss_scaled = obj.loss_grad(&p, &mut g);
    let (k, n) = (p.terms, p.dim);
    // L = T² L₁(α, β/T) ; ∂L/∂α = T² ∂L₁/∂α ; ∂L/∂β = T ∂L₁/∂β₁
    let mut ga = DMatrix::from_fn(k, n, |r, c| t * t * g[r * n + c]);
    let gb = DVector::from_iterator(k, g[k * n..].iter().map(|v| t * v));
    let mut loss = t * t * loss_scaled;
    if ridge > 0.0 {
        loss += ridge * model.exponents().norm_squared();
        ga += model.exponents() * (2.0 * ridge);
    }
    Ok((loss, ga, gb))
}

struct Descent {
    params: Params,
    loss: f64,
    iterations: usize,
    trajectory: Vec<f64>,
}

fn descend(
    obj: &Objective,
    start: Params,
    config: &FitConfig,
    precond: &[f64],
    restart: usize,
) -> Result<Descent> {
    let mut params = start;
    let len = params.values.len();
    let mut grad = vec![0.0; len];
    let mut loss = obj.loss_grad(&params, &mut grad);
    if !loss.is_finite() {
        return Err(Error::Diverged { restart });
    }
    let mut trajectory = vec![loss];
    let mut prev_dir = vec![0.0; len];
    let mut dir = vec![0.0; len];
    let mut step = config
        .initial_step
        .unwrap_or(1.0 / (2.0 * obj.data.len() as f64));
    let mut stalled = 0;
    let mut iterations = 0;
    let mut cand = params.clone();

    while iterations < config.max_iterations && loss > 0.0 {
        let mut slope = 0.0;
        for i in 0..len {
            dir[i] = -precond[i] * grad[i] + config.momentum * prev_dir[i];
            slope += grad[i] * dir[i];
        }
        if slope >= 0.0 {
            slope = 0.0;
            for i in 0..len {
                dir[i] = -precond[i] * grad[i];
                slope += grad[i] * dir[i];
            }
        }
        if slope >= 0.0 {
            break;
        }

        let mut trial = step;
        let mut accepted = None;
        for _ in 0..60 {
            for ((c, p), d) in cand.values.iter_mut().zip(&params.values).zip(&dir) {
                *c = p + trial * d;
            }
            let l = obj.loss(&cand);
            if l.is_finite() && l <= loss + config.armijo * trial * slope {
                accepted = Some(l);
                break;
            }
            trial *= config.backtrack;
        }
        let Some(new_loss) = accepted else {
            // momentum direction failed; retry plain preconditioned gradient once
            if prev_dir.iter().any(|v| *v != 0.0) {
                prev_dir.iter_mut().for_each(|v| *v = 0.0);
                continue;
            }
            break;
        };

        std::mem::swap(&mut params, &mut cand);
        prev_dir.copy_from_slice(&dir);
        let decrease = loss - new_loss;
        loss = obj.loss_grad(&params, &mut grad);
        debug_assert_eq!(loss, new_loss);
        trajectory.push(loss);
        iterations += 1;
        step = (trial / config.backtrack).min(1e12);

        if decrease <= config.tolerance * loss.max(f64::MIN_POSITIVE) {
            stalled += 1;
            if stalled >= config.patience {
                break;
            }
        } else {
            stalled = 0;
        }
    }

    Ok(Descent {
        params,
        loss,
        iterations,
        trajectory,
    })
}

/// Diagonal scaling that evens out the curvature of exponent and offset
/// coordinates: entry `(k, j)` of the exponents gets `1 / mean_i x_ij²`.
fn preconditioner(data: &Dataset, terms: usize) -> Vec<f64> {
    let n = data.dim();
    let m = data.len() as f64;
    let mut second_moment = vec![0.0; n];
    for x in data.inputs() {
        for (s, v) in second_moment.iter_mut().zip(x) {
            *s += v * v / m;
        }
    }
    let mut p = Vec::with_capacity(terms * (n + 1));
    for _ in 0..terms {
        p.extend(second_moment.iter().map(|s| 1.0 / s.max(1e-8)));
    }
    p.extend(std::iter::repeat_n(1.0, terms));
    p
}

/// Random initial parameters for restart `restart`, on the pre-scaled data.
fn random_start(data: &Dataset, terms: usize, seed: u64, restart: usize) -> Params {
    let n = data.dim();
    let m = data.len();
    let all: Vec<usize> = (0..m).collect();
    let (slope, _) = affine_least_squares(data, &all);

    let ys = data.targets();
    let y_mean = ys.iter().sum::<f64>() / m as f64;
    let y_std = (ys.iter().map(|y| (y - y_mean).powi(2)).sum::<f64>() / m as f64).sqrt();
    let x_std = (0..n)
        .map(|j| {
            let mean = data.inputs().map(|x| x[j]).sum::<f64>() / m as f64;
            (data.inputs().map(|x| (x[j] - mean).powi(2)).sum::<f64>() / m as f64).sqrt()
        })
        .sum::<f64>()
        / n as f64;
    let spread = if x_std > 0.0 && y_std > 0.0 {
        y_std / x_std
    } else {
        1.0
    };

    let mut rng = stream_rng(seed, 1_000 + restart as u64);
    let normal = Normal::new(0.0, 0.5 * spread).expect("positive spread");
    let mut alphas = Vec::with_capacity(terms * n);
    for _ in 0..terms {
        alphas.extend(slope.iter().map(|a| a + normal.sample(&mut rng)));
    }
    let mut betas = Vec::with_capacity(terms);
    for k in 0..terms {
        let alpha = &alphas[k * n..(k + 1) * n];
        let mut resid: Vec<f64> = data
            .inputs()
            .zip(ys)
            .map(|(x, y)| y - alpha.iter().zip(x).map(|(a, b)| a * b).sum::<f64>())
            .collect();
        resid.sort_by(f64::total_cmp);
        let level = (k + 1) as f64 / (terms + 1) as f64;
        let jitter: f64 = rng.random_range(-0.5..0.5) / (terms + 1) as f64;
        let idx = (((level + jitter) * (m - 1) as f64).round() as usize).min(m - 1);
        betas.push(resid[idx]);
    }
    alphas.extend(betas);
    Params {
        terms,
        dim: n,
        values: alphas,
    }
}

/// Fits an LSE model of `config.terms` terms at `config.temperature` to convex
/// data. Returns the best of `config.restarts` runs.
pub fn fit_lse(data: &Dataset, config: &FitConfig) -> Result<(LseModel, FitReport)> {
    config.validate()?;
    if data.space() != Space::Convex {
        return Err(Error::input(
            "fit_lse needs convex-space data; use fit_gpos for log-log data",
        ));
    }
    if data.len() < config.terms {
        log::warn!(
            "fitting {} terms to only {} points; the fit is underdetermined",
            config.terms,
            data.len()
        );
    }
    let t = config.temperature;
    let scaled = data.scaled_down(t);
    let obj = Objective {
        data: &scaled,
        ridge: config.regularization,
    };
    let precond = preconditioner(&scaled, config.terms);

    let runs: Vec<Result<Descent>> = (0..config.restarts)
        .into_par_iter()
        .map(|r| {
            let start = if r == 0 && config.warm_start && scaled.len() >= config.terms {
                let (ma, _) =
                    fit_max_affine(&scaled, config.terms, config.seed, config.restarts.min(10))?;
                Params::from_model(&init_lse_from_max_affine(&ma, 1.0)?)
            } else {
                random_start(&scaled, config.terms, config.seed, r)
            };
            descend(&obj, start, config, &precond, r)
        })
        .collect();
    let runs: Vec<Descent> = runs.into_iter().collect::<Result<_>>()?;

    let t2 = t * t;
    let restart_losses: Vec<f64> = runs.iter().map(|d| t2 * d.loss).collect();
    let (best_restart, best) = runs
        .into_iter()
        .enumerate()
        .min_by(|a, b| a.1.loss.total_cmp(&b.1.loss))
        .expect("at least one restart");

    let unit = best.params.to_model(1.0)?;
    let model = LseModel::new(t, unit.exponents().clone(), unit.offsets() * t)?;
    let preds: Vec<f64> = data.inputs().map(|x| model.eval_unchecked(x)).collect();
    let report = FitReport {
        final_loss: t2 * best.loss,
        iterations: best.iterations,
        best_restart,
        restart_losses,
        loss_trajectory: best.trajectory.iter().map(|l| t2 * l).collect(),
        metrics: metrics_from_predictions(&preds, data.targets()),
    };
    Ok((model, report))
}

/// Fits a GPOS model to log-log data: log-transform, [`fit_lse`], map back.
/// Report metrics are measured on the original positive data.
pub fn fit_gpos(data: &Dataset, config: &FitConfig) -> Result<(GposModel, FitReport)> {
    if data.space() != Space::LogLog {
        return Err(Error::input("fit_gpos needs log-log data"));
    }
    let logged = data.log_transform()?;
    let (lse, mut report) = fit_lse(&logged, config)?;
    let gpos = lse_to_gpos(&lse)?;
    let preds = data
        .inputs()
        .map(|z| gpos.eval(z))
        .collect::<Result<Vec<_>>>()?;
    report.metrics = metrics_from_predictions(&preds, data.targets());
    Ok((gpos, report))
}
