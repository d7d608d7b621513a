//! Exact structural transforms between model parameterizations.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::{GposModel, LseModel};

/// Default cap on the number of terms `reduce_temperature` may produce.
pub const DEFAULT_TERM_BUDGET: usize = 100_000;

/// A unit-temperature model together with the input/output scale that maps it
/// back: `f_T(x) = scale · unit(x / scale)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rescaled {
    pub unit: LseModel,
    pub scale: f64,
}

impl Rescaled {
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        let scaled: Vec<f64> = x.iter().map(|v| v / self.scale).collect();
        Ok(self.scale * self.unit.eval(&scaled)?)
    }
}

/// Rewrites `f_T^{(α,β)}` as `T · f_1^{(α,β/T)}(x/T)`.
pub fn rescale_temperature(model: &LseModel) -> Rescaled {
    let t = model.temperature();
    let unit = LseModel::new(1.0, model.exponents().clone(), model.offsets() / t)
        .expect("dividing finite offsets by a positive temperature keeps them finite");
    Rescaled { unit, scale: t }
}

/// Number of multisets of size `p` drawn from `k` kinds, `C(k+p-1, p)`,
/// or `None` once it passes `cap`.
pub fn multiset_count(k: usize, p: usize, cap: u128) -> Option<u128> {
    // C(k+p-1, p) = Π_{i=1..p} (k-1+i)/i, exact at every step
    let mut acc: u128 = 1;
    for i in 1..=p as u128 {
        acc = acc.checked_mul(k as u128 - 1 + i)? / i;
        if acc > cap {
            return None;
        }
    }
    Some(acc)
}

/// Re-expresses `model` at temperature `T/p` by expanding the `p`-th power of
/// its exponential sum. The result has `C(K+p-1, p)` terms and evaluates to
/// the same function.
pub fn reduce_temperature(model: &LseModel, p: usize, term_budget: usize) -> Result<LseModel> {
    if p == 0 {
        return Err(Error::input("reduction factor p must be at least 1"));
    }
    let k = model.terms();
    let n = model.dim();
    let count = multiset_count(k, p, term_budget as u128).ok_or(Error::Capacity {
        required: multiset_count(k, p, u128::MAX).unwrap_or(u128::MAX),
        budget: term_budget as u128,
    })? as usize;

    let new_t = model.temperature() / p as f64;
    let ln_fact: Vec<f64> = std::iter::once(0.0)
        .chain((1..=p).scan(0.0, |acc, i| {
            *acc += (i as f64).ln();
            Some(*acc)
        }))
        .collect();

    let mut exponents = DMatrix::zeros(count, n);
    let mut offsets = DVector::zeros(count);
    let mut counts = vec![0usize; k];
    counts[0] = p;
    let mut row = 0;
    loop {
        let ln_multinomial = ln_fact[p] - counts.iter().map(|&c| ln_fact[c]).sum::<f64>();
        let mut beta = 0.0;
        for (j, &c) in counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let weight = c as f64 / p as f64;
            beta += weight * model.offsets()[j];
            for i in 0..n {
                exponents[(row, i)] += weight * model.exponents()[(j, i)];
            }
        }
        offsets[row] = beta + new_t * ln_multinomial;
        row += 1;
        if !next_composition(&mut counts) {
            break;
        }
    }
    debug_assert_eq!(row, count);
    LseModel::new(new_t, exponents, offsets)
}

/// Steps through all compositions of `p` into `counts.len()` nonnegative
/// parts in reverse lexicographic order, starting from `[p, 0, .., 0]`.
fn next_composition(counts: &mut [usize]) -> bool {
    let k = counts.len();
    // rightmost movable unit, ignoring the last slot
    let Some(j) = (0..k.saturating_sub(1)).rev().find(|&j| counts[j] > 0) else {
        return false;
    };
    let tail = counts[k - 1];
    counts[k - 1] = 0;
    counts[j] -= 1;
    counts[j + 1] = tail + 1;
    true
}

/// Maps `f ∈ LSE_T` to `ψ_T = exp ∘ f ∘ log`: same exponents and temperature,
/// `c_k = exp(β_k / T)`.
pub fn lse_to_gpos(model: &LseModel) -> Result<GposModel> {
    let t = model.temperature();
    let mut coeffs = DVector::zeros(model.terms());
    for (k, beta) in model.offsets().iter().enumerate() {
        let c = (beta / t).exp();
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::Range {
                index: k,
                message: format!("exp(β/T) = exp({}) is not representable", beta / t),
            });
        }
        coeffs[k] = c;
    }
    GposModel::new(t, coeffs, model.exponents().clone())
}

/// Inverse of [`lse_to_gpos`]: `β_k = T log c_k`.
pub fn gpos_to_lse(model: &GposModel) -> LseModel {
    let t = model.temperature();
    let offsets = model.coefficients().map(|c| t * c.ln());
    LseModel::new(t, model.exponents().clone(), offsets)
        .expect("positive coefficients map to finite offsets")
}

impl LseModel {
    pub fn to_gpos(&self) -> Result<GposModel> {
        lse_to_gpos(self)
    }
}

impl GposModel {
    pub fn to_lse(&self) -> LseModel {
        gpos_to_lse(self)
    }
}
