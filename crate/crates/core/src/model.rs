//! The three model classes: scaled log-sum-exp, max-affine, and generalized
//! posynomial. All are immutable once constructed.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::numeric::{log_sum_exp, softmax_into};

fn check_exponents(exponents: &DMatrix<f64>) -> Result<()> {
    if exponents.nrows() == 0 {
        return Err(Error::input("model needs at least one term"));
    }
    if exponents.ncols() == 0 {
        return Err(Error::input("model needs at least one input dimension"));
    }
    if let Some(i) = exponents.iter().position(|v| !v.is_finite()) {
        return Err(Error::Range {
            index: i % exponents.nrows(),
            message: "non-finite exponent".into(),
        });
    }
    Ok(())
}

fn check_temperature(temperature: f64) -> Result<()> {
    if temperature.is_finite() && temperature > 0.0 {
        Ok(())
    } else {
        Err(Error::input(format!(
            "temperature must be positive and finite, got {temperature}"
        )))
    }
}

fn check_offsets(offsets: &DVector<f64>, terms: usize) -> Result<()> {
    Error::check_dim(terms, offsets.len())?;
    if let Some(i) = offsets.iter().position(|v| !v.is_finite()) {
        return Err(Error::Range {
            index: i,
            message: "non-finite offset".into(),
        });
    }
    Ok(())
}

pub(crate) fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let k = rows.len();
    if k == 0 {
        return Err(Error::input("model needs at least one term"));
    }
    let n = rows[0].len();
    for row in rows {
        Error::check_dim(n, row.len())?;
    }
    Ok(DMatrix::from_fn(k, n, |i, j| rows[i][j]))
}

pub(crate) fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// `⟨α_k, x⟩` for row `k`; `x` must already have the right length.
#[inline]
fn row_dot(exponents: &DMatrix<f64>, k: usize, x: &[f64]) -> f64 {
    exponents.row(k).iter().zip(x).map(|(a, b)| a * b).sum()
}

/// `f_T(x) = T log Σ_k exp((⟨α_k, x⟩ + β_k) / T)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LseModel {
    temperature: f64,
    exponents: DMatrix<f64>,
    offsets: DVector<f64>,
}

impl LseModel {
    pub fn new(temperature: f64, exponents: DMatrix<f64>, offsets: DVector<f64>) -> Result<Self> {
        check_temperature(temperature)?;
        check_exponents(&exponents)?;
        check_offsets(&offsets, exponents.nrows())?;
        Ok(Self {
            temperature,
            exponents,
            offsets,
        })
    }

    /// Builds a model from exponent rows `α_k` and offsets `β_k`.
    pub fn from_rows(temperature: f64, rows: &[Vec<f64>], offsets: &[f64]) -> Result<Self> {
        Self::new(
            temperature,
            matrix_from_rows(rows)?,
            DVector::from_column_slice(offsets),
        )
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn exponents(&self) -> &DMatrix<f64> {
        &self.exponents
    }

    pub fn offsets(&self) -> &DVector<f64> {
        &self.offsets
    }

    /// Number of terms `K`.
    pub fn terms(&self) -> usize {
        self.exponents.nrows()
    }

    /// Input dimension `n`.
    pub fn dim(&self) -> usize {
        self.exponents.ncols()
    }

    /// Affine scores `⟨α_k, x⟩ + β_k`, one per term.
    pub fn affine_scores(&self, x: &[f64]) -> Result<Vec<f64>> {
        Error::check_dim(self.dim(), x.len())?;
        Ok(self.scores_unchecked(x))
    }

    fn scores_unchecked(&self, x: &[f64]) -> Vec<f64> {
        (0..self.terms())
            .map(|k| row_dot(&self.exponents, k, x) + self.offsets[k])
            .collect()
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        Error::check_dim(self.dim(), x.len())?;
        Ok(self.eval_unchecked(x))
    }

    /// Evaluation without the dimension check, for tight loops.
    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        let t = self.temperature;
        let mut max = f64::NEG_INFINITY;
        let mut arg = 0;
        for k in 0..self.terms() {
            let s = row_dot(&self.exponents, k, x) + self.offsets[k];
            if s > max {
                max = s;
                arg = k;
            }
        }
        // the maximal term contributes exactly 1; ln_1p keeps the rest
        let mut rest = 0.0;
        for k in (0..self.terms()).filter(|&k| k != arg) {
            rest += ((row_dot(&self.exponents, k, x) + self.offsets[k] - max) / t).exp();
        }
        max + t * rest.ln_1p()
    }

    /// Softmax weights `w = softmax((αx + β)/T)`.
    pub fn weights(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut scores = self.affine_scores(x)?;
        for s in &mut scores {
            *s /= self.temperature;
        }
        let mut w = vec![0.0; scores.len()];
        softmax_into(&scores, &mut w);
        Ok(w)
    }

    /// `∇f_T(x) = Σ_k w_k α_k`, a convex combination of the exponent rows.
    pub fn gradient(&self, x: &[f64]) -> Result<DVector<f64>> {
        let w = self.weights(x)?;
        Ok(self.exponents.tr_mul(&DVector::from_vec(w)))
    }

    /// `∇²f_T(x) = Cov_w(α) / T`, the softmax-weighted covariance of the
    /// exponent rows. Symmetric positive semidefinite.
    pub fn hessian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let w = self.weights(x)?;
        let n = self.dim();
        let mean = self.exponents.tr_mul(&DVector::from_column_slice(&w));
        let mut h = DMatrix::zeros(n, n);
        for (k, wk) in w.iter().enumerate() {
            let d = self.exponents.row(k).transpose() - &mean;
            h.ger(*wk, &d, &d, 1.0);
        }
        h /= self.temperature;
        let sym = (&h + h.transpose()) * 0.5;
        Ok(sym)
    }

    /// The `T → 0` limit with the same `(α, β)`.
    pub fn skeleton(&self) -> MaxAffineModel {
        MaxAffineModel {
            exponents: self.exponents.clone(),
            offsets: self.offsets.clone(),
        }
    }

    /// Same exponents and offsets at a different temperature.
    pub fn with_temperature(&self, temperature: f64) -> Result<Self> {
        Self::new(temperature, self.exponents.clone(), self.offsets.clone())
    }
}

/// `f̄(x) = max_k (β_k + ⟨α_k, x⟩)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxAffineModel {
    exponents: DMatrix<f64>,
    offsets: DVector<f64>,
}

impl MaxAffineModel {
    pub fn new(exponents: DMatrix<f64>, offsets: DVector<f64>) -> Result<Self> {
        check_exponents(&exponents)?;
        check_offsets(&offsets, exponents.nrows())?;
        Ok(Self { exponents, offsets })
    }

    pub fn from_rows(rows: &[Vec<f64>], offsets: &[f64]) -> Result<Self> {
        Self::new(matrix_from_rows(rows)?, DVector::from_column_slice(offsets))
    }

    pub fn exponents(&self) -> &DMatrix<f64> {
        &self.exponents
    }

    pub fn offsets(&self) -> &DVector<f64> {
        &self.offsets
    }

    pub fn terms(&self) -> usize {
        self.exponents.nrows()
    }

    pub fn dim(&self) -> usize {
        self.exponents.ncols()
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        Error::check_dim(self.dim(), x.len())?;
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        (0..self.terms())
            .map(|k| row_dot(&self.exponents, k, x) + self.offsets[k])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Index of the active piece at `x`; ties go to the lowest index.
    pub fn active_piece(&self, x: &[f64]) -> Result<usize> {
        Error::check_dim(self.dim(), x.len())?;
        let mut best = 0;
        let mut best_val = f64::NEG_INFINITY;
        for k in 0..self.terms() {
            let v = row_dot(&self.exponents, k, x) + self.offsets[k];
            if v > best_val {
                best_val = v;
                best = k;
            }
        }
        Ok(best)
    }
}

/// Generalized posynomial `ψ_T(z) = (Σ_k c_k Π_i z_i^{α_ki / T})^T` on the
/// positive orthant.
#[derive(Debug, Clone, PartialEq)]
pub struct GposModel {
    temperature: f64,
    coefficients: DVector<f64>,
    exponents: DMatrix<f64>,
}

impl GposModel {
    pub fn new(
        temperature: f64,
        coefficients: DVector<f64>,
        exponents: DMatrix<f64>,
    ) -> Result<Self> {
        check_temperature(temperature)?;
        check_exponents(&exponents)?;
        Error::check_dim(exponents.nrows(), coefficients.len())?;
        if let Some(i) = coefficients
            .iter()
            .position(|c| !(c.is_finite() && *c > 0.0))
        {
            return Err(Error::input(format!(
                "coefficient {i} must be positive and finite, got {}",
                coefficients[i]
            )));
        }
        Ok(Self {
            temperature,
            coefficients,
            exponents,
        })
    }

    pub fn from_rows(temperature: f64, coefficients: &[f64], rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(
            temperature,
            DVector::from_column_slice(coefficients),
            matrix_from_rows(rows)?,
        )
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn coefficients(&self) -> &DVector<f64> {
        &self.coefficients
    }

    pub fn exponents(&self) -> &DMatrix<f64> {
        &self.exponents
    }

    pub fn terms(&self) -> usize {
        self.exponents.nrows()
    }

    pub fn dim(&self) -> usize {
        self.exponents.ncols()
    }

    /// `log ψ_T(z)`, computed entirely in log space.
    pub fn log_eval(&self, z: &[f64]) -> Result<f64> {
        Error::check_dim(self.dim(), z.len())?;
        if let Some(i) = z.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Domain(format!(
                "coordinate {i} must be strictly positive, got {}",
                z[i]
            )));
        }
        let q: Vec<f64> = z.iter().map(|v| v.ln()).collect();
        Ok(self.log_eval_at_log(&q))
    }

    /// `log ψ_T(exp q)` for an already log-transformed point.
    pub(crate) fn log_eval_at_log(&self, q: &[f64]) -> f64 {
        let t = self.temperature;
        let scores: Vec<f64> = (0..self.terms())
            .map(|k| self.coefficients[k].ln() + row_dot(&self.exponents, k, q) / t)
            .collect();
        t * log_sum_exp(&scores)
    }

    pub fn eval(&self, z: &[f64]) -> Result<f64> {
        self.log_eval(z).map(f64::exp)
    }
}

/// Any of the three model classes, as read from or written to a model document.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Lse(LseModel),
    Gpos(GposModel),
    MaxAffine(MaxAffineModel),
}

impl Model {
    pub fn dim(&self) -> usize {
        match self {
            Model::Lse(m) => m.dim(),
            Model::Gpos(m) => m.dim(),
            Model::MaxAffine(m) => m.dim(),
        }
    }

    pub fn terms(&self) -> usize {
        match self {
            Model::Lse(m) => m.terms(),
            Model::Gpos(m) => m.terms(),
            Model::MaxAffine(m) => m.terms(),
        }
    }

    /// Prediction in the model's own space: `x` for LSE / max-affine, `z > 0`
    /// for GPOS.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        match self {
            Model::Lse(m) => m.eval(x),
            Model::Gpos(m) => m.eval(x),
            Model::MaxAffine(m) => m.eval(x),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Model::Lse(_) => "lse",
            Model::Gpos(_) => "gpos",
            Model::MaxAffine(_) => "maxaffine",
        }
    }
}

impl From<LseModel> for Model {
    fn from(m: LseModel) -> Self {
        Model::Lse(m)
    }
}

impl From<GposModel> for Model {
    fn from(m: GposModel) -> Self {
        Model::Gpos(m)
    }
}

impl From<MaxAffineModel> for Model {
    fn from(m: MaxAffineModel) -> Self {
        Model::MaxAffine(m)
    }
}
