//! Synthetic ground truth and brute-force oracles: seeded convex and
//! log-log-convex data generators, exhaustive grid minimization, and the
//! subgradient-sampling LSE approximator.

use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Space};
use crate::document::ModelDocument;
use crate::error::{Error, Result};
use crate::fit::stream_rng;
use crate::model::{GposModel, LseModel, MaxAffineModel, Model};
use crate::numeric::{dot, norm};
use crate::optimize::BoxConstraints;

/// Largest grid `grid_minimize` will enumerate.
pub const GRID_BUDGET: u64 = 200_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Family {
    /// `‖x‖²`
    Quadratic,
    /// `‖x‖`
    Norm,
    /// Random max-affine function with `terms` pieces.
    MaxAffine { terms: usize },
    /// Random LSE model with `terms` terms at `temperature`.
    Lse { terms: usize, temperature: f64 },
    /// Random posynomial with `terms` monomials (log-log data).
    Posynomial { terms: usize },
    /// A fixed model; GPOS models yield log-log data.
    Model { model: ModelDocument },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub family: Family,
    pub dim: usize,
    /// Standard deviation of additive noise (convex) or of the log-normal
    /// multiplicative noise (log-log).
    #[serde(default)]
    pub noise: f64,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
}

/// A concrete convex (or log-log-convex) function.
#[derive(Debug, Clone, PartialEq)]
pub enum GroundTruth {
    Quadratic,
    Norm,
    Model(Model),
}

impl GroundTruth {
    pub fn space(&self) -> Space {
        match self {
            GroundTruth::Model(Model::Gpos(_)) => Space::LogLog,
            _ => Space::Convex,
        }
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        match self {
            GroundTruth::Quadratic => Ok(dot(x, x)),
            GroundTruth::Norm => Ok(norm(x)),
            GroundTruth::Model(m) => m.predict(x),
        }
    }

    /// An element of the subdifferential at `x` (convex families only). The
    /// norm uses `0` at the origin.
    pub fn subgradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            GroundTruth::Quadratic => Ok(x.iter().map(|v| 2.0 * v).collect()),
            GroundTruth::Norm => {
                let r = norm(x);
                Ok(if r > 0.0 {
                    x.iter().map(|v| v / r).collect()
                } else {
                    vec![0.0; x.len()]
                })
            }
            GroundTruth::Model(Model::Lse(m)) => Ok(m.gradient(x)?.iter().copied().collect()),
            GroundTruth::Model(Model::MaxAffine(m)) => {
                let k = m.active_piece(x)?;
                Ok(m.exponents().row(k).iter().copied().collect())
            }
            GroundTruth::Model(Model::Gpos(_)) => Err(Error::input(
                "subgradients are defined for convex families only",
            )),
        }
    }
}

impl GeneratorSpec {
    pub fn new(family: Family, dim: usize, lower: f64, upper: f64, seed: u64) -> Self {
        Self {
            family,
            dim,
            noise: 0.0,
            lower: vec![lower; dim],
            upper: vec![upper; dim],
            seed,
        }
    }

    pub fn with_noise(mut self, noise: f64) -> Self {
        self.noise = noise;
        self
    }

    pub fn sampling_box(&self) -> Result<BoxConstraints> {
        let b = BoxConstraints::new(self.lower.clone(), self.upper.clone())?;
        Error::check_dim(self.dim, b.dim())?;
        Ok(b)
    }

    fn validate(&self) -> Result<BoxConstraints> {
        if self.dim == 0 {
            return Err(Error::input("generator dimension must be at least 1"));
        }
        if !(self.noise.is_finite() && self.noise >= 0.0) {
            return Err(Error::input("noise level must be nonnegative"));
        }
        self.sampling_box()
    }

    /// The function this spec samples from; random families are drawn from
    /// the seed.
    pub fn ground_truth(&self) -> Result<GroundTruth> {
        self.validate()?;
        let n = self.dim;
        let mut rng = stream_rng(self.seed, 1);
        let mut gauss = |scale: f64| -> f64 {
            let z: f64 = StandardNormal.sample(&mut rng);
            scale * z
        };
        Ok(match &self.family {
            Family::Quadratic => GroundTruth::Quadratic,
            Family::Norm => GroundTruth::Norm,
            Family::MaxAffine { terms } => {
                let rows: Vec<Vec<f64>> = (0..*terms)
                    .map(|_| (0..n).map(|_| gauss(1.0)).collect())
                    .collect();
                let offs: Vec<f64> = (0..*terms).map(|_| gauss(0.5)).collect();
                GroundTruth::Model(MaxAffineModel::from_rows(&rows, &offs)?.into())
            }
            Family::Lse { terms, temperature } => {
                let rows: Vec<Vec<f64>> = (0..*terms)
                    .map(|_| (0..n).map(|_| gauss(1.0)).collect())
                    .collect();
                let offs: Vec<f64> = (0..*terms).map(|_| gauss(0.5)).collect();
                GroundTruth::Model(LseModel::from_rows(*temperature, &rows, &offs)?.into())
            }
            Family::Posynomial { terms } => {
                let mut rng = stream_rng(self.seed, 1);
                let coeffs: Vec<f64> = (0..*terms).map(|_| rng.random_range(0.5..2.0)).collect();
                let rows: Vec<Vec<f64>> = (0..*terms)
                    .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
                    .collect();
                GroundTruth::Model(GposModel::from_rows(1.0, &coeffs, &rows)?.into())
            }
            Family::Model { model } => {
                let m = Model::try_from(model.clone())?;
                Error::check_dim(n, m.dim())?;
                GroundTruth::Model(m)
            }
        })
    }
}

/// Samples `m` points uniformly from the generator's box and labels them with the
/// ground truth plus noise. Deterministic in the seed.
pub fn generate_dataset(spec: &GeneratorSpec, m: usize) -> Result<Dataset> {
    if m == 0 {
        return Err(Error::input("need at least one sample"));
    }
    let bounds = spec.validate()?;
    let truth = spec.ground_truth()?;
    let space = truth.space();
    if space == Space::LogLog && bounds.lower().iter().any(|l| *l <= 0.0) {
        return Err(Error::input(
            "log-log families need a strictly positive sampling box",
        ));
    }
    let mut sample_rng = stream_rng(spec.seed, 2);
    let mut noise_rng = stream_rng(spec.seed, 3);
    let noise = Normal::new(0.0, spec.noise.max(0.0)).expect("validated noise");

    let mut inputs = Vec::with_capacity(m);
    let mut targets = Vec::with_capacity(m);
    for _ in 0..m {
        let x: Vec<f64> = bounds
            .lower()
            .iter()
            .zip(bounds.upper())
            .map(|(l, u)| {
                if l < u {
                    sample_rng.random_range(*l..*u)
                } else {
                    *l
                }
            })
            .collect();
        let clean = truth.value(&x)?;
        let eps = if spec.noise > 0.0 {
            noise.sample(&mut noise_rng)
        } else {
            0.0
        };
        targets.push(match space {
            Space::Convex => clean + eps,
            Space::LogLog => clean * eps.exp(),
        });
        inputs.push(x);
    }
    Dataset::new(inputs, targets, space)
}

/// The uniform grid with `per_axis` points per coordinate, in lexicographic
/// order (first coordinate slowest).
pub fn uniform_grid(bounds: &BoxConstraints, per_axis: usize) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::new();
    for_each_grid_point(bounds, per_axis, |x| out.push(x.to_vec()))?;
    Ok(out)
}

fn for_each_grid_point(
    bounds: &BoxConstraints,
    per_axis: usize,
    mut visit: impl FnMut(&[f64]),
) -> Result<()> {
    let n = bounds.dim();
    if per_axis < 2 {
        return Err(Error::input("grid needs at least 2 points per axis"));
    }
    let total = (per_axis as u64).checked_pow(n as u32).unwrap_or(u64::MAX);
    if n > 4 || total > GRID_BUDGET {
        return Err(Error::Capacity {
            required: total as u128,
            budget: GRID_BUDGET as u128,
        });
    }
    let coord = |j: usize, i: usize| -> f64 {
        let (l, u) = (bounds.lower()[j], bounds.upper()[j]);
        if i + 1 == per_axis {
            u
        } else {
            l + (u - l) * i as f64 / (per_axis - 1) as f64
        }
    };
    let mut idx = vec![0usize; n];
    let mut x: Vec<f64> = (0..n).map(|j| coord(j, 0)).collect();
    loop {
        visit(&x);
        // odometer increment, last coordinate fastest
        let mut j = n;
        loop {
            if j == 0 {
                return Ok(());
            }
            j -= 1;
            idx[j] += 1;
            if idx[j] < per_axis {
                x[j] = coord(j, idx[j]);
                break;
            }
            idx[j] = 0;
            x[j] = coord(j, 0);
        }
    }
}

/// Exhaustive minimization over the uniform grid. Ties keep the
/// lexicographically smallest grid index.
pub fn grid_minimize(
    f: impl Fn(&[f64]) -> f64,
    bounds: &BoxConstraints,
    per_axis: usize,
) -> Result<(Vec<f64>, f64)> {
    let mut best = f64::INFINITY;
    let mut arg = bounds.lower().to_vec();
    for_each_grid_point(bounds, per_axis, |x| {
        let v = f(x);
        if v < best {
            best = v;
            arg.copy_from_slice(x);
        }
    })?;
    Ok((arg, best))
}

fn check_samples(points: &[Vec<f64>], values: &[f64], subgradients: &[Vec<f64>]) -> Result<usize> {
    if points.is_empty() {
        return Err(Error::input("need at least one sample point"));
    }
    Error::check_dim(points.len(), values.len())?;
    Error::check_dim(points.len(), subgradients.len())?;
    let n = points[0].len();
    for (p, v) in points.iter().zip(subgradients) {
        Error::check_dim(n, p.len())?;
        Error::check_dim(n, v.len())?;
        if v.iter().any(|c| !c.is_finite()) {
            return Err(Error::input("subgradients must be finite"));
        }
    }
    Ok(n)
}

/// `f_j(x) = max_k (f(x_k) + ⟨v_k, x − x_k⟩)`: the supporting hyperplanes at
/// the samples. A pointwise minorant of `f` when the `v_k` are subgradients.
pub fn supporting_max_affine(
    points: &[Vec<f64>],
    values: &[f64],
    subgradients: &[Vec<f64>],
) -> Result<MaxAffineModel> {
    check_samples(points, values, subgradients)?;
    let offsets: Vec<f64> = points
        .iter()
        .zip(values)
        .zip(subgradients)
        .map(|((x, fx), v)| fx - dot(v, x))
        .collect();
    MaxAffineModel::from_rows(subgradients, &offsets)
}

/// The LSE smoothing of [`supporting_max_affine`] at temperature `T`, with
/// `f_j ≤ f_T ≤ f_j + T log j` everywhere.
pub fn build_subgradient_approximator(
    points: &[Vec<f64>],
    values: &[f64],
    subgradients: &[Vec<f64>],
    temperature: f64,
) -> Result<LseModel> {
    let ma = supporting_max_affine(points, values, subgradients)?;
    LseModel::new(temperature, ma.exponents().clone(), ma.offsets().clone())
}

/// Samples `truth` on a uniform grid and builds the approximator whose total
/// error budget is `epsilon`, i.e. `T = ε / (2 log j)` (any `T` when `j = 1`).
pub fn approximate_on_grid(
    truth: &GroundTruth,
    bounds: &BoxConstraints,
    per_axis: usize,
    epsilon: f64,
) -> Result<LseModel> {
    let points = uniform_grid(bounds, per_axis)?;
    let values = points
        .iter()
        .map(|x| truth.value(x))
        .collect::<Result<Vec<_>>>()?;
    let subgradients = points
        .iter()
        .map(|x| truth.subgradient(x))
        .collect::<Result<Vec<_>>>()?;
    let j = points.len() as f64;
    let t = epsilon / (2.0 * j.ln());
    build_subgradient_approximator(&points, &values, &subgradients, t)
}
