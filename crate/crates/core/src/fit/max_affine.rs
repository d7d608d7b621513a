//! Least-squares partition heuristic for max-affine fitting: alternate between
//! assigning each point to its active piece and refitting every piece by
//! least squares on its cell.

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{metrics_from_predictions, stream_rng, FitReport};
use crate::dataset::{Dataset, Space};
use crate::error::{Error, Result};
use crate::model::MaxAffineModel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MaxAffineConfig {
    pub terms: usize,
    pub seed: u64,
    pub restarts: usize,
    pub max_iterations: usize,
}

impl Default for MaxAffineConfig {
    fn default() -> Self {
        Self {
            terms: 3,
            seed: 0,
            restarts: 10,
            max_iterations: 100,
        }
    }
}

/// Fits `f̄(x) = max_k (β_k + ⟨α_k, x⟩)` to convex data, best of `restarts`
/// random initial partitions.
pub fn fit_max_affine(
    data: &Dataset,
    terms: usize,
    seed: u64,
    restarts: usize,
) -> Result<(MaxAffineModel, FitReport)> {
    fit_max_affine_with(
        data,
        &MaxAffineConfig {
            terms,
            seed,
            restarts,
            ..MaxAffineConfig::default()
        },
    )
}

pub fn fit_max_affine_with(
    data: &Dataset,
    config: &MaxAffineConfig,
) -> Result<(MaxAffineModel, FitReport)> {
    if data.space() != Space::Convex {
        return Err(Error::input("max-affine fitting needs convex-space data"));
    }
    if config.terms == 0 || config.restarts == 0 {
        return Err(Error::input("terms and restarts must be at least 1"));
    }
    if data.len() < config.terms {
        return Err(Error::input(format!(
            "need at least as many points ({}) as pieces ({})",
            data.len(),
            config.terms
        )));
    }

    let runs: Vec<Run> = (0..config.restarts)
        .into_par_iter()
        .map(|r| single_run(data, config, r))
        .collect();

    let restart_losses: Vec<f64> = runs.iter().map(|r| r.sse).collect();
    let (best_restart, best) = runs
        .into_iter()
        .enumerate()
        .min_by(|a, b| a.1.sse.total_cmp(&b.1.sse))
        .expect("at least one restart");

    let preds: Vec<f64> = data
        .inputs()
        .map(|x| best.model.eval_unchecked(x))
        .collect();
    let report = FitReport {
        final_loss: best.sse,
        iterations: best.iterations,
        best_restart,
        restart_losses,
        loss_trajectory: best.trajectory,
        metrics: metrics_from_predictions(&preds, data.targets()),
    };
    Ok((best.model, report))
}

struct Run {
    model: MaxAffineModel,
    sse: f64,
    iterations: usize,
    trajectory: Vec<f64>,
}

fn single_run(data: &Dataset, config: &MaxAffineConfig, restart: usize) -> Run {
    let k = config.terms;
    let m = data.len();
    let mut rng = stream_rng(config.seed, restart as u64);

    // Voronoi partition around k distinct random data points
    let centers: Vec<usize> = sample(&mut rng, m, k).into_vec();
    let mut assignment: Vec<usize> = data
        .inputs()
        .map(|x| {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (c, &idx) in centers.iter().enumerate() {
                let d: f64 = x
                    .iter()
                    .zip(data.input(idx))
                    .map(|(a, b)| (a - b).powi(2))
                    .sum();
                if d < best_d {
                    best_d = d;
                    best = c;
                }
            }
            best
        })
        .collect();

    let mut pieces: Vec<(Vec<f64>, f64)> = vec![(vec![0.0; data.dim()], 0.0); k];
    let mut best: Option<(MaxAffineModel, f64)> = None;
    let mut trajectory = Vec::new();
    let mut iterations = 0;

    for _ in 0..config.max_iterations {
        iterations += 1;
        reseed_empty_cells(data, &pieces, &mut assignment, k, iterations == 1);
        for (c, piece) in pieces.iter_mut().enumerate() {
            let cell: Vec<usize> = (0..m).filter(|&i| assignment[i] == c).collect();
            if !cell.is_empty() {
                *piece = affine_least_squares(data, &cell);
            }
        }
        let model = pieces_to_model(&pieces);
        let sse: f64 = data
            .inputs()
            .zip(data.targets())
            .map(|(x, y)| (model.eval_unchecked(x) - y).powi(2))
            .sum();
        trajectory.push(sse);
        let improved = best.as_ref().is_none_or(|(_, b)| sse < *b);
        let next: Vec<usize> = data
            .inputs()
            .map(|x| model.active_piece(x).expect("dimension checked"))
            .collect();
        if improved {
            best = Some((model, sse));
        }
        if next == assignment {
            break;
        }
        assignment = next;
    }

    let (model, sse) = best.expect("at least one iteration");
    Run {
        model,
        sse,
        iterations,
        trajectory,
    }
}

/// Moves the worst-fit points into any cell that lost all of its points.
fn reseed_empty_cells(
    data: &Dataset,
    pieces: &[(Vec<f64>, f64)],
    assignment: &mut [usize],
    k: usize,
    first: bool,
) {
    let mut sizes = vec![0usize; k];
    for &a in assignment.iter() {
        sizes[a] += 1;
    }
    if sizes.iter().all(|&s| s > 0) {
        return;
    }
    let m = data.len();
    let residual = |i: usize| -> f64 {
        if first {
            return 0.0;
        }
        let x = data.input(i);
        let fit = pieces
            .iter()
            .map(|(a, b)| a.iter().zip(x).map(|(p, q)| p * q).sum::<f64>() + b)
            .fold(f64::NEG_INFINITY, f64::max);
        (fit - data.targets()[i]).abs()
    };
    let mut order: Vec<(usize, f64)> = (0..m).map(|i| (i, residual(i))).collect();
    order.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));

    let take = (data.dim() + 1).min(m / k).max(1);
    let mut cursor = 0;
    for c in 0..k {
        if sizes[c] > 0 {
            continue;
        }
        let mut moved = 0;
        while moved < take && cursor < order.len() {
            let i = order[cursor].0;
            cursor += 1;
            // never empty another cell while filling this one
            if sizes[assignment[i]] > 1 {
                sizes[assignment[i]] -= 1;
                assignment[i] = c;
                sizes[c] += 1;
                moved += 1;
            }
        }
    }
}

fn pieces_to_model(pieces: &[(Vec<f64>, f64)]) -> MaxAffineModel {
    let rows: Vec<Vec<f64>> = pieces.iter().map(|p| p.0.clone()).collect();
    let offsets: Vec<f64> = pieces.iter().map(|p| p.1).collect();
    MaxAffineModel::from_rows(&rows, &offsets).expect("least-squares pieces are finite")
}

/// Least-squares affine fit `y ≈ ⟨a, x⟩ + b` over the rows in `cell`;
/// minimum-norm when the cell is too small to determine every coefficient.
pub(crate) fn affine_least_squares(data: &Dataset, cell: &[usize]) -> (Vec<f64>, f64) {
    let n = data.dim();
    let a = DMatrix::from_fn(cell.len(), n + 1, |r, c| {
        if c < n {
            data.input(cell[r])[c]
        } else {
            1.0
        }
    });
    let y = DVector::from_iterator(cell.len(), cell.iter().map(|&i| data.targets()[i]));
    let svd = a.svd(true, true);
    let theta = svd
        .solve(&y, 1e-12 * svd.singular_values.max().max(1.0))
        .expect("U and V were requested");
    let slope: Vec<f64> = theta.iter().take(n).copied().collect();
    let intercept = theta[n];
    if slope.iter().all(|v| v.is_finite()) && intercept.is_finite() {
        (slope, intercept)
    } else {
        let mean = y.mean();
        (vec![0.0; n], mean)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_data(f: impl Fn(&[f64]) -> f64, per_axis: usize) -> Dataset {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for i in 0..per_axis {
            for j in 0..per_axis {
                let x = vec![
                    -1.0 + 2.0 * i as f64 / (per_axis - 1) as f64,
                    -1.0 + 2.0 * j as f64 / (per_axis - 1) as f64,
                ];
                ys.push(f(&x));
                xs.push(x);
            }
        }
        Dataset::new(xs, ys, Space::Convex).unwrap()
    }

    #[test]
    fn affine_data_is_fit_exactly_for_any_k() {
        let data = grid_data(|x| 2.0 * x[0] - x[1] + 0.5, 8);
        for k in [1, 3, 6] {
            let (_, rep) = fit_max_affine(&data, k, 7, 3).unwrap();
            assert!(rep.metrics.max_abs < 1e-10, "k={k}: {:?}", rep.metrics);
        }
    }

    #[test]
    fn three_pieces_recovered() {
        let f = |x: &[f64]| {
            (x[0] + x[1])
                .max(-x[0] + 0.5)
                .max(0.3 * x[1] - 0.2 - x[0] * 2.0)
        };
        let data = grid_data(f, 17);
        let (model, rep) = fit_max_affine(&data, 3, 1, 10).unwrap();
        assert_eq!(model.terms(), 3);
        assert!(rep.final_loss / data.len() as f64 <= 1e-10, "{rep:?}");
        assert_eq!(rep.restart_losses.len(), 10);
    }

    #[test]
    fn rejects_too_few_points() {
        let data = grid_data(|x| x[0], 2);
        assert!(fit_max_affine(&data, 5, 0, 1).is_err());
    }

    #[test]
    fn deterministic_for_a_seed() {
        let data = grid_data(|x| x[0] * x[0] + x[1] * x[1], 9);
        let a = fit_max_affine(&data, 4, 3, 4).unwrap();
        let b = fit_max_affine(&data, 4, 3, 4).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
    }
}
