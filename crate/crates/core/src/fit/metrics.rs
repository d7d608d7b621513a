use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Space};
use crate::error::{Error, Result};
use crate::model::Model;

/// Absolute and relative prediction errors. Relative errors use the
/// `min(|pred|, |target|)` denominator; points where it is zero are counted in
/// `undefined_relative` and left out of the relative statistics.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Metrics {
    pub mean_abs: f64,
    pub max_abs: f64,
    pub mean_rel: f64,
    pub max_rel: f64,
    pub undefined_relative: usize,
}

pub fn metrics_from_predictions(predictions: &[f64], targets: &[f64]) -> Metrics {
    debug_assert_eq!(predictions.len(), targets.len());
    let mut m = Metrics::default();
    let mut rel_count = 0usize;
    for (p, t) in predictions.iter().zip(targets) {
        let abs = (p - t).abs();
        m.mean_abs += abs;
        m.max_abs = m.max_abs.max(abs);
        let denom = p.abs().min(t.abs());
        if denom > 0.0 {
            let rel = abs / denom;
            m.mean_rel += rel;
            m.max_rel = m.max_rel.max(rel);
            rel_count += 1;
        } else {
            m.undefined_relative += 1;
        }
    }
    if !predictions.is_empty() {
        m.mean_abs /= predictions.len() as f64;
    }
    if rel_count > 0 {
        m.mean_rel /= rel_count as f64;
    }
    m
}

/// Relative error implied by an absolute error `ε` in log space: if
/// `|log p − log t| ≤ ε` then `|p − t| / min(p, t) ≤ exp(ε) − 1`, with
/// equality when the log error equals `ε`.
pub fn relative_error_bound(log_error: f64) -> f64 {
    log_error.exp_m1()
}

/// Errors of `model` on `data`. LSE and max-affine models pair with convex
/// data, GPOS models with log-log data.
pub fn compute_metrics(model: &Model, data: &Dataset) -> Result<Metrics> {
    let compatible = matches!(
        (model, data.space()),
        (Model::Gpos(_), Space::LogLog) | (Model::Lse(_) | Model::MaxAffine(_), Space::Convex)
    );
    if !compatible {
        return Err(Error::input(format!(
            "{} model cannot be scored on {:?} data",
            model.kind(),
            data.space()
        )));
    }
    Error::check_dim(model.dim(), data.dim())?;
    let preds = data
        .inputs()
        .map(|x| model.predict(x))
        .collect::<Result<Vec<_>>>()?;
    Ok(metrics_from_predictions(&preds, data.targets()))
}
