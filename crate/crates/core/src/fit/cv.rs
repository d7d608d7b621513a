//! k-fold cross-validation over a (terms, temperature) grid.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{fit_gpos, fit_lse, metrics_from_predictions, stream_rng, FitConfig};
use crate::dataset::{Dataset, Space};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvConfig {
    pub terms_grid: Vec<usize>,
    pub temperature_grid: Vec<f64>,
    pub folds: usize,
    pub seed: u64,
    /// Trainer settings shared by every cell; `terms` and `temperature` are
    /// overridden per cell.
    pub base: FitConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvCell {
    pub terms: usize,
    pub temperature: f64,
    /// Mean absolute error over all held-out points.
    pub mean_abs_error: f64,
    /// Mean relative error over all held-out points (min-denominator).
    pub mean_rel_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub cells: Vec<CvCell>,
    /// Index into `cells` of the selected configuration.
    pub selected: usize,
}

impl CvResult {
    pub fn best(&self) -> &CvCell {
        &self.cells[self.selected]
    }
}

/// Picks the cell with the smallest CV error (absolute for convex data,
/// relative for log-log data); exact ties go to the larger temperature, then
/// to fewer terms.
pub fn select_cell(cells: &[CvCell], space: Space) -> Option<usize> {
    let score = |c: &CvCell| match space {
        Space::Convex => c.mean_abs_error,
        Space::LogLog => c.mean_rel_error,
    };
    (0..cells.len()).min_by(|&a, &b| {
        let (ca, cb) = (&cells[a], &cells[b]);
        score(ca)
            .total_cmp(&score(cb))
            .then(cb.temperature.total_cmp(&ca.temperature))
            .then(ca.terms.cmp(&cb.terms))
    })
}

/// Deterministic fold labels: a seeded shuffle dealt round-robin.
fn fold_labels(m: usize, folds: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(&mut stream_rng(seed, u64::MAX));
    let mut labels = vec![0; m];
    for (pos, &i) in order.iter().enumerate() {
        labels[i] = pos % folds;
    }
    labels
}

pub fn cross_validate(data: &Dataset, config: &CvConfig) -> Result<CvResult> {
    if config.terms_grid.is_empty() || config.temperature_grid.is_empty() {
        return Err(Error::input("cross-validation grids must be nonempty"));
    }
    if config.folds < 2 {
        return Err(Error::input("cross-validation needs at least 2 folds"));
    }
    if config.folds > data.len() {
        return Err(Error::input(format!(
            "{} folds leave some fold without points ({} samples)",
            config.folds,
            data.len()
        )));
    }
    let labels = fold_labels(data.len(), config.folds, config.seed);
    let splits: Vec<(Dataset, Dataset, Vec<usize>)> = (0..config.folds)
        .map(|f| {
            let train: Vec<usize> = (0..data.len()).filter(|&i| labels[i] != f).collect();
            let test: Vec<usize> = (0..data.len()).filter(|&i| labels[i] == f).collect();
            Ok((data.select(&train)?, data.select(&test)?, test))
        })
        .collect::<Result<_>>()?;

    let grid: Vec<(usize, f64)> = config
        .terms_grid
        .iter()
        .flat_map(|&k| config.temperature_grid.iter().map(move |&t| (k, t)))
        .collect();

    let cells: Vec<CvCell> = grid
        .par_iter()
        .map(|&(terms, temperature)| {
            let cfg = FitConfig {
                terms,
                temperature,
                ..config.base.clone()
            };
            let mut preds = vec![0.0; data.len()];
            for (train, test, idx) in &splits {
                let fold_preds: Vec<f64> = match data.space() {
                    Space::Convex => {
                        let (model, _) = fit_lse(train, &cfg)?;
                        test.inputs()
                            .map(|x| model.eval(x))
                            .collect::<Result<_>>()?
                    }
                    Space::LogLog => {
                        let (model, _) = fit_gpos(train, &cfg)?;
                        test.inputs()
                            .map(|z| model.eval(z))
                            .collect::<Result<_>>()?
                    }
                };
                for (&i, p) in idx.iter().zip(fold_preds) {
                    preds[i] = p;
                }
            }
            let m = metrics_from_predictions(&preds, data.targets());
            Ok(CvCell {
                terms,
                temperature,
                mean_abs_error: m.mean_abs,
                mean_rel_error: m.mean_rel,
            })
        })
        .collect::<Result<_>>()?;

    let selected = select_cell(&cells, data.space()).expect("grid is nonempty");
    Ok(CvResult { cells, selected })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell(terms: usize, temperature: f64, err: f64) -> CvCell {
        CvCell {
            terms,
            temperature,
            mean_abs_error: err,
            mean_rel_error: err,
        }
    }

    #[test]
    fn ties_prefer_larger_temperature_then_fewer_terms() {
        let cells = [
            cell(3, 0.01, 0.5),
            cell(3, 0.1, 0.5),
            cell(2, 0.1, 0.5),
            cell(5, 1.0, 0.7),
        ];
        assert_eq!(select_cell(&cells, Space::Convex), Some(2));
        let cells = [cell(3, 0.01, 0.5), cell(3, 0.1, 0.5)];
        assert_eq!(select_cell(&cells, Space::LogLog), Some(1));
    }

    #[test]
    fn lowest_error_wins() {
        let cells = [cell(1, 1.0, 0.3), cell(4, 0.01, 0.1)];
        assert_eq!(select_cell(&cells, Space::Convex), Some(1));
    }

    #[test]
    fn fold_labels_are_balanced_and_seeded() {
        let a = fold_labels(23, 4, 9);
        assert_eq!(a, fold_labels(23, 4, 9));
        for f in 0..4 {
            let n = a.iter().filter(|&&l| l == f).count();
            assert!(n == 5 || n == 6);
        }
    }

    #[test]
    fn rejects_bad_fold_counts() {
        let data = Dataset::new(vec![vec![0.0], vec![1.0]], vec![0.0, 1.0], Space::Convex).unwrap();
        let cfg = CvConfig {
            terms_grid: vec![1],
            temperature_grid: vec![1.0],
            folds: 3,
            seed: 0,
            base: FitConfig::default(),
        };
        assert!(cross_validate(&data, &cfg).is_err());
        assert!(cross_validate(
            &data,
            &CvConfig {
                folds: 1,
                ..cfg.clone()
            }
        )
        .is_err());
        assert!(cross_validate(
            &data,
            &CvConfig {
                terms_grid: vec![],
                folds: 2,
                ..cfg
            }
        )
        .is_err());
    }
}
