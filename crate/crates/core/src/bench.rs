//! Quick self-check suite behind `lsenet bench`: scaled-down runs of the
//! model, transform, solver and approximator property checks, reported as a
//! fixed-width table.

use rand::Rng;
use serde::Serialize;

use crate::error::Result;
use crate::fit::stream_rng;
use crate::model::{LseModel, Model};
use crate::optimize::{minimize_lse_box, BoxConstraints, SolverOptions};
use crate::synth::{
    approximate_on_grid, grid_minimize, uniform_grid, Family, GeneratorSpec, GroundTruth,
};
use crate::transform::{lse_to_gpos, reduce_temperature, rescale_temperature, DEFAULT_TERM_BUDGET};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub name: &'static str,
    /// Worst value observed.
    pub measured: f64,
    /// Largest acceptable value.
    pub bound: f64,
    pub passed: bool,
}

impl BenchRow {
    fn new(name: &'static str, measured: f64, bound: f64) -> Self {
        Self {
            name,
            measured,
            bound,
            passed: measured <= bound,
        }
    }
}

/// `|a − b|` relative to `max(|b|, 1)`.
fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

fn random_lse(seed: u64, terms: usize, dim: usize, temperature: f64) -> Result<LseModel> {
    let spec = GeneratorSpec::new(Family::Lse { terms, temperature }, dim, -1.0, 1.0, seed);
    match spec.ground_truth()? {
        GroundTruth::Model(Model::Lse(m)) => Ok(m),
        _ => unreachable!("lse family yields an lse model"),
    }
}

fn random_point(rng: &mut impl Rng, dim: usize, radius: f64) -> Vec<f64> {
    (0..dim)
        .map(|_| rng.random_range(-radius..radius))
        .collect()
}

fn sandwich(seed: u64) -> Result<BenchRow> {
    let mut rng = stream_rng(seed, 10);
    let mut worst = f64::NEG_INFINITY;
    for i in 0..2000u64 {
        let t = [1.0, 0.1, 0.01][(i % 3) as usize];
        let k = 1 + (i % 20) as usize;
        let m = random_lse(seed.wrapping_add(i), k, 3, t)?;
        let x = random_point(&mut rng, 3, 3.0);
        let gap = m.eval(&x)? - m.skeleton().eval(&x)?;
        worst = worst.max(-gap).max(gap - t * (k as f64).ln());
    }
    Ok(BenchRow::new(
        "sandwich bound violation",
        worst.max(0.0),
        1e-9,
    ))
}

fn scaling(seed: u64) -> Result<BenchRow> {
    let mut rng = stream_rng(seed, 11);
    let mut worst: f64 = 0.0;
    for i in 0..300u64 {
        let m = random_lse(
            seed.wrapping_add(i),
            4,
            3,
            [2.0, 0.3, 0.05][(i % 3) as usize],
        )?;
        let x = random_point(&mut rng, 3, 2.0);
        worst = worst.max(rel(rescale_temperature(&m).eval(&x)?, m.eval(&x)?));
    }
    Ok(BenchRow::new("scaling identity rel dev", worst, 1e-12))
}

fn reduction(seed: u64) -> Result<BenchRow> {
    let mut rng = stream_rng(seed, 12);
    let mut worst: f64 = 0.0;
    for k in [2usize, 3] {
        for p in [2usize, 3] {
            let m = random_lse(seed.wrapping_add((k * 10 + p) as u64), k, 2, 0.5)?;
            let r = reduce_temperature(&m, p, DEFAULT_TERM_BUDGET)?;
            for _ in 0..20 {
                let x = random_point(&mut rng, 2, 2.0);
                worst = worst.max(rel(r.eval(&x)?, m.eval(&x)?));
            }
        }
    }
    Ok(BenchRow::new("temperature reduction rel dev", worst, 1e-8))
}

fn gradient(seed: u64) -> Result<BenchRow> {
    let mut rng = stream_rng(seed, 13);
    let mut worst: f64 = 0.0;
    for i in 0..50u64 {
        let t = [1.0, 0.1][(i % 2) as usize];
        let m = random_lse(seed.wrapping_add(i), 5, 3, t)?;
        let x = random_point(&mut rng, 3, 1.0);
        let g = m.gradient(&x)?;
        let h = 1e-5 * t;
        for j in 0..3 {
            let (mut xp, mut xm) = (x.clone(), x.clone());
            xp[j] += h;
            xm[j] -= h;
            let fd = (m.eval(&xp)? - m.eval(&xm)?) / (2.0 * h);
            worst = worst.max((fd - g[j]).abs() / g.norm().max(1.0));
        }
    }
    Ok(BenchRow::new("gradient vs finite differences", worst, 1e-6))
}

fn conjugation(seed: u64) -> Result<BenchRow> {
    let mut rng = stream_rng(seed, 14);
    let mut worst: f64 = 0.0;
    for i in 0..200u64 {
        let m = random_lse(seed.wrapping_add(i), 4, 2, 0.5)?;
        let g = lse_to_gpos(&m)?;
        let z: Vec<f64> = (0..2).map(|_| rng.random_range(0.1..10.0)).collect();
        let x: Vec<f64> = z.iter().map(|v| v.ln()).collect();
        let expect = m.eval(&x)?.exp();
        worst = worst.max((g.eval(&z)? - expect).abs() / expect);
    }
    Ok(BenchRow::new("exp/log conjugation rel dev", worst, 1e-10))
}

fn solver_vs_grid(seed: u64) -> Result<BenchRow> {
    let bounds = BoxConstraints::cube(2, -1.0, 1.0)?;
    let mut worst = f64::NEG_INFINITY;
    for i in 0..10u64 {
        let m = random_lse(seed.wrapping_add(i), 6, 2, 0.2)?;
        let rep = minimize_lse_box(&m, &bounds, &SolverOptions::default())?;
        let (_, grid_min) = grid_minimize(|x| m.eval(x).unwrap_or(f64::INFINITY), &bounds, 51)?;
        worst = worst.max(rep.objective - grid_min);
    }
    Ok(BenchRow::new(
        "box solver excess over grid",
        worst.max(0.0),
        1e-9,
    ))
}

fn approximator(_seed: u64) -> Result<BenchRow> {
    let bounds = BoxConstraints::cube(2, -1.0, 1.0)?;
    let probes = uniform_grid(&bounds, 61)?;
    let truth = GroundTruth::Quadratic;
    let mut prev = f64::INFINITY;
    let mut worst_increase = f64::NEG_INFINITY;
    for per_axis in [3, 5, 9] {
        let m = approximate_on_grid(&truth, &bounds, per_axis, 0.01)?;
        let mut sup: f64 = 0.0;
        for x in &probes {
            sup = sup.max((m.eval(x)? - truth.value(x)?).abs());
        }
        worst_increase = worst_increase.max(sup - prev);
        prev = sup;
    }
    Ok(BenchRow::new(
        "approximator sup-error increase",
        worst_increase.max(0.0),
        1e-12,
    ))
}

/// Runs every check; deterministic in `seed`.
pub fn run_bench(seed: u64) -> Result<Vec<BenchRow>> {
    let checks: [fn(u64) -> Result<BenchRow>; 7] = [
        sandwich,
        scaling,
        reduction,
        gradient,
        conjugation,
        solver_vs_grid,
        approximator,
    ];
    checks.iter().map(|c| c(seed)).collect()
}

pub fn render_table(rows: &[BenchRow]) -> String {
    let mut out = format!(
        "{:<34} {:>12} {:>12}  status\n",
        "check", "measured", "bound"
    );
    for r in rows {
        out.push_str(&format!(
            "{:<34} {:>12.3e} {:>12.3e}  {}\n",
            r.name,
            r.measured,
            r.bound,
            if r.passed { "PASS" } else { "FAIL" }
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bench_passes_and_is_deterministic() {
        let rows = run_bench(1).unwrap();
        for r in &rows {
            assert!(r.passed, "{r:?}");
        }
        assert_eq!(render_table(&rows), render_table(&run_bench(1).unwrap()));
    }
}
