//! Fits a convex surrogate to samples of an unknown cost and minimizes it
//! over a box, comparing with exhaustive grid searches.

use lsenet::{
    fit_lse, generate_dataset, grid_minimize, minimize_lse_box, BoxConstraints, Family, FitConfig,
    GeneratorSpec, SolverOptions,
};

fn main() -> lsenet::Result<()> {
    let spec = GeneratorSpec::new(
        Family::Lse {
            terms: 4,
            temperature: 0.3,
        },
        2,
        -2.0,
        2.0,
        3,
    );
    let truth = spec.ground_truth()?;
    let data = generate_dataset(&spec, 300)?;
    let cfg = FitConfig {
        restarts: 4,
        ..FitConfig::new(4, 0.3)
    };
    let (model, report) = fit_lse(&data, &cfg)?;
    println!("fit: mean abs error {:.2e}", report.metrics.mean_abs);

    let bounds = BoxConstraints::new(vec![0.5, -1.0], vec![1.5, 1.0])?;
    let rep = minimize_lse_box(&model, &bounds, &SolverOptions::default())?;
    let (grid_x, grid_v) = grid_minimize(|x| model.eval(x).unwrap_or(f64::INFINITY), &bounds, 201)?;
    let (true_x, true_v) =
        grid_minimize(|x| truth.value(x).unwrap_or(f64::INFINITY), &bounds, 201)?;
    println!(
        "surrogate, solver: x = {:?}, f = {:.6}, {} iterations",
        rep.minimizer, rep.objective, rep.iterations
    );
    println!("surrogate, grid:   x = {grid_x:?}, f = {grid_v:.6}");
    println!("true cost, grid:   x = {true_x:?}, f = {true_v:.6}");
    Ok(())
}
