//! Fits an LSE model to noisy samples of a convex function.

use lsenet::{compute_metrics, fit_lse, generate_dataset, Family, FitConfig, GeneratorSpec, Model};

fn main() -> lsenet::Result<()> {
    let spec = GeneratorSpec::new(Family::Norm, 2, -1.0, 1.0, 1).with_noise(0.01);
    let data = generate_dataset(&spec, 300)?;
    for (terms, temperature) in [(2, 0.1), (4, 0.1), (8, 0.05)] {
        let cfg = FitConfig {
            restarts: 4,
            ..FitConfig::new(terms, temperature)
        };
        let (model, report) = fit_lse(&data, &cfg)?;
        let m = compute_metrics(&Model::Lse(model), &data)?;
        println!(
            "K = {terms}, T = {temperature}: loss {:.3e}, mean abs {:.4}, {} steps",
            report.final_loss, m.mean_abs, report.iterations
        );
    }
    Ok(())
}
