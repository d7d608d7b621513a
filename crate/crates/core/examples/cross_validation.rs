//! Selects the number of terms and the temperature by k-fold cross-validation.

use lsenet::{cross_validate, generate_dataset, CvConfig, Family, FitConfig, GeneratorSpec};

fn main() -> lsenet::Result<()> {
    let spec = GeneratorSpec::new(
        Family::Lse {
            terms: 3,
            temperature: 0.3,
        },
        2,
        -1.0,
        1.0,
        5,
    )
    .with_noise(0.02);
    let data = generate_dataset(&spec, 200)?;
    let cfg = CvConfig {
        terms_grid: vec![1, 2, 3, 5],
        temperature_grid: vec![1.0, 0.3, 0.05],
        folds: 5,
        seed: 0,
        base: FitConfig {
            restarts: 2,
            max_iterations: 1500,
            ..FitConfig::default()
        },
    };
    let result = cross_validate(&data, &cfg)?;
    for c in &result.cells {
        println!(
            "K = {}, T = {:<5}: cv mae {:.5}",
            c.terms, c.temperature, c.mean_abs_error
        );
    }
    let best = result.best();
    println!("selected K = {}, T = {}", best.terms, best.temperature);
    Ok(())
}
