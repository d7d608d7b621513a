//! Fits a max-affine model with the partition heuristic.

use lsenet::{fit_max_affine, generate_dataset, Family, GeneratorSpec};

fn main() -> lsenet::Result<()> {
    let spec = GeneratorSpec::new(Family::Quadratic, 2, -1.0, 1.0, 2);
    let data = generate_dataset(&spec, 400)?;
    for terms in [1, 2, 4, 8, 16] {
        let (model, report) = fit_max_affine(&data, terms, 0, 10)?;
        println!(
            "K = {terms:>2}: {} active pieces, max abs error {:.4}",
            model.terms(),
            report.metrics.max_abs
        );
    }
    Ok(())
}
