//! End to end: generate data, fit, save and reload the model, then optimize.

use lsenet::{
    fit_gpos, generate_dataset, solve_gp_box, BoxConstraints, Family, FitConfig, GeneratorSpec,
    Model, SolverOptions,
};

fn main() -> lsenet::Result<()> {
    let spec =
        GeneratorSpec::new(Family::Posynomial { terms: 3 }, 2, 0.5, 2.0, 11).with_noise(0.01);
    let data = generate_dataset(&spec, 200)?;
    let (model, report) = fit_gpos(&data, &FitConfig::new(3, 1.0))?;
    println!("fit: mean relative error {:.4}", report.metrics.mean_rel);

    let path = std::env::temp_dir().join("lsenet-pipeline-model.json");
    Model::Gpos(model).save(&path)?;
    let Model::Gpos(loaded) = Model::load(&path)? else {
        unreachable!("saved a gpos model");
    };

    let bounds = BoxConstraints::cube(2, 0.5, 2.0)?;
    let rep = solve_gp_box(&loaded, &bounds, &SolverOptions::default())?;
    println!("minimum {:.6} at {:?}", rep.objective, rep.minimizer);
    Ok(())
}
