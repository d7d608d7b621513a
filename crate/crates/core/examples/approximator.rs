//! Builds LSE approximations of convex functions from sampled subgradients
//! and shows the error shrinking as the sample grid is refined.

use lsenet::synth::{approximate_on_grid, uniform_grid};
use lsenet::{BoxConstraints, GroundTruth};

fn main() -> lsenet::Result<()> {
    let bounds = BoxConstraints::cube(2, -1.0, 1.0)?;
    let probes = uniform_grid(&bounds, 41)?;
    for (name, truth) in [
        ("quadratic", GroundTruth::Quadratic),
        ("norm", GroundTruth::Norm),
    ] {
        for per_axis in [3, 5, 9, 17] {
            let model = approximate_on_grid(&truth, &bounds, per_axis, 0.01)?;
            let mut sup: f64 = 0.0;
            for x in &probes {
                sup = sup.max((model.eval(x)? - truth.value(x)?).abs());
            }
            println!("{name:<9} j = {:>3}: sup error {sup:.5}", model.terms());
        }
    }
    Ok(())
}
