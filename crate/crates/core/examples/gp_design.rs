//! Solves a small geometric program over a positive box and maximizes a
//! positive quantity through a surrogate of its reciprocal.

use lsenet::{
    maximize_via_reciprocal, solve_gp_box, BoxConstraints, GposModel, Model, SolverOptions,
};

fn main() -> lsenet::Result<()> {
    // z1 + 1/z1 + z2 / z1^0.5
    let cost = GposModel::from_rows(
        1.0,
        &[1.0, 1.0, 1.0],
        &[vec![1.0, 0.0], vec![-1.0, 0.0], vec![-0.5, 1.0]],
    )?;
    let bounds = BoxConstraints::new(vec![0.2, 0.5], vec![5.0, 3.0])?;
    let rep = solve_gp_box(&cost, &bounds, &SolverOptions::default())?;
    println!("min cost {:.6} at {:?}", rep.objective, rep.minimizer);

    // a quantity P = 1 / cost, maximized through its reciprocal
    let max = maximize_via_reciprocal(&Model::Gpos(cost), &bounds, &SolverOptions::default())?;
    println!(
        "max of 1/cost {:.6} at {:?}",
        max.estimated_maximum, max.solve.minimizer
    );
    Ok(())
}
