//! Moves between an LSE model in log coordinates and a generalized
//! posynomial in positive coordinates.

use lsenet::{gpos_to_lse, lse_to_gpos, GposModel};

fn main() -> lsenet::Result<()> {
    // z1 z2 + 2 sqrt(z1) / z2, at T = 1 an ordinary posynomial
    let g = GposModel::from_rows(1.0, &[1.0, 2.0], &[vec![1.0, 1.0], vec![0.5, -1.0]])?;
    let z = [1.5f64, 0.8];
    let lse = gpos_to_lse(&g);
    let x: Vec<f64> = z.iter().map(|v| v.ln()).collect();
    println!("psi(z)         = {:.12}", g.eval(&z)?);
    println!("exp(f(log z))  = {:.12}", lse.eval(&x)?.exp());
    let back = lse_to_gpos(&lse)?;
    println!("round trip     = {:.12}", back.eval(&z)?);
    Ok(())
}
