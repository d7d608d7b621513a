//! Evaluates an LSE model with its gradient and Hessian, and checks the
//! sandwich between the max-affine skeleton and the smooth model.

use lsenet::LseModel;

fn main() -> lsenet::Result<()> {
    let model = LseModel::from_rows(
        0.2,
        &[vec![1.0, 0.0], vec![-1.0, 0.5], vec![0.0, -1.0]],
        &[0.0, 0.3, -0.2],
    )?;
    let x = [0.4, -0.1];
    let value = model.eval(&x)?;
    let skeleton = model.skeleton().eval(&x)?;
    println!("f_T(x)    = {value:.6}");
    println!(
        "max-affine = {skeleton:.6}  (gap {:.2e}, bound {:.4})",
        value - skeleton,
        0.2 * 3f64.ln()
    );
    println!("weights   = {:?}", model.weights(&x)?);
    println!("gradient  = {:?}", model.gradient(&x)?.as_slice());
    println!("hessian   = {}", model.hessian(&x)?);
    Ok(())
}
