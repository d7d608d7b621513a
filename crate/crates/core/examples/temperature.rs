//! Temperature rescaling to a unit-temperature model and exact temperature
//! reduction by an integer factor.

use lsenet::{reduce_temperature, rescale_temperature, LseModel, DEFAULT_TERM_BUDGET};

fn main() -> lsenet::Result<()> {
    let model = LseModel::from_rows(0.6, &[vec![1.0, -0.5], vec![-0.3, 1.2]], &[0.1, -0.4])?;
    let x = [0.7, 0.2];

    let unit = rescale_temperature(&model);
    println!("original {:.15}", model.eval(&x)?);
    println!("rescaled {:.15} (scale {})", unit.eval(&x)?, unit.scale);

    for p in [2, 3, 4] {
        let reduced = reduce_temperature(&model, p, DEFAULT_TERM_BUDGET)?;
        println!(
            "p = {p}: T = {:.3}, {} terms, value {:.15}",
            reduced.temperature(),
            reduced.terms(),
            reduced.eval(&x)?
        );
    }
    Ok(())
}
