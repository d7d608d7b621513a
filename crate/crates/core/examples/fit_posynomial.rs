//! Fits a generalized posynomial to positive data and reports the relative
//! error guarantee implied by the log-space error.

use lsenet::fit::relative_error_bound;
use lsenet::{fit_gpos, Dataset, FitConfig, Space};

fn main() -> lsenet::Result<()> {
    let mut inputs = Vec::new();
    let mut targets = Vec::new();
    for i in 0..12 {
        for j in 0..12 {
            let z = [0.5 + 0.15 * i as f64, 0.5 + 0.15 * j as f64];
            targets.push(z[0] * z[1] + z[0].sqrt());
            inputs.push(z.to_vec());
        }
    }
    let data = Dataset::new(inputs, targets, Space::LogLog)?;
    let (model, report) = fit_gpos(&data, &FitConfig::new(3, 0.01))?;
    let log_err = data
        .inputs()
        .zip(data.targets())
        .map(|(z, w)| Ok((model.log_eval(z)? - w.ln()).abs()))
        .collect::<lsenet::Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    println!("mean relative error {:.4}", report.metrics.mean_rel);
    println!("max relative error  {:.4}", report.metrics.max_rel);
    println!("bound from log error {:.4}", relative_error_bound(log_err));
    Ok(())
}
