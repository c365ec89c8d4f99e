//! RMSE of the social model as the tie weight varies, at k = 10.
//!
//! Run with `--release`.

use socmf::prelude::*;

fn main() -> Result<()> {
    let srn = generate_synthetic(&SynthParams::default())?;
    let mus = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6];
    let reports = sweep_mu(
        &srn,
        &mus,
        &Hyperparams::default(),
        &EvalSettings::default(),
    )?;
    print!("{}", mu_table(&reports));
    let best = reports
        .iter()
        .min_by(|a, b| a.rmse.total_cmp(&b.rmse))
        .unwrap();
    println!("best mu = {:e}", best.mu.unwrap());
    Ok(())
}
