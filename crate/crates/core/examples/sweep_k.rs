//! RMSE of Naive, NMF and OA for a range of latent dimensions.
//!
//! Run with `--release`; every cell trains for up to 5000 iterations.

use socmf::prelude::*;

fn main() -> Result<()> {
    let srn = generate_synthetic(&SynthParams::default())?;
    let ks: Vec<usize> = (2..=16).step_by(2).collect();
    let reports = sweep_k(&srn, &ks, &Hyperparams::default(), &EvalSettings::default())?;
    print!("{}", k_table(&reports));
    Ok(())
}
