//! Tied users end up closer in latent space when the social term is on.
//!
//! Run with `--release`.

use socmf::prelude::*;

fn main() -> Result<()> {
    for seed in 0..5 {
        let srn = generate_synthetic(&SynthParams {
            seed,
            ..SynthParams::default()
        })?;
        let distance = |mu: f64| -> Result<f64> {
            let (model, _) = train(
                &srn,
                &Hyperparams {
                    mu,
                    seed,
                    ..Hyperparams::default()
                },
            )?;
            Ok(mean_tie_distance(&model, srn.social()).unwrap_or(0.0))
        };
        let (social, plain) = (distance(1e-3)?, distance(0.0)?);
        println!("seed {seed}: mean tie distance {social:.4} with ties, {plain:.4} without");
    }
    Ok(())
}
