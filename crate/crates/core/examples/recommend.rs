//! Top-N recommendations for a few users of a synthetic network.

use socmf::prelude::*;

fn main() -> Result<()> {
    let srn = generate_synthetic(&SynthParams::default())?;
    let hp = Hyperparams {
        k: 4,
        ..Hyperparams::default()
    };
    let (model, _) = train(&srn, &hp)?;
    for user in [0, 15, 30] {
        let name = srn.user_labels().name(user).unwrap();
        let recs = recommend(&model, &srn, UserId(user), 5)?;
        let line: Vec<String> = recs
            .iter()
            .map(|r| format!("{} ({:.2})", r.label, r.score))
            .collect();
        println!("{name}: {}", line.join(", "));
    }
    Ok(())
}
