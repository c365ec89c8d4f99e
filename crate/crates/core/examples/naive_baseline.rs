//! Item-mean baseline and how it falls back for unseen items.

use socmf::prelude::*;

fn main() -> Result<()> {
    let ratings = RatingsTable::from_entries(3, 3, [(0, 0, 2.0), (1, 0, 4.0), (2, 1, 3.5)])?;
    let model = fit_naive(&ratings);
    for j in 0..3 {
        println!(
            "item {j}: mean {:?}, prediction {}",
            model.item_mean(ItemId(j)),
            predict_naive(&model, ItemId(j))?
        );
    }

    let srn = generate_synthetic(&SynthParams::default())?;
    let holdout = Holdout::new(&srn, &SplitSpec::default())?;
    let score = holdout.naive(&EvalSettings::default())?;
    println!(
        "naive RMSE on the synthetic network: {:.4} ({} test ratings)",
        score.rmse, score.scored
    );
    Ok(())
}
