//! Generate a community network, write it to disk and load it back.

use socmf::io::{load_srn, save_srn};
use socmf::prelude::*;

fn main() -> Result<()> {
    let params = SynthParams {
        communities: 3,
        users: 30,
        seed: 11,
        ..SynthParams::default()
    };
    let truth = generate_with_truth(&params)?;
    println!("{}", truth.srn.stats());
    for (c, taste) in truth.community_tastes.iter().enumerate() {
        let members = truth.community.iter().filter(|&&x| x == c).count();
        println!("community {c}: {members} users, taste {taste:.2?}");
    }

    let dir = std::env::temp_dir().join("socmf-synthetic");
    let (ratings, edges) = (dir.join("ratings.tsv"), dir.join("edges.tsv"));
    std::fs::create_dir_all(&dir)?;
    save_srn(&truth.srn, &ratings, &edges)?;
    // Loading assigns ids in order of first appearance, so indices may be
    // permuted; the content and the file bytes are what survive.
    let back = load_srn(&ratings, Some(&edges), false)?;
    let first = std::fs::read(&ratings)?;
    save_srn(&back, &ratings, &edges)?;
    println!(
        "wrote {}: {} ratings and {} ties read back, re-saved ratings byte-identical = {}",
        dir.display(),
        back.ratings().len(),
        back.social().edge_count(),
        std::fs::read(&ratings)? == first
    );
    Ok(())
}
