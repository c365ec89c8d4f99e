//! Train a social factorization on a hand-made network and predict.

use socmf::prelude::*;

fn main() -> Result<()> {
    // Four users, three movies. Ana and Ben are friends, so are Cy and Dee.
    let mut users = Labels::new();
    let mut items = Labels::new();
    let mut ratings = Vec::new();
    for (u, i, r) in [
        ("ana", "alien", 5.0),
        ("ana", "brazil", 4.0),
        ("ben", "alien", 5.0),
        ("cy", "brazil", 2.0),
        ("cy", "casablanca", 5.0),
        ("dee", "casablanca", 4.0),
    ] {
        ratings.push((users.intern(u), items.intern(i), r));
    }
    let table = RatingsTable::from_entries(users.len(), items.len(), ratings)?;
    let mut social = SocialGraph::new(users.len());
    for (a, b) in [("ana", "ben"), ("cy", "dee")] {
        let (a, b) = (UserId(users.get(a).unwrap()), UserId(users.get(b).unwrap()));
        social.add_edge(a, b)?;
        social.add_edge(b, a)?;
    }
    let srn = SocialRatingNetwork::with_labels(table, social, users, items)?;
    println!("{}", srn.stats());

    let hp = Hyperparams {
        k: 2,
        mu: 0.1,
        ..Hyperparams::default()
    };
    let (model, trace) = train(&srn, &hp)?;
    println!(
        "{} iterations, stop {:?}, loss {:.4} -> {:.4}",
        trace.iterations(),
        trace.stop,
        trace.initial_loss,
        trace.final_loss()
    );

    let scale = RatingScale::default();
    for (u, name) in srn.user_labels().iter().enumerate() {
        let row: Vec<String> = (0..srn.n_items())
            .map(|i| {
                format!(
                    "{:.2}",
                    scale.clamp(model.predict(UserId(u), ItemId(i)).unwrap())
                )
            })
            .collect();
        println!("{name:>4}: {}", row.join("  "));
    }
    Ok(())
}
