//! Top-N recommendation for one user.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::factorization::FactorModel;
use crate::srn::{ItemId, SocialRatingNetwork, UserId};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Recommendation {
    pub item: ItemId,
    pub label: String,
    pub score: f64,
}

/// Ranks every item `user` has not rated in `srn` by predicted rating,
/// highest first, ties broken by item label, and keeps the first `top_n`.
pub fn recommend(
    model: &FactorModel,
    srn: &SocialRatingNetwork,
    user: UserId,
    top_n: usize,
) -> Result<Vec<Recommendation>> {
    if model.n_users() != srn.n_users() || model.n_items() != srn.n_items() {
        return Err(Error::DimensionMismatch(format!(
            "model is {}x{} but network is {}x{}",
            model.n_users(),
            model.n_items(),
            srn.n_users(),
            srn.n_items()
        )));
    }
    let ratings = srn.ratings();
    let labels = srn.item_labels();
    let mut ranked = Vec::new();
    for j in (0..srn.n_items()).map(ItemId) {
        if ratings.is_observed(user, j) {
            continue;
        }
        ranked.push(Recommendation {
            item: j,
            label: labels.name(j.0).unwrap_or_default().to_owned(),
            score: model.predict(user, j)?,
        });
    }
    ranked.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| a.label.cmp(&b.label))
    });
    ranked.truncate(top_n);
    Ok(ranked)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::srn::{Labels, RatingsTable, SocialGraph};
    use ndarray::array;

    fn network(entries: &[(usize, usize, f64)]) -> SocialRatingNetwork {
        let ratings = RatingsTable::from_entries(2, 4, entries.iter().copied()).unwrap();
        let mut items = Labels::new();
        for name in ["d", "c", "b", "a"] {
            items.intern(name);
        }
        SocialRatingNetwork::with_labels(
            ratings,
            SocialGraph::new(2),
            Labels::sequential("u", 2),
            items,
        )
        .unwrap()
    }

    fn model() -> FactorModel {
        FactorModel::from_factors(array![[1.0], [1.0]], array![[3.0], [5.0], [5.0], [1.0]]).unwrap()
    }

    #[test]
    fn ranks_unrated_items_descending() {
        let srn = network(&[(0, 0, 2.0)]);
        let recs = recommend(&model(), &srn, UserId(0), 10).unwrap();
        let labels: Vec<_> = recs.iter().map(|r| r.label.as_str()).collect();
        // items 1 and 2 tie at 5.0, so label order decides
        assert_eq!(labels, ["b", "c", "a"]);
        assert!(recs.iter().all(|r| r.item != ItemId(0)));
    }

    #[test]
    fn top_n_truncates() {
        let srn = network(&[]);
        assert_eq!(recommend(&model(), &srn, UserId(1), 2).unwrap().len(), 2);
    }

    #[test]
    fn user_who_rated_everything_gets_nothing() {
        let srn = network(&[(1, 0, 1.0), (1, 1, 1.0), (1, 2, 1.0), (1, 3, 1.0)]);
        assert!(recommend(&model(), &srn, UserId(1), 5).unwrap().is_empty());
    }
}
