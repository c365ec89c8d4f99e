//! Naive baseline: predict an item's rating as the mean of the ratings it
//! received in training.

use crate::error::{Error, Result};
use crate::srn::{ItemId, RatingScale, RatingsTable};

/// Per-item means with a global-mean fallback for items nobody rated, and
/// the scale midpoint when there is no training data at all.
#[derive(Clone, Debug, PartialEq)]
pub struct NaiveModel {
    item_means: Vec<Option<f64>>,
    global_mean: Option<f64>,
    fallback: f64,
}

pub fn fit_naive(ratings: &RatingsTable) -> NaiveModel {
    NaiveModel::fit(ratings)
}

impl NaiveModel {
    pub fn fit(ratings: &RatingsTable) -> Self {
        let mut sums = vec![0.0; ratings.n_items()];
        let mut counts = vec![0usize; ratings.n_items()];
        for r in ratings.entries() {
            sums[r.item.0] += r.value;
            counts[r.item.0] += 1;
        }
        let item_means = sums
            .iter()
            .zip(&counts)
            .map(|(&s, &c)| (c > 0).then(|| s / c as f64))
            .collect();
        let total: f64 = sums.iter().sum();
        let global_mean = (!ratings.is_empty()).then(|| total / ratings.len() as f64);
        Self {
            item_means,
            global_mean,
            fallback: RatingScale::default().midpoint(),
        }
    }

    /// Uses the midpoint of `scale` as the last-resort prediction.
    pub fn with_scale(mut self, scale: RatingScale) -> Self {
        self.fallback = scale.midpoint();
        self
    }

    pub fn n_items(&self) -> usize {
        self.item_means.len()
    }

    pub fn item_mean(&self, j: ItemId) -> Option<f64> {
        self.item_means.get(j.0).copied().flatten()
    }

    pub fn global_mean(&self) -> Option<f64> {
        self.global_mean
    }

    pub fn predict(&self, j: ItemId) -> Result<f64> {
        let mean = self.item_means.get(j.0).ok_or(Error::IndexOutOfRange {
            kind: "item",
            index: j.0,
            count: self.item_means.len(),
        })?;
        Ok(mean.or(self.global_mean).unwrap_or(self.fallback))
    }
}

pub fn predict_naive(model: &NaiveModel, j: ItemId) -> Result<f64> {
    model.predict(j)
}
