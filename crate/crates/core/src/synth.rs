//! Synthetic social rating networks with planted community structure.
//!
//! Users are split into contiguous communities. Every community has a
//! latent taste vector and every item a latent type vector, both with one
//! dimension per community, so the noiseless rating matrix has rank at most
//! the community count. Each user perturbs the community taste by a small
//! Gaussian offset. Ties are drawn between members of the same community
//! (and optionally across communities) and are always reciprocal.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::srn::{ItemId, RatingScale, RatingsTable, SocialGraph, SocialRatingNetwork, UserId};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    pub users: usize,
    pub items: usize,
    pub communities: usize,
    /// Probability of a tie between two members of the same community.
    pub within_prob: f64,
    /// Probability of a tie between members of different communities.
    pub cross_prob: f64,
    /// Fraction of user-item cells that carry a rating.
    pub density: f64,
    /// Standard deviation of the Gaussian rating noise.
    pub noise: f64,
    /// Standard deviation of each user's Gaussian offset from the community
    /// taste, per latent dimension. Zero makes all members identical.
    pub taste_spread: f64,
    pub scale: RatingScale,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            users: 40,
            items: 60,
            communities: 4,
            within_prob: 0.5,
            cross_prob: 0.0,
            density: 0.2,
            noise: 0.5,
            taste_spread: 0.3,
            scale: RatingScale::default(),
            seed: 0,
        }
    }
}

impl SynthParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParam(msg));
        if self.communities == 0 {
            return bad("need at least one community".into());
        }
        if self.users < self.communities {
            return bad(format!(
                "{} users cannot fill {} communities",
                self.users, self.communities
            ));
        }
        for (name, p) in [
            ("within_prob", self.within_prob),
            ("cross_prob", self.cross_prob),
            ("density", self.density),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} must be in [0, 1], got {p}"));
            }
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return bad(format!("noise must be finite and >= 0, got {}", self.noise));
        }
        if !(self.taste_spread >= 0.0 && self.taste_spread.is_finite()) {
            return bad(format!(
                "taste_spread must be finite and >= 0, got {}",
                self.taste_spread
            ));
        }
        RatingScale::new(self.scale.min, self.scale.max)?;
        Ok(())
    }

    /// Community of user `x`.
    pub fn community_of(&self, x: usize) -> usize {
        x * self.communities / self.users
    }
}

/// A generated network together with the planted structure.
#[derive(Clone, Debug)]
pub struct SyntheticSrn {
    pub srn: SocialRatingNetwork,
    pub community: Vec<usize>,
    /// One row per community.
    pub community_tastes: Vec<Vec<f64>>,
    /// One row per user: community taste plus the user's own offset.
    pub user_tastes: Vec<Vec<f64>>,
    /// One row per item.
    pub item_types: Vec<Vec<f64>>,
}

impl SyntheticSrn {
    /// Noise-free rating of `item` by `user`, clipped to the scale.
    pub fn true_rating(&self, user: usize, item: usize, scale: &RatingScale) -> f64 {
        scale.clamp(dot(&self.user_tastes[user], &self.item_types[item]))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn generate_synthetic(params: &SynthParams) -> Result<SocialRatingNetwork> {
    Ok(generate_with_truth(params)?.srn)
}

pub fn generate_with_truth(params: &SynthParams) -> Result<SyntheticSrn> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let c = params.communities;

    // Rating magnitude: tastes are U[0,1) per dimension, so the expected
    // noiseless rating sits near the scale midpoint.
    let type_max = 4.0 * params.scale.midpoint() / c as f64;
    let community_tastes: Vec<Vec<f64>> = (0..c)
        .map(|_| (0..c).map(|_| rng.random::<f64>()).collect())
        .collect();
    let item_types: Vec<Vec<f64>> = (0..params.items)
        .map(|_| (0..c).map(|_| rng.random::<f64>() * type_max).collect())
        .collect();
    let community: Vec<usize> = (0..params.users).map(|x| params.community_of(x)).collect();
    let spread = Normal::new(0.0, params.taste_spread).expect("spread validated");
    let user_tastes: Vec<Vec<f64>> = community
        .iter()
        .map(|&cx| {
            community_tastes[cx]
                .iter()
                .map(|&t| {
                    if params.taste_spread > 0.0 {
                        t + spread.sample(&mut rng)
                    } else {
                        t
                    }
                })
                .collect()
        })
        .collect();

    let mut social = SocialGraph::new(params.users);
    for x in 0..params.users {
        for y in x + 1..params.users {
            let p = if community[x] == community[y] {
                params.within_prob
            } else {
                params.cross_prob
            };
            if rng.random::<f64>() < p {
                social.add_edge(UserId(x), UserId(y))?;
                social.add_edge(UserId(y), UserId(x))?;
            }
        }
    }

    let cells = params.users * params.items;
    let wanted = (params.density * cells as f64).round() as usize;
    let mut chosen = index::sample(&mut rng, cells, wanted.min(cells)).into_vec();
    chosen.sort_unstable();
    let noise = Normal::new(0.0, params.noise).expect("noise validated");
    let mut ratings = RatingsTable::new(params.users, params.items);
    for cell in chosen {
        let (x, j) = (cell / params.items, cell % params.items);
        let mut value = dot(&user_tastes[x], &item_types[j]);
        if params.noise > 0.0 {
            value += noise.sample(&mut rng);
        }
        ratings.insert(UserId(x), ItemId(j), params.scale.clamp(value))?;
    }

    Ok(SyntheticSrn {
        srn: SocialRatingNetwork::new(ratings, social)?,
        community,
        community_tastes,
        user_tastes,
        item_types,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_within_probability_ties_whole_communities() {
        let params = SynthParams {
            users: 10,
            communities: 2,
            within_prob: 1.0,
            ..SynthParams::default()
        };
        let s = generate_with_truth(&params).unwrap();
        let g = s.srn.social();
        for x in 0..10 {
            for y in 0..10 {
                let same = s.community[x] == s.community[y];
                assert_eq!(g.has_edge(UserId(x), UserId(y)), x != y && same, "{x}->{y}");
            }
        }
    }

    #[test]
    fn noiseless_full_density_is_exact() {
        let params = SynthParams {
            users: 8,
            items: 5,
            density: 1.0,
            noise: 0.0,
            taste_spread: 0.0,
            ..SynthParams::default()
        };
        let s = generate_with_truth(&params).unwrap();
        assert_eq!(s.srn.ratings().len(), 40);
        for r in s.srn.ratings().entries() {
            let expect = s.true_rating(r.user.0, r.item.0, &params.scale);
            assert_eq!(
                s.user_tastes[r.user.0],
                s.community_tastes[s.community[r.user.0]]
            );
            assert_eq!(r.value, expect);
        }
    }

    #[test]
    fn default_sizes() {
        let stats = generate_synthetic(&SynthParams::default()).unwrap().stats();
        assert_eq!(stats.users, 40);
        assert_eq!(stats.items, 60);
        assert_eq!(stats.ratings, 480);
        assert_eq!(stats.density, 0.2);
    }

    #[test]
    fn deterministic_given_seed() {
        let p = SynthParams::default();
        assert_eq!(
            generate_synthetic(&p).unwrap(),
            generate_synthetic(&p).unwrap()
        );
        let q = SynthParams { seed: 1, ..p };
        assert_ne!(
            generate_synthetic(&q).unwrap(),
            generate_synthetic(&SynthParams::default()).unwrap()
        );
    }

    #[test]
    fn invalid_params_rejected() {
        for p in [
            SynthParams {
                communities: 0,
                ..SynthParams::default()
            },
            SynthParams {
                users: 3,
                communities: 4,
                ..SynthParams::default()
            },
            SynthParams {
                density: 1.5,
                ..SynthParams::default()
            },
            SynthParams {
                noise: -1.0,
                ..SynthParams::default()
            },
        ] {
            assert!(generate_synthetic(&p).is_err());
        }
    }
}
