#![allow(dead_code)]

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use socmf::prelude::*;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random network with each cell rated with probability `density` and each
/// ordered pair tied with probability `tie_prob`.
pub fn random_srn<R: Rng>(
    rng: &mut R,
    n_users: usize,
    n_items: usize,
    density: f64,
    tie_prob: f64,
) -> SocialRatingNetwork {
    let mut ratings = RatingsTable::new(n_users, n_items);
    for x in 0..n_users {
        for j in 0..n_items {
            if rng.random::<f64>() < density {
                let v = 1.0 + 4.0 * rng.random::<f64>();
                ratings.insert(UserId(x), ItemId(j), v).unwrap();
            }
        }
    }
    let mut social = SocialGraph::new(n_users);
    for x in 0..n_users {
        for y in 0..n_users {
            if x != y && rng.random::<f64>() < tie_prob {
                social.add_edge(UserId(x), UserId(y)).unwrap();
            }
        }
    }
    build_srn(ratings, social).unwrap()
}

pub fn random_model<R: Rng>(rng: &mut R, n_users: usize, n_items: usize, k: usize) -> FactorModel {
    let mut draw = |rows| Array2::from_shape_fn((rows, k), |_| rng.random::<f64>() * 2.0 - 1.0);
    let p = draw(n_users);
    let q = draw(n_items);
    FactorModel::from_factors(p, q).unwrap()
}

/// Small random instance for property checks: sizes 1..=5, k 1..=3.
pub fn small_instance<R: Rng>(rng: &mut R) -> (SocialRatingNetwork, FactorModel) {
    let n_u = rng.random_range(1..=5);
    let n_i = rng.random_range(1..=5);
    let k = rng.random_range(1..=3);
    let density = rng.random_range(0.3..1.0);
    let ties = rng.random_range(0.0..0.7);
    let srn = random_srn(rng, n_u, n_i, density, ties);
    let model = random_model(rng, n_u, n_i, k);
    (srn, model)
}

/// Dense 0/1 mask and value matrix of a ratings table.
pub fn dense(ratings: &RatingsTable) -> (Vec<Vec<bool>>, Vec<Vec<f64>>) {
    let mut mask = vec![vec![false; ratings.n_items()]; ratings.n_users()];
    let mut values = vec![vec![0.0; ratings.n_items()]; ratings.n_users()];
    for r in ratings.entries() {
        mask[r.user.0][r.item.0] = true;
        values[r.user.0][r.item.0] = r.value;
    }
    (mask, values)
}

/// Definitional ratings loss: a plain loop over every cell with the mask.
pub fn oracle_loss_ratings(model: &FactorModel, ratings: &RatingsTable, lambda: f64) -> f64 {
    let (mask, values) = dense(ratings);
    let (p, q) = (model.p(), model.q());
    let k = model.k();
    let mut fit = 0.0;
    for x in 0..model.n_users() {
        for j in 0..model.n_items() {
            if mask[x][j] {
                let mut pred = 0.0;
                for d in 0..k {
                    pred += p[[x, d]] * q[[j, d]];
                }
                fit += (values[x][j] - pred) * (values[x][j] - pred);
            }
        }
    }
    let mut norm = 0.0;
    for v in p.iter().chain(q.iter()) {
        norm += v * v;
    }
    0.5 * fit + 0.5 * lambda * norm
}

pub fn oracle_loss_social(
    model: &FactorModel,
    srn: &SocialRatingNetwork,
    lambda: f64,
    mu: f64,
) -> f64 {
    let p = model.p();
    let mut ties = 0.0;
    for x in 0..srn.n_users() {
        for y in 0..srn.n_users() {
            if srn.social().has_edge(UserId(x), UserId(y)) {
                for d in 0..model.k() {
                    ties += (p[[x, d]] - p[[y, d]]).powi(2);
                }
            }
        }
    }
    oracle_loss_ratings(model, srn.ratings(), lambda) + 0.5 * mu * ties
}
