//! Training objectives and their gradients.
//!
//! The ratings-only objective is
//!
//! ```text
//! L(P, Q) = 1/2 * sum_{(x,j) observed} (R_xj - p_x . q_j)^2 + lambda/2 * (|P|_F^2 + |Q|_F^2)
//! ```
//!
//! and the social objective adds `mu/2 * sum_x sum_{y in N(x)} |p_x - p_y|^2`.
//! The penalty is squared so that its derivative is the linear pull
//! `mu * (p_x - p_y)`.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2, Zip};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factorization::FactorModel;
use crate::srn::{RatingsTable, SocialGraph, SocialRatingNetwork, UserId};

/// Which social term `grad_p` uses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SocialGradient {
    /// Only the outgoing pull `mu * sum_{y in N(x)} (p_x - p_y)`.
    #[default]
    Printed,
    /// Outgoing plus incoming pull; the exact gradient of the social objective.
    Full,
}

impl FromStr for SocialGradient {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "printed" => Ok(Self::Printed),
            "full" => Ok(Self::Full),
            other => Err(Error::InvalidParam(format!(
                "social gradient mode {other:?} (expected printed|full)"
            ))),
        }
    }
}

impl fmt::Display for SocialGradient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Printed => "printed",
            Self::Full => "full",
        })
    }
}

/// Ratings-only loss: squared residuals over observed entries plus Tikhonov
/// regularization.
pub fn loss_ratings(model: &FactorModel, ratings: &RatingsTable, lambda: f64) -> Result<f64> {
    check_ratings_dims(model, ratings)?;
    Ok(ratings_loss_unchecked(model, ratings, lambda))
}

/// Social loss: [`loss_ratings`] plus the squared tie-distance penalty.
pub fn loss_social(
    model: &FactorModel,
    srn: &SocialRatingNetwork,
    lambda: f64,
    mu: f64,
) -> Result<f64> {
    check_ratings_dims(model, srn.ratings())?;
    let base = ratings_loss_unchecked(model, srn.ratings(), lambda);
    if mu == 0.0 || srn.social().is_empty() {
        return Ok(base);
    }
    Ok(base + 0.5 * mu * tie_distance_sq_sum(model, srn.social()))
}

/// `sum_x sum_{y in N(x)} |p_x - p_y|^2`.
pub fn tie_distance_sq_sum(model: &FactorModel, social: &SocialGraph) -> f64 {
    let p = model.p();
    social
        .edges()
        .iter()
        .map(|&(x, y)| {
            p.row(x.0)
                .iter()
                .zip(p.row(y.0))
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
        })
        .sum()
}

/// Gradient of the social objective with respect to the user factors.
pub fn grad_p(
    model: &FactorModel,
    srn: &SocialRatingNetwork,
    lambda: f64,
    mu: f64,
    mode: SocialGradient,
) -> Result<Array2<f64>> {
    check_ratings_dims(model, srn.ratings())?;
    let objective = Objective::social(srn, lambda, mu, mode);
    let (gp, _) = objective.gradients(model);
    Ok(gp)
}

/// Gradient of either objective with respect to the item factors (the social
/// term does not involve them).
pub fn grad_q(model: &FactorModel, ratings: &RatingsTable, lambda: f64) -> Result<Array2<f64>> {
    check_ratings_dims(model, ratings)?;
    let objective = Objective::ratings(ratings, lambda);
    let (_, gq) = objective.gradients(model);
    Ok(gq)
}

/// The social part of `grad_p` alone, without the `mu` factor:
/// row `x` is `sum_{y in N(x)} (p_x - p_y)`, plus `sum_{z : x in N(z)} (p_x - p_z)`
/// in full mode.
pub fn social_pull(model: &FactorModel, social: &SocialGraph, mode: SocialGradient) -> Array2<f64> {
    let mut out = Array2::zeros(model.p().raw_dim());
    let reverse = (mode == SocialGradient::Full).then(|| social.reverse_adjacency());
    accumulate_social(model, social, reverse.as_deref(), 1.0, &mut out);
    out
}

/// A fully bound objective, reused across training iterations.
#[derive(Debug)]
pub struct Objective<'a> {
    ratings: &'a RatingsTable,
    social: Option<SocialTerm<'a>>,
    lambda: f64,
}

#[derive(Debug)]
struct SocialTerm<'a> {
    graph: &'a SocialGraph,
    reverse: Option<Vec<Vec<UserId>>>,
    mu: f64,
}

impl<'a> Objective<'a> {
    /// Ratings-only objective. Never looks at a social graph.
    pub fn ratings(ratings: &'a RatingsTable, lambda: f64) -> Self {
        Self {
            ratings,
            social: None,
            lambda,
        }
    }

    /// Social objective. With `mu == 0` or no ties this is the ratings-only
    /// objective exactly.
    pub fn social(
        srn: &'a SocialRatingNetwork,
        lambda: f64,
        mu: f64,
        mode: SocialGradient,
    ) -> Self {
        let graph = srn.social();
        let social = (mu != 0.0 && !graph.is_empty()).then(|| SocialTerm {
            graph,
            reverse: (mode == SocialGradient::Full).then(|| graph.reverse_adjacency()),
            mu,
        });
        Self {
            ratings: srn.ratings(),
            social,
            lambda,
        }
    }

    pub fn ratings_table(&self) -> &RatingsTable {
        self.ratings
    }

    pub fn check_model(&self, model: &FactorModel) -> Result<()> {
        check_ratings_dims(model, self.ratings)
    }

    pub fn loss(&self, model: &FactorModel) -> f64 {
        let base = ratings_loss_unchecked(model, self.ratings, self.lambda);
        match &self.social {
            None => base,
            Some(term) => base + 0.5 * term.mu * tie_distance_sq_sum(model, term.graph),
        }
    }

    /// Both gradients at the same iterate.
    pub fn gradients(&self, model: &FactorModel) -> (Array2<f64>, Array2<f64>) {
        let mut gp = Array2::zeros(model.p().raw_dim());
        let mut gq = Array2::zeros(model.q().raw_dim());
        self.gradients_into(model, &mut gp, &mut gq);
        (gp, gq)
    }

    pub(crate) fn gradients_into(
        &self,
        model: &FactorModel,
        gp: &mut Array2<f64>,
        gq: &mut Array2<f64>,
    ) {
        let (p, q) = (model.p(), model.q());
        gp.fill(0.0);
        gq.fill(0.0);
        for r in self.ratings.entries() {
            let (x, j) = (r.user.0, r.item.0);
            let px = p.row(x);
            let qj = q.row(j);
            let err = px.dot(&qj) - r.value;
            gp.row_mut(x).scaled_add(err, &qj);
            gq.row_mut(j).scaled_add(err, &px);
        }
        gp.scaled_add(self.lambda, p);
        gq.scaled_add(self.lambda, q);
        if let Some(term) = &self.social {
            accumulate_social(model, term.graph, term.reverse.as_deref(), term.mu, gp);
        }
    }
}

fn accumulate_social(
    model: &FactorModel,
    graph: &SocialGraph,
    reverse: Option<&[Vec<UserId>]>,
    mu: f64,
    out: &mut Array2<f64>,
) {
    let p = model.p();
    let mut pull = Array1::zeros(model.k());
    let mut back = Array1::zeros(model.k());
    for x in 0..p.nrows() {
        let px = p.row(x);
        pull.fill(0.0);
        for y in graph.neighborhood(UserId(x)).expect("x in range") {
            Zip::from(&mut pull)
                .and(&px)
                .and(&p.row(y.0))
                .for_each(|acc, &a, &b| *acc += a - b);
        }
        out.row_mut(x).scaled_add(mu, &pull);
        if let Some(rev) = reverse {
            back.fill(0.0);
            for z in &rev[x] {
                Zip::from(&mut back)
                    .and(&px)
                    .and(&p.row(z.0))
                    .for_each(|acc, &a, &b| *acc += a - b);
            }
            out.row_mut(x).scaled_add(mu, &back);
        }
    }
}

fn ratings_loss_unchecked(model: &FactorModel, ratings: &RatingsTable, lambda: f64) -> f64 {
    let (p, q) = (model.p(), model.q());
    let residual: f64 = ratings
        .entries()
        .iter()
        .map(|r| {
            let e = r.value - p.row(r.user.0).dot(&q.row(r.item.0));
            e * e
        })
        .sum();
    let norms = p.iter().map(|v| v * v).sum::<f64>() + q.iter().map(|v| v * v).sum::<f64>();
    0.5 * residual + 0.5 * lambda * norms
}

fn check_ratings_dims(model: &FactorModel, ratings: &RatingsTable) -> Result<()> {
    if model.n_users() != ratings.n_users() || model.n_items() != ratings.n_items() {
        return Err(Error::DimensionMismatch(format!(
            "model is {}x{} but ratings are {}x{}",
            model.n_users(),
            model.n_items(),
            ratings.n_users(),
            ratings.n_items()
        )));
    }
    Ok(())
}
