use log::{debug, warn};
use ndarray::{Array2, Zip};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factorization::{FactorModel, Objective, SocialGradient};
use crate::srn::{RatingsTable, SocialRatingNetwork};

/// Step-size halvings the safeguard may apply within one iteration.
pub const MAX_HALVINGS: u32 = 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    /// Latent dimension.
    pub k: usize,
    /// Tikhonov weight.
    pub lambda: f64,
    /// Social penalty weight.
    pub mu: f64,
    /// Initial learning rate.
    pub beta: f64,
    pub max_iters: usize,
    /// Stop once the loss improves by less than this between iterations.
    pub epsilon: f64,
    pub seed: u64,
    /// Initial entries are uniform on `[0, init_scale)`.
    pub init_scale: f64,
    pub social_gradient: SocialGradient,
    /// Clamp negative factor entries to zero after every update.
    pub nonneg_projection: bool,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            k: 10,
            lambda: 0.001,
            mu: 1e-3,
            beta: 0.005,
            max_iters: 5000,
            epsilon: 1e-8,
            seed: 42,
            init_scale: 0.1,
            social_gradient: SocialGradient::Printed,
            nonneg_projection: false,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParam(msg));
        if self.k < 1 {
            return bad("k must be at least 1".into());
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad(format!(
                "lambda must be finite and >= 0, got {}",
                self.lambda
            ));
        }
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return bad(format!("mu must be finite and >= 0, got {}", self.mu));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return bad(format!("beta must be finite and > 0, got {}", self.beta));
        }
        if self.epsilon.is_nan() || self.epsilon < 0.0 {
            return bad(format!("epsilon must be >= 0, got {}", self.epsilon));
        }
        if !(self.init_scale >= 0.0 && self.init_scale.is_finite()) {
            return bad(format!(
                "init_scale must be finite and >= 0, got {}",
                self.init_scale
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    BudgetExhausted,
    Converged,
    /// No step size down to `beta / 2^MAX_HALVINGS` lowered the loss.
    Stalled,
}

/// One safeguard intervention.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Backtrack {
    pub iteration: usize,
    pub halvings: u32,
    pub beta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainTrace {
    pub initial_loss: f64,
    /// Loss after each executed iteration.
    pub losses: Vec<f64>,
    pub stop: StopReason,
    pub backtracks: Vec<Backtrack>,
    pub final_beta: f64,
}

impl TrainTrace {
    pub fn iterations(&self) -> usize {
        self.losses.len()
    }

    pub fn final_loss(&self) -> f64 {
        self.losses.last().copied().unwrap_or(self.initial_loss)
    }

    pub fn is_non_increasing(&self) -> bool {
        std::iter::once(self.initial_loss)
            .chain(self.losses.iter().copied())
            .collect::<Vec<_>>()
            .windows(2)
            .all(|w| w[1] <= w[0])
    }
}

/// Full-batch gradient descent driven one iteration at a time.
///
/// Each iteration evaluates both gradients at the current iterate, then
/// moves `P` and `Q` together. If the step raises the loss (or makes it
/// non-finite) it is discarded, the learning rate is halved for good, and
/// the step is retried.
pub struct Trainer<'a> {
    objective: Objective<'a>,
    hp: Hyperparams,
    model: FactorModel,
    candidate: FactorModel,
    grad_p: Array2<f64>,
    grad_q: Array2<f64>,
    beta: f64,
    loss: f64,
    trace: TrainTrace,
    done: Option<StopReason>,
}

impl<'a> Trainer<'a> {
    pub fn new(objective: Objective<'a>, hp: &Hyperparams) -> Result<Self> {
        hp.validate()?;
        let ratings = objective.ratings_table();
        let model = FactorModel::init(ratings.n_users(), ratings.n_items(), hp);
        Self::with_model(objective, hp, model)
    }

    /// Starts from a given model instead of a random one.
    pub fn with_model(
        objective: Objective<'a>,
        hp: &Hyperparams,
        model: FactorModel,
    ) -> Result<Self> {
        hp.validate()?;
        objective.check_model(&model)?;
        if model.k() != hp.k {
            return Err(Error::DimensionMismatch(format!(
                "model has k={} but hyperparameters say k={}",
                model.k(),
                hp.k
            )));
        }
        let loss = objective.loss(&model);
        if !loss.is_finite() {
            return Err(Error::Divergence {
                iteration: 0,
                reason: format!("initial loss is {loss}"),
            });
        }
        let done = (hp.max_iters == 0).then_some(StopReason::BudgetExhausted);
        Ok(Self {
            grad_p: Array2::zeros(model.p().raw_dim()),
            grad_q: Array2::zeros(model.q().raw_dim()),
            candidate: model.clone(),
            model,
            objective,
            beta: hp.beta,
            loss,
            trace: TrainTrace {
                initial_loss: loss,
                losses: Vec::new(),
                stop: StopReason::BudgetExhausted,
                backtracks: Vec::new(),
                final_beta: hp.beta,
            },
            hp: hp.clone(),
            done,
        })
    }

    pub fn model(&self) -> &FactorModel {
        &self.model
    }

    pub fn loss(&self) -> f64 {
        self.loss
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn trace(&self) -> &TrainTrace {
        &self.trace
    }

    pub fn is_done(&self) -> bool {
        self.done.is_some()
    }

    /// Runs one iteration. Returns the new loss, or `None` once training has
    /// stopped.
    pub fn step(&mut self) -> Result<Option<f64>> {
        if self.done.is_some() {
            return Ok(None);
        }
        let iteration = self.trace.losses.len();
        self.objective
            .gradients_into(&self.model, &mut self.grad_p, &mut self.grad_q);

        let mut halvings = 0;
        let new_loss = loop {
            self.propose();
            let candidate_loss = self.objective.loss(&self.candidate);
            if candidate_loss.is_finite() && candidate_loss <= self.loss {
                break candidate_loss;
            }
            if halvings == MAX_HALVINGS {
                if !candidate_loss.is_finite() {
                    return Err(Error::Divergence {
                        iteration,
                        reason: format!(
                            "loss is {candidate_loss} after {MAX_HALVINGS} step halvings"
                        ),
                    });
                }
                warn!(
                    "iteration {iteration}: no descent after {MAX_HALVINGS} halvings (beta={:e}); stopping",
                    self.beta
                );
                self.record_backtrack(iteration, halvings);
                return Ok(self.finish(StopReason::Stalled));
            }
            self.beta *= 0.5;
            halvings += 1;
        };
        if halvings > 0 {
            self.record_backtrack(iteration, halvings);
        }

        std::mem::swap(&mut self.model, &mut self.candidate);
        let improvement = self.loss - new_loss;
        self.loss = new_loss;
        self.trace.losses.push(new_loss);

        if improvement < self.hp.epsilon {
            self.finish(StopReason::Converged);
        } else if self.trace.losses.len() >= self.hp.max_iters {
            self.finish(StopReason::BudgetExhausted);
        }
        Ok(Some(new_loss))
    }

    /// Steps until a stop condition and returns the model and trace.
    pub fn run(mut self) -> Result<(FactorModel, TrainTrace)> {
        while self.step()?.is_some() {}
        Ok(self.into_parts())
    }

    pub fn into_parts(self) -> (FactorModel, TrainTrace) {
        (self.model, self.trace)
    }

    fn propose(&mut self) {
        let beta = self.beta;
        let nonneg = self.hp.nonneg_projection;
        let (cp, cq) = self.candidate.factors_mut();
        for (dst, src, grad) in [
            (cp, self.model.p(), &self.grad_p),
            (cq, self.model.q(), &self.grad_q),
        ] {
            Zip::from(dst).and(src).and(grad).for_each(|d, &s, &g| {
                let v = s - beta * g;
                *d = if nonneg && v < 0.0 { 0.0 } else { v };
            });
        }
    }

    fn record_backtrack(&mut self, iteration: usize, halvings: u32) {
        debug!(
            "iteration {iteration}: safeguard halved beta {halvings} time(s), now {:e}",
            self.beta
        );
        self.trace.backtracks.push(Backtrack {
            iteration,
            halvings,
            beta: self.beta,
        });
    }

    fn finish(&mut self, reason: StopReason) -> Option<f64> {
        self.done = Some(reason);
        self.trace.stop = reason;
        self.trace.final_beta = self.beta;
        None
    }
}

/// Trains on the social objective of `srn`.
pub fn train(srn: &SocialRatingNetwork, hp: &Hyperparams) -> Result<(FactorModel, TrainTrace)> {
    let objective = Objective::social(srn, hp.lambda, hp.mu, hp.social_gradient);
    Trainer::new(objective, hp)?.run()
}

/// Trains on ratings alone; `hp.mu` and `hp.social_gradient` are ignored.
pub fn train_ratings(
    ratings: &RatingsTable,
    hp: &Hyperparams,
) -> Result<(FactorModel, TrainTrace)> {
    Trainer::new(Objective::ratings(ratings, hp.lambda), hp)?.run()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factorization::loss_social;
    use crate::srn::{build_srn, SocialGraph};

    fn tiny() -> SocialRatingNetwork {
        let ratings = RatingsTable::from_entries(
            3,
            3,
            [
                (0, 0, 4.0),
                (0, 1, 2.0),
                (1, 1, 3.0),
                (2, 0, 5.0),
                (2, 2, 1.0),
            ],
        )
        .unwrap();
        let social = SocialGraph::from_edges(3, [(0, 1), (1, 0), (1, 2)]).unwrap();
        build_srn(ratings, social).unwrap()
    }

    fn tiny_hp() -> Hyperparams {
        Hyperparams {
            k: 2,
            beta: 0.01,
            lambda: 0.001,
            max_iters: 500,
            ..Hyperparams::default()
        }
    }

    #[test]
    fn zero_budget_returns_initial_model() {
        let srn = tiny();
        let hp = Hyperparams {
            max_iters: 0,
            ..tiny_hp()
        };
        let (model, trace) = train(&srn, &hp).unwrap();
        assert_eq!(model, FactorModel::init(3, 3, &hp));
        assert!(trace.losses.is_empty());
        assert_eq!(trace.stop, StopReason::BudgetExhausted);
    }

    #[test]
    fn tiny_instance_descends() {
        let (_, trace) = train(&tiny(), &tiny_hp()).unwrap();
        assert!(trace.is_non_increasing());
        assert!(trace.final_loss() < trace.initial_loss);
        assert_eq!(trace.iterations(), 500);
    }

    #[test]
    fn trace_matches_recomputed_loss() {
        let srn = tiny();
        let hp = tiny_hp();
        let (model, trace) = train(&srn, &hp).unwrap();
        let direct = loss_social(&model, &srn, hp.lambda, hp.mu).unwrap();
        assert_eq!(direct, trace.final_loss());
    }

    #[test]
    fn mu_zero_equals_ratings_only() {
        let srn = tiny();
        let hp = Hyperparams {
            mu: 0.0,
            ..tiny_hp()
        };
        let (a, ta) = train(&srn, &hp).unwrap();
        let (b, tb) = train_ratings(srn.ratings(), &hp).unwrap();
        assert_eq!(a, b);
        assert_eq!(ta, tb);
    }

    #[test]
    fn oversized_step_triggers_safeguard() {
        let hp = Hyperparams {
            beta: 10.0,
            init_scale: 1.0,
            max_iters: 50,
            ..tiny_hp()
        };
        let (model, trace) = train(&tiny(), &hp).unwrap();
        assert!(!trace.backtracks.is_empty());
        assert!(trace.final_beta < 10.0);
        assert!(trace.is_non_increasing());
        assert!(model.is_finite());
    }

    #[test]
    fn convergence_stops_early() {
        let hp = Hyperparams {
            epsilon: 1e-3,
            max_iters: 100_000,
            ..tiny_hp()
        };
        let (_, trace) = train(&tiny(), &hp).unwrap();
        assert_eq!(trace.stop, StopReason::Converged);
        assert!(trace.iterations() < 100_000);
    }

    #[test]
    fn nonneg_projection_keeps_factors_nonnegative() {
        let hp = Hyperparams {
            nonneg_projection: true,
            ..tiny_hp()
        };
        let (model, trace) = train(&tiny(), &hp).unwrap();
        assert!(model.p().iter().chain(model.q().iter()).all(|&v| v >= 0.0));
        assert!(trace.is_non_increasing());
    }

    #[test]
    fn invalid_hyperparams_rejected() {
        for hp in [
            Hyperparams { k: 0, ..tiny_hp() },
            Hyperparams {
                beta: 0.0,
                ..tiny_hp()
            },
            Hyperparams {
                lambda: -1.0,
                ..tiny_hp()
            },
            Hyperparams {
                mu: f64::NAN,
                ..tiny_hp()
            },
        ] {
            assert!(matches!(train(&tiny(), &hp), Err(Error::InvalidParam(_))));
        }
    }

    #[test]
    fn non_finite_start_is_divergence() {
        let hp = Hyperparams {
            init_scale: 1e300,
            ..tiny_hp()
        };
        assert!(matches!(
            train(&tiny(), &hp),
            Err(Error::Divergence { iteration: 0, .. })
        ));
    }
}
