//! Social-regularized matrix factorization for collaborative filtering.
//!
//! Users and items are mapped to `k`-dimensional latent vectors whose inner
//! products approximate observed ratings. The social variant adds a penalty
//! pulling the vectors of tied users together, so friends end up close in
//! the latent space. Training is full-batch gradient descent with a
//! step-halving safeguard.
//!
//! ```no_run
//! use socmf::prelude::*;
//!
//! let srn = generate_synthetic(&SynthParams::default())?;
//! let holdout = Holdout::new(&srn, &SplitSpec::default())?;
//! let hp = Hyperparams { k: 4, ..Hyperparams::default() };
//! let (score, _model, _trace) = holdout.factor(Method::Oa, &hp, &EvalSettings::default())?;
//! println!("OA rmse = {:.4}", score.rmse);
//! # Ok::<(), socmf::Error>(())
//! ```
//!
//! The runnable programs under `examples/` cover each capability.

pub mod baselines;
pub mod cli;
pub mod config;
pub mod error;
pub mod evaluation;
pub mod factorization;
pub mod io;
pub mod recommend;
pub mod srn;
pub mod synth;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::baselines::{fit_naive, predict_naive, NaiveModel};
    pub use crate::error::{Error, Result};
    pub use crate::evaluation::{
        k_table, mean_tie_distance, mu_table, rmse, split, sweep_k, sweep_mu, EvalReport,
        EvalSettings, Holdout, Method, Predictor, Score, SplitSpec,
    };
    pub use crate::factorization::{
        grad_p, grad_q, loss_ratings, loss_social, train, train_ratings, FactorModel, Hyperparams,
        SocialGradient, StopReason, TrainTrace, Trainer,
    };
    pub use crate::recommend::{recommend, Recommendation};
    pub use crate::srn::{
        build_srn, ItemId, Labels, RatingScale, RatingsTable, SocialGraph, SocialRatingNetwork,
        SrnStats, UserId,
    };
    pub use crate::synth::{generate_synthetic, generate_with_truth, SynthParams, SyntheticSrn};
}
