//! Latent factor model, objectives and the gradient-descent trainer.

mod model;
mod objective;
mod train;

pub use model::FactorModel;
pub use objective::{
    grad_p, grad_q, loss_ratings, loss_social, social_pull, tie_distance_sq_sum, Objective,
    SocialGradient,
};
pub use train::{
    train, train_ratings, Backtrack, Hyperparams, StopReason, TrainTrace, Trainer, MAX_HALVINGS,
};
