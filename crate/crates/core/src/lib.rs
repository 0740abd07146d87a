//! Lifelong inverse reinforcement learning.
//!
//! A maximum-entropy IRL base learner fits per-task reward parameters from
//! demonstrations; the lifelong learner factors them through a shared
//! latent basis that is refined online as tasks arrive. Includes the
//! Objectworld and Highway benchmark generators, evaluation metrics and an
//! experiment runner.

pub mod elirl;
pub mod envs;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod linalg;
pub mod maxent;
pub mod mdp;
pub mod seed;

pub use elirl::{
    encode_task, init_basis, learn_from_estimates, learn_task, reoptimize_coefficients, reward_for_task, update_basis, BasisInit,
    HyperParams, LearnOptions, SharedBasis, TaskKnowledge,
};
pub use error::{Error, Result};
pub use maxent::{
    estimate_hessian, fit_maxent, maxent_gradient, soft_policy, state_visitations, DemoSet, FitOptions, HessianEstimate,
    MaxEntFitReport,
};
pub use mdp::{value_iteration, Policy, RewardParams, TabularMdp, Trajectory};
pub use seed::Seed;
