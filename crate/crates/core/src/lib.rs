//! Boosted ensembles of decision stumps whose members are selected by
//! minimizing a QUBO (quadratic unconstrained binary optimization) objective.
//!
//! Three trainers share the same stump pool machinery:
//!
//! * [`boosting::train_alpha_qboost`] balances learner/label correlation
//!   against learner/learner correlation with a single weight `alpha` and
//!   tunes `alpha` on a validation set with a gradient-free search.
//! * [`boosting::train_qboost_lambda`] and [`boosting::train_qboost_select`]
//!   are the regularized predecessor and its fixed-ensemble-size variant.
//! * [`boosting::train_adaboost`] is the classical discrete AdaBoost baseline.
//!
//! QUBOs are minimized either exactly ([`solve::solve_exhaustive`], up to 24
//! variables) or with a seeded simulated annealer ([`solve::solve_anneal`]).

pub mod alpha;
pub mod bench;
pub mod boosting;
pub mod config;
pub mod data;
pub mod error;
pub mod metrics;
pub mod qubo;
pub mod rng;
pub mod solve;
pub mod stump;

pub use error::{Error, Result};

/// Version string embedded in reports.
pub const VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));
