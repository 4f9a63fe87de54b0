//! Probabilistic-voting model of checks and balances versus executive
//! special powers, with the tooling around it: the fixed experimental design,
//! numerical verification of the model's comparative statics, a synthetic
//! session generator, and the inference pipeline used on session data.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dataset;
pub mod model;
pub mod proposition;
pub mod rng;
pub mod scalar;
pub mod scenario;
pub mod stats;
pub mod synth;

pub use model::{
    implemented_policy, is_gridlock, net_gain_sp, posterior_q, prob_sp, propose, strategic_proposal, Institution,
    ModelError, ModelParams, Policy, PoliticianType, ScenarioProfile, ShockDistribution, ShockFamily, State,
};
pub use scalar::{Real, Scalar};

/// Exact rational scalar.
pub type Exact = num_rational::Ratio<i64>;

pub type Params = ModelParams<f64>;
pub type ExactParams = ModelParams<Exact>;
pub type Shock = ShockDistribution<f64>;
pub type Grid = proposition::SweepGrid<f64>;
