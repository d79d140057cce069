//! Exact analysis of expected multiplicative rewards in Markov chains and
//! Markov decision processes.

pub mod error;
pub mod exactnum;
pub mod fixtures;
pub mod graph;
pub mod linalg;
pub mod mc;
pub mod mdp;
pub mod model;
pub mod sim;
pub mod ssp;

pub use error::{Error, Result};
pub use exactnum::{csri_compare, weighted_log_sign, CsriConfig, Rational, Sign, SuccinctProduct};
pub use mc::{mc_values, InfiniteWitness, McAnalysis, McReport, WitnessKind};
pub use mdp::{mdp_min_values_with, mdp_values, mdp_values_with, threshold, threshold_with, Budgets, PipelineReport, PipelineResult};
pub use model::{
    invert_rewards, parse_model, serialize_model, zero_reward_preprocess, ActionId, AnalysisMode, ExtendedValue,
    MdScheduler, Model, ModelBuilder, StateId,
};
pub use sim::{simulate_absorbing, SimStats};
pub use ssp::{mssp, mssp_with, SspResult};
