//! Reward estimation from pairwise preference data.
//!
//! Annotator populations are mixtures of Bradley-Terry-Luce types over a set
//! of alternatives with context vectors. From their pairwise win rates the
//! crate fits a single reward function two ways: the standard regularized
//! MLE, and a weighted variant that scales each alternative by its Voronoi
//! measure in context space, which makes the fit robust to near-duplicate
//! alternatives.
//!
//! The main pipeline is
//! [`representative_matrix`]/[`empirical_matrix`] -> [`estimate_weights`] ->
//! [`solve`] -> [`analysis`], with [`experiments`] wiring the end-to-end
//! clone-robustness studies.

pub mod alternatives;
pub mod analysis;
pub mod btl;
pub mod error;
pub mod experiments;
pub mod files;
pub mod population;
pub mod sampling;
pub mod solver;
pub mod voronoi;
pub mod winrate;

pub use alternatives::{AlternativeSet, ContextVector};
pub use btl::{btl_win_prob, log_sigmoid, sigmoid};
pub use error::{Error, Result};
pub use population::{
    annotator_reward, population_win_prob, AnnotatorType, Population, PreferenceRecord,
    RewardField,
};
pub use sampling::{sample_comparison, sample_pair_dataset};
pub use solver::{gradient, objective, reward_bound, solve, RewardVector, SolveReport, SolverConfig};
pub use voronoi::{
    estimate_weights, integral_objective_estimate, project, self_pair_offset, unit_weights,
    SpaceBox, WeightMode, WeightVector,
};
pub use winrate::{empirical_matrix, representative_matrix, WinRateMatrix};
