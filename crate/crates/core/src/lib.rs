//! Training-free sequential preference learning.
//!
//! A symbolic engine tracks an exact posterior over a finite set of linear
//! preference vectors; a semantic sampler (an LLM or a seeded stand-in) is
//! queried several times per decision and its answers are pooled with
//! confidence-weighted Dirichlet counts and smoothed across rounds; the two
//! predictions are combined with weights derived from their normalized
//! entropies.

pub mod aggregation;
pub mod belief;
pub mod choice;
pub mod error;
pub mod fusion;
pub mod math;
pub mod tasks;
pub mod types;

pub use belief::{Belief, BeliefEngine, BeliefEngineConfig};
pub use choice::{utility, ChoiceModel};
pub use error::{CoreError, Result};
pub use fusion::{fuse, normalized_entropy, FusionConfig, FusionDiagnostics, FusionMode, FusionOutcome};
pub use types::{
    normalize, FeatureVector, Hypothesis, HypothesisSet, InteractionHistory, OptionDistribution, OptionSet, Round,
};
