//! Stage 2: querying a semantic sampler several times per decision and
//! turning the answers into a smoothed distribution over options.

mod answer;
mod dirichlet;
mod http;
mod momentum;
mod sampler;
mod synthetic;

pub use answer::{format_answer, parse_answer};
pub use dirichlet::{dirichlet_aggregate, majority_vote, sample_weights, DirichletAccumulator, DEFAULT_ALPHA0};
pub use http::{build_messages, ChatMessage, HttpChatConfig, HttpChatSampler, API_KEY_ENV};
pub use momentum::{MomentumMemory, DEFAULT_MOMENTUM};
pub use sampler::{
    sample_batch, Sample, SampleBatch, SampleRequest, SamplerConfig, SamplerError, SemanticSampler, DEFAULT_HINTS,
    DEFAULT_SAMPLES, DEFAULT_TEMPERATURES,
};
pub use synthetic::{AccuracySchedule, BetaShape, SyntheticSampler, SyntheticSamplerConfig};
