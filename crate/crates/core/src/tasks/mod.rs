//! Task suite: structured item domains, the hypothesis grid, simulated users
//! and seeded episodes.

mod episode;
mod hypotheses;
mod schema;
mod user;

pub use episode::{stream_rng, Episode, EpisodeSpec, Stream};
pub use hypotheses::{build_hypothesis_set, preference_grid, sample_preference, TruthPolicy, PREFERENCE_LEVELS};
pub use schema::{
    Attribute, DomainKind, DomainSchema, ParseFailure, ParsedOption, MAX_SYNTHETIC_DIM, MIN_SYNTHETIC_DIM,
};
pub use user::SimulatedUser;
