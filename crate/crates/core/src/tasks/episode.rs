//! Seeded episode generation.
//!
//! A master seed is split into independent ChaCha streams so that every agent
//! variant run on the same seed sees the same user, option sets and choices.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::hypotheses::{build_hypothesis_set, sample_preference, TruthPolicy};
use super::schema::{DomainKind, DomainSchema};
use super::user::SimulatedUser;
use crate::choice::DEFAULT_BETA;
use crate::error::{CoreError, Result};
use crate::types::{HypothesisSet, OptionSet};

/// Independent random streams derived from one master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Episode = 0,
    UserChoice = 1,
    Sampler = 2,
    Hypotheses = 3,
}

pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EpisodeSpec {
    pub domain: DomainKind,
    /// Dimensionality; only used by the synthetic domain.
    pub d: Option<usize>,
    pub seed: u64,
    /// Interaction rounds.
    pub rounds: usize,
    /// Options per round.
    pub k: usize,
    pub held_out_count: usize,
    pub well_specified: bool,
    /// User inverse temperature; `null` makes the user deterministic.
    pub beta_user: Option<f64>,
    /// Subsample the hypothesis grid to at most this many entries.
    pub max_hypotheses: Option<usize>,
}

impl Default for EpisodeSpec {
    fn default() -> Self {
        Self {
            domain: DomainKind::Flight,
            d: None,
            seed: 0,
            rounds: 5,
            k: 3,
            held_out_count: 50,
            well_specified: true,
            beta_user: Some(DEFAULT_BETA),
            max_hypotheses: None,
        }
    }
}

impl EpisodeSpec {
    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(CoreError::InvalidConfig {
                field: "k",
                reason: format!("need at least two options per round, got {}", self.k),
            });
        }
        if let Some(b) = self.beta_user {
            if !(b.is_finite() && b > 0.0) {
                return Err(CoreError::InvalidConfig {
                    field: "beta_user",
                    reason: format!("must be positive, got {b}"),
                });
            }
        }
        if self.max_hypotheses == Some(0) {
            return Err(CoreError::InvalidConfig {
                field: "max_hypotheses",
                reason: "must be at least 1".into(),
            });
        }
        self.schema().map(|_| ())
    }

    pub fn schema(&self) -> Result<DomainSchema> {
        DomainSchema::from_kind(self.domain, self.d)
    }
}

/// Everything about an episode that does not depend on the agent.
#[derive(Debug, Clone, PartialEq)]
pub struct Episode {
    pub spec: EpisodeSpec,
    pub schema: DomainSchema,
    pub hypotheses: HypothesisSet,
    pub user: SimulatedUser,
    /// Index of the user's vector in `hypotheses`, if present.
    pub true_index: Option<usize>,
    pub rounds: Vec<OptionSet>,
    /// The user's 0-based choice in each interaction round.
    pub choices: Vec<usize>,
    pub held_out: Vec<OptionSet>,
    /// The user's preferred option in each held-out set.
    pub held_out_labels: Vec<usize>,
}

impl Episode {
    /// Pure function of the spec.
    pub fn generate(spec: &EpisodeSpec) -> Result<Self> {
        spec.validate()?;
        let schema = spec.schema()?;
        let d = schema.dim();

        let mut content = stream_rng(spec.seed, Stream::Episode);
        let truth = sample_preference(d, &mut content);
        let rounds: Vec<OptionSet> = (0..spec.rounds)
            .map(|_| schema.generate_option_set(spec.k, &mut content))
            .collect();
        let held_out: Vec<OptionSet> = (0..spec.held_out_count)
            .map(|_| schema.generate_option_set(spec.k, &mut content))
            .collect();

        let policy = if spec.well_specified {
            TruthPolicy::Retain
        } else {
            TruthPolicy::Exclude
        };
        let mut hyp_rng = stream_rng(spec.seed, Stream::Hypotheses);
        let hypotheses = build_hypothesis_set(d, spec.max_hypotheses, Some((&truth, policy)), &mut hyp_rng);
        let true_index = hypotheses.position(&truth);

        let user = SimulatedUser::new(truth, spec.beta_user);
        let mut choice_rng = stream_rng(spec.seed, Stream::UserChoice);
        let choices = rounds.iter().map(|x| user.choose(x, &mut choice_rng)).collect();
        let held_out_labels = held_out.iter().map(|x| user.preferred(x)).collect();

        Ok(Self {
            spec: spec.clone(),
            schema,
            hypotheses,
            user,
            true_index,
            rounds,
            choices,
            held_out,
            held_out_labels,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_deterministic() {
        let spec = EpisodeSpec {
            seed: 17,
            ..Default::default()
        };
        assert_eq!(Episode::generate(&spec).unwrap(), Episode::generate(&spec).unwrap());
        let other = Episode::generate(&EpisodeSpec { seed: 18, ..spec }).unwrap();
        assert_ne!(
            other.rounds,
            Episode::generate(&EpisodeSpec {
                seed: 17,
                ..Default::default()
            })
            .unwrap()
            .rounds
        );
    }

    #[test]
    fn default_episode_shape() {
        let ep = Episode::generate(&EpisodeSpec::default()).unwrap();
        assert_eq!(ep.rounds.len(), 5);
        assert_eq!(ep.choices.len(), 5);
        assert_eq!(ep.held_out.len(), 50);
        assert_eq!(ep.hypotheses.len(), 625);
        let idx = ep.true_index.unwrap();
        assert_eq!(ep.hypotheses.get(idx).unwrap().weights, ep.user.weights);
        assert!(ep.rounds.iter().all(|x| x.k() == 3));
    }

    #[test]
    fn misspecified_episode_excludes_truth() {
        let spec = EpisodeSpec {
            well_specified: false,
            domain: DomainKind::Synthetic,
            d: Some(3),
            ..Default::default()
        };
        let ep = Episode::generate(&spec).unwrap();
        assert_eq!(ep.true_index, None);
        assert_eq!(ep.hypotheses.len(), 124);
    }

    #[test]
    fn spec_validation_names_fields() {
        let bad = EpisodeSpec {
            k: 1,
            ..Default::default()
        };
        assert!(matches!(
            bad.validate(),
            Err(CoreError::InvalidConfig { field: "k", .. })
        ));
        // Zero rounds is the prior-only edge case.
        assert!(EpisodeSpec {
            rounds: 0,
            ..Default::default()
        }
        .validate()
        .is_ok());
        let bad = EpisodeSpec {
            domain: DomainKind::Synthetic,
            ..Default::default()
        };
        assert!(matches!(
            bad.validate(),
            Err(CoreError::InvalidConfig { field: "d", .. })
        ));
    }

    #[test]
    fn spec_reads_from_json() {
        let spec: EpisodeSpec = serde_json::from_str(
            r#"{"domain": "hotel", "rounds": 4, "k": 4, "seed": 3, "held_out_count": 10,
                "well_specified": true, "beta_user": null}"#,
        )
        .unwrap();
        assert_eq!(spec.domain, DomainKind::Hotel);
        assert_eq!(spec.beta_user, None);
        assert!(serde_json::from_str::<EpisodeSpec>(r#"{"domian": "hotel"}"#).is_err());
    }

    #[test]
    fn streams_are_independent() {
        use rand::Rng;
        let mut a = stream_rng(5, Stream::Episode);
        let mut b = stream_rng(5, Stream::UserChoice);
        let xa: u64 = a.random();
        let xb: u64 = b.random();
        assert_ne!(xa, xb);
    }
}
