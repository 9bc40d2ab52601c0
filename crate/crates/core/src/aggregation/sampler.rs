use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::answer::parse_answer;
use crate::error::{CoreError, Result};
use crate::types::{InteractionHistory, OptionSet};

pub const DEFAULT_SAMPLES: usize = 5;
pub const DEFAULT_TEMPERATURES: [f64; 3] = [0.2, 0.7, 1.0];
pub const DEFAULT_HINTS: [&str; 4] = [
    "compare prices first",
    "consider all attributes",
    "weigh trade-offs explicitly",
    "recall prior user feedback",
];

#[derive(Debug, Error)]
pub enum SamplerError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("endpoint returned status {0}")]
    Status(u16),
    #[error("malformed response body: {0}")]
    Body(String),
}

/// Everything a sampler may look at for one query.
#[derive(Debug, Clone, Copy)]
pub struct SampleRequest<'a> {
    pub options: &'a OptionSet,
    pub history: &'a InteractionHistory,
    pub temperature: f64,
    pub hint: &'a str,
    /// 0-based position within the batch.
    pub sample_index: usize,
}

/// Anything that answers a query with free text ending in an answer line.
pub trait SemanticSampler {
    fn complete(&mut self, request: &SampleRequest<'_>) -> std::result::Result<String, SamplerError>;
}

impl<S: SemanticSampler + ?Sized> SemanticSampler for Box<S> {
    fn complete(&mut self, request: &SampleRequest<'_>) -> std::result::Result<String, SamplerError> {
        (**self).complete(request)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplerConfig {
    pub n_samples: usize,
    pub temperature_pool: Vec<f64>,
    pub hint_pool: Vec<String>,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            n_samples: DEFAULT_SAMPLES,
            temperature_pool: DEFAULT_TEMPERATURES.to_vec(),
            hint_pool: DEFAULT_HINTS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(CoreError::InvalidConfig {
                field: "n_samples",
                reason: "must be at least 1".into(),
            });
        }
        if self.temperature_pool.is_empty() || self.temperature_pool.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(CoreError::InvalidConfig {
                field: "temperature_pool",
                reason: "must be nonempty with positive entries".into(),
            });
        }
        if self.hint_pool.is_empty() {
            return Err(CoreError::InvalidConfig {
                field: "hint_pool",
                reason: "must be nonempty".into(),
            });
        }
        Ok(())
    }

    /// Temperature for 0-based sample `s`; the pool is cycled.
    pub fn temperature(&self, s: usize) -> f64 {
        self.temperature_pool[s % self.temperature_pool.len()]
    }

    /// Hint for 0-based sample `s`, aligned with the temperature index.
    pub fn hint(&self, s: usize) -> &str {
        &self.hint_pool[s % self.hint_pool.len()]
    }
}

/// One sampler answer. `prediction` is `None` when the response could not be
/// parsed or the call failed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub prediction: Option<usize>,
    pub confidence: f64,
}

impl Sample {
    pub fn valid(prediction: usize, confidence: f64) -> Self {
        assert!((0.0..=1.0).contains(&confidence), "confidence must lie in [0, 1]");
        Self {
            prediction: Some(prediction),
            confidence,
        }
    }

    pub fn failed() -> Self {
        Self {
            prediction: None,
            confidence: 0.0,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.prediction.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    samples: Vec<Sample>,
}

impl SampleBatch {
    pub fn new(samples: Vec<Sample>) -> Self {
        Self { samples }
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn valid_count(&self) -> usize {
        self.samples.iter().filter(|s| s.is_valid()).count()
    }

    pub fn valid(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.samples
            .iter()
            .filter_map(|s| s.prediction.map(|p| (p, s.confidence)))
    }
}

/// Queries the sampler `n_samples` times with cycled temperatures and hints.
///
/// A failed call or unparseable answer becomes a failed sample; the batch
/// always has exactly `n_samples` entries.
pub fn sample_batch<S: SemanticSampler + ?Sized>(
    sampler: &mut S,
    options: &OptionSet,
    history: &InteractionHistory,
    config: &SamplerConfig,
) -> SampleBatch {
    let k = options.k();
    let samples = (0..config.n_samples)
        .map(|s| {
            let request = SampleRequest {
                options,
                history,
                temperature: config.temperature(s),
                hint: config.hint(s),
                sample_index: s,
            };
            match sampler.complete(&request) {
                Ok(text) => match parse_answer(&text, k) {
                    Some((prediction, confidence)) => Sample::valid(prediction, confidence),
                    None => {
                        log::debug!("sample {s}: unparseable response");
                        Sample::failed()
                    }
                },
                Err(err) => {
                    log::warn!("sample {s}: {err}");
                    Sample::failed()
                }
            }
        })
        .collect();
    SampleBatch { samples }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::FeatureVector;

    struct Scripted {
        reply: &'static str,
        seen: Vec<(f64, String, usize)>,
    }

    impl SemanticSampler for Scripted {
        fn complete(&mut self, r: &SampleRequest<'_>) -> std::result::Result<String, SamplerError> {
            self.seen.push((r.temperature, r.hint.to_string(), r.sample_index));
            Ok(self.reply.to_string())
        }
    }

    struct Offline;

    impl SemanticSampler for Offline {
        fn complete(&mut self, _: &SampleRequest<'_>) -> std::result::Result<String, SamplerError> {
            Err(SamplerError::Transport("connection refused".into()))
        }
    }

    fn three_options() -> OptionSet {
        let fv = |v: f64| FeatureVector::new(vec![v]).unwrap();
        OptionSet::from_features(vec![fv(0.1), fv(0.5), fv(0.9)]).unwrap()
    }

    #[test]
    fn deterministic_stub_yields_full_batch() {
        let mut s = Scripted {
            reply: "Option 2 looks right. ANSWER: 2 CONFIDENCE: 0.9",
            seen: vec![],
        };
        let batch = sample_batch(
            &mut s,
            &three_options(),
            &InteractionHistory::new(),
            &SamplerConfig::default(),
        );
        assert_eq!(batch.len(), 5);
        assert_eq!(batch.valid_count(), 5);
        assert!(batch.samples().iter().all(|x| *x == Sample::valid(1, 0.9)));
    }

    #[test]
    fn garbage_yields_no_valid_samples() {
        let mut s = Scripted {
            reply: "I need more information.",
            seen: vec![],
        };
        let batch = sample_batch(
            &mut s,
            &three_options(),
            &InteractionHistory::new(),
            &SamplerConfig::default(),
        );
        assert_eq!(batch.len(), 5);
        assert_eq!(batch.valid_count(), 0);
    }

    #[test]
    fn transport_failures_never_abort_the_batch() {
        let batch = sample_batch(
            &mut Offline,
            &three_options(),
            &InteractionHistory::new(),
            &SamplerConfig::default(),
        );
        assert_eq!(batch.len(), 5);
        assert_eq!(batch.valid_count(), 0);
    }

    #[test]
    fn temperatures_and_hints_cycle_on_the_sample_index() {
        let mut s = Scripted {
            reply: "ANSWER: 1 CONFIDENCE: 0.5",
            seen: vec![],
        };
        sample_batch(
            &mut s,
            &three_options(),
            &InteractionHistory::new(),
            &SamplerConfig::default(),
        );
        let temps: Vec<f64> = s.seen.iter().map(|x| x.0).collect();
        assert_eq!(temps, vec![0.2, 0.7, 1.0, 0.2, 0.7]);
        let hints: Vec<&str> = s.seen.iter().map(|x| x.1.as_str()).collect();
        assert_eq!(
            hints,
            vec![
                DEFAULT_HINTS[0],
                DEFAULT_HINTS[1],
                DEFAULT_HINTS[2],
                DEFAULT_HINTS[3],
                DEFAULT_HINTS[0]
            ]
        );
    }

    #[test]
    fn config_validation() {
        assert!(SamplerConfig::default().validate().is_ok());
        let bad = SamplerConfig {
            n_samples: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = SamplerConfig {
            temperature_pool: vec![0.0],
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = SamplerConfig {
            hint_pool: vec![],
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
