//! Seeded stand-in for an LLM sampler.
//!
//! It knows a reference preference vector and names that vector's best option
//! with probability `p`, otherwise a uniformly random other option. Its
//! self-reported confidence is Beta-distributed, with different shapes for
//! correct and incorrect answers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use super::answer::format_answer;
use super::sampler::{SampleRequest, SamplerError, SemanticSampler};
use crate::choice::dot;
use crate::error::{CoreError, Result};
use crate::types::{argmax_lowest, OptionSet};

/// Probability of naming the best option, fixed or indexed by the number of
/// completed rounds (the last entry repeats).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AccuracySchedule {
    Constant(f64),
    PerRound(Vec<f64>),
}

impl AccuracySchedule {
    pub fn at(&self, completed_rounds: usize) -> f64 {
        match self {
            Self::Constant(p) => *p,
            Self::PerRound(ps) => ps[completed_rounds.min(ps.len() - 1)],
        }
    }

    fn validate(&self) -> Result<()> {
        let ps: &[f64] = match self {
            Self::Constant(p) => std::slice::from_ref(p),
            Self::PerRound(ps) => ps,
        };
        if ps.is_empty() || ps.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(CoreError::InvalidConfig {
                field: "accuracy",
                reason: "must be a probability or a nonempty list of probabilities".into(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaShape {
    pub alpha: f64,
    pub beta: f64,
}

impl BetaShape {
    fn distribution(self, field: &'static str) -> Result<Beta<f64>> {
        Beta::new(self.alpha, self.beta).map_err(|e| CoreError::InvalidConfig {
            field,
            reason: e.to_string(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticSamplerConfig {
    pub accuracy: AccuracySchedule,
    pub correct_confidence: BetaShape,
    pub incorrect_confidence: BetaShape,
}

impl Default for SyntheticSamplerConfig {
    fn default() -> Self {
        Self {
            accuracy: AccuracySchedule::Constant(0.55),
            correct_confidence: BetaShape { alpha: 5.0, beta: 2.0 },
            incorrect_confidence: BetaShape { alpha: 2.0, beta: 5.0 },
        }
    }
}

impl SyntheticSamplerConfig {
    pub fn validate(&self) -> Result<()> {
        self.accuracy.validate()?;
        self.correct_confidence.distribution("correct_confidence")?;
        self.incorrect_confidence.distribution("incorrect_confidence")?;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticSampler {
    reference: Vec<f64>,
    accuracy: AccuracySchedule,
    correct: Beta<f64>,
    incorrect: Beta<f64>,
    rng: ChaCha8Rng,
}

impl SyntheticSampler {
    pub fn new(config: &SyntheticSamplerConfig, reference: Vec<f64>, rng: ChaCha8Rng) -> Result<Self> {
        config.accuracy.validate()?;
        Ok(Self {
            reference,
            accuracy: config.accuracy.clone(),
            correct: config.correct_confidence.distribution("correct_confidence")?,
            incorrect: config.incorrect_confidence.distribution("incorrect_confidence")?,
            rng,
        })
    }

    pub fn from_seed(config: &SyntheticSamplerConfig, reference: Vec<f64>, seed: u64) -> Result<Self> {
        Self::new(config, reference, ChaCha8Rng::seed_from_u64(seed))
    }

    /// The option the reference preference ranks highest.
    pub fn best_option(&self, options: &OptionSet) -> usize {
        let utilities: Vec<f64> = options
            .options()
            .iter()
            .map(|x| dot(&self.reference, x.values()))
            .collect();
        argmax_lowest(&utilities)
    }

    /// Draws `(prediction, confidence)` directly.
    pub fn draw(&mut self, options: &OptionSet, completed_rounds: usize) -> (usize, f64) {
        let k = options.k();
        let best = self.best_option(options);
        let p = self.accuracy.at(completed_rounds);
        if self.rng.random::<f64>() < p {
            (best, self.correct.sample(&mut self.rng))
        } else {
            let mut wrong = self.rng.random_range(0..k - 1);
            if wrong >= best {
                wrong += 1;
            }
            (wrong, self.incorrect.sample(&mut self.rng))
        }
    }
}

impl SemanticSampler for SyntheticSampler {
    fn complete(&mut self, request: &SampleRequest<'_>) -> std::result::Result<String, SamplerError> {
        let (prediction, confidence) = self.draw(request.options, request.history.len());
        Ok(format_answer(prediction, confidence))
    }
}
