//! Confidence-weighted Dirichlet pseudo-counts over options.

use super::sampler::SampleBatch;
use crate::types::OptionDistribution;

pub const DEFAULT_ALPHA0: f64 = 1.0;

/// Pseudo-count vector for one sample: its confidence on the predicted option
/// and the remainder spread evenly over the other `k - 1`.
pub fn sample_weights(prediction: usize, confidence: f64, k: usize) -> Vec<f64> {
    assert!(k >= 2, "need at least two options");
    assert!(prediction < k, "prediction {prediction} out of range for K = {k}");
    let rest = (1.0 - confidence) / (k - 1) as f64;
    let mut w = vec![rest; k];
    w[prediction] = confidence;
    w
}

/// Running Dirichlet parameters, starting from a symmetric prior.
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletAccumulator {
    alpha: Vec<f64>,
    alpha0: f64,
    observations: usize,
}

impl DirichletAccumulator {
    pub fn new(k: usize, alpha0: f64) -> Self {
        assert!(k >= 2, "need at least two options");
        assert!(alpha0.is_finite() && alpha0 > 0.0, "Dirichlet prior must be positive");
        Self {
            alpha: vec![alpha0; k],
            alpha0,
            observations: 0,
        }
    }

    pub fn observe(&mut self, prediction: usize, confidence: f64) {
        let w = sample_weights(prediction, confidence, self.alpha.len());
        for (a, wi) in self.alpha.iter_mut().zip(&w) {
            *a += wi;
        }
        self.observations += 1;
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn alpha0(&self) -> f64 {
        self.alpha0
    }

    pub fn observations(&self) -> usize {
        self.observations
    }

    /// Posterior mean `α / ‖α‖₁`.
    pub fn mean(&self) -> OptionDistribution {
        OptionDistribution::from_weights(&self.alpha).expect("alpha is positive")
    }
}

/// Batch route: sums every valid sample's pseudo-counts, adds the prior, and
/// returns the posterior mean. No valid samples gives the uniform prior mean.
pub fn dirichlet_aggregate(batch: &SampleBatch, k: usize, alpha0: f64) -> OptionDistribution {
    assert!(k >= 2, "need at least two options");
    assert!(alpha0.is_finite() && alpha0 > 0.0, "Dirichlet prior must be positive");
    let mut counts = vec![0.0; k];
    for (prediction, confidence) in batch.valid() {
        for (c, w) in counts.iter_mut().zip(sample_weights(prediction, confidence, k)) {
            *c += w;
        }
    }
    let alpha: Vec<f64> = counts.iter().map(|c| alpha0 + c).collect();
    OptionDistribution::from_weights(&alpha).expect("alpha is positive")
}

/// Self-consistency baseline: vote shares of the valid predictions,
/// confidences ignored. No valid samples gives uniform.
pub fn majority_vote(batch: &SampleBatch, k: usize) -> OptionDistribution {
    let mut votes = vec![0.0; k];
    for (prediction, _) in batch.valid() {
        votes[prediction] += 1.0;
    }
    OptionDistribution::from_weights(&votes).unwrap_or_else(|_| OptionDistribution::uniform(k))
}
