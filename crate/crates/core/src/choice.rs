//! Linear utilities and the Luce (softmax) choice rule.
//!
//! The same model serves as the belief engine's likelihood and as the
//! simulated user's decision rule.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::math::softmax_into;
use crate::types::{FeatureVector, Hypothesis, OptionDistribution, OptionSet};

pub const DEFAULT_BETA: f64 = 6.0;

/// `hᵀx`. Panics if the dimensions differ.
pub fn utility(h: &Hypothesis, x: &FeatureVector) -> f64 {
    dot(&h.weights, x.values())
}

pub(crate) fn dot(weights: &[f64], values: &[f64]) -> f64 {
    assert_eq!(
        weights.len(),
        values.len(),
        "utility: hypothesis has dimension {} but features have {}",
        weights.len(),
        values.len()
    );
    weights.iter().zip(values).map(|(w, v)| w * v).sum()
}

/// Luce choice probabilities for the given utilities.
pub fn luce_probabilities(beta: f64, utilities: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; utilities.len()];
    softmax_into(utilities, beta, &mut out);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChoiceModelConfig")]
pub struct ChoiceModel {
    beta: f64,
}

#[derive(Deserialize)]
struct ChoiceModelConfig {
    beta: f64,
}

impl TryFrom<ChoiceModelConfig> for ChoiceModel {
    type Error = CoreError;

    fn try_from(cfg: ChoiceModelConfig) -> Result<Self> {
        Self::new(cfg.beta)
    }
}

impl Default for ChoiceModel {
    fn default() -> Self {
        Self { beta: DEFAULT_BETA }
    }
}

impl ChoiceModel {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(CoreError::InvalidConfig {
                field: "beta",
                reason: format!("inverse temperature must be positive and finite, got {beta}"),
            });
        }
        Ok(Self { beta })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `P(i | X, h)` for every option `i`.
    pub fn choice_likelihood(&self, h: &Hypothesis, options: &OptionSet) -> OptionDistribution {
        let mut out = vec![0.0; options.k()];
        self.choice_probs_into(&h.weights, options, &mut out);
        OptionDistribution::new(out).expect("softmax output is a distribution")
    }

    /// Allocation-free variant used in the belief engine's inner loops.
    pub fn choice_probs_into(&self, weights: &[f64], options: &OptionSet, out: &mut [f64]) {
        let mut utilities = [0.0f64; 16];
        let k = options.k();
        if k <= utilities.len() {
            for (u, x) in utilities.iter_mut().zip(options.options()) {
                *u = dot(weights, x.values());
            }
            softmax_into(&utilities[..k], self.beta, out);
        } else {
            let utilities: Vec<f64> = options.options().iter().map(|x| dot(weights, x.values())).collect();
            softmax_into(&utilities, self.beta, out);
        }
    }
}
