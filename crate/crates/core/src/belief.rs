//! Exact sequential Bayesian inference over a finite hypothesis set.
//!
//! Beliefs are kept as normalized log-masses so that long products of
//! likelihoods never underflow; probabilities are materialized on read.

use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::choice::ChoiceModel;
use crate::error::{CoreError, Result};
use crate::math::{entropy, log_sum_exp};
use crate::types::{argmax_lowest, HypothesisSet, InteractionHistory, OptionDistribution, OptionSet};

pub const DEFAULT_LIKELIHOOD_FLOOR: f64 = 1e-8;

/// Posterior over hypothesis indices.
///
/// Invariant: `log_sum_exp(log_mass) == 0` up to rounding, and every entry is
/// finite, so every hypothesis keeps strictly positive mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Belief {
    log_mass: Vec<f64>,
}

impl Belief {
    /// `1/M` on every hypothesis. Panics when `m == 0`.
    pub fn uniform(m: usize) -> Self {
        assert!(m >= 1, "belief needs at least one hypothesis");
        Self {
            log_mass: vec![-(m as f64).ln(); m],
        }
    }

    /// Normalizes unnormalized log-weights.
    pub fn from_log_weights(mut log_weights: Vec<f64>) -> Self {
        assert!(!log_weights.is_empty(), "belief needs at least one hypothesis");
        assert!(log_weights.iter().all(|v| v.is_finite()), "log-weights must be finite");
        let z = log_sum_exp(&log_weights);
        for v in log_weights.iter_mut() {
            *v -= z;
        }
        Self { log_mass: log_weights }
    }

    pub fn from_probs(probs: &[f64]) -> Result<Self> {
        let dist = OptionDistribution::new(probs.to_vec())?;
        if let Some(index) = dist.probs().iter().position(|&p| p <= 0.0) {
            return Err(CoreError::InvalidProbability { index, value: 0.0 });
        }
        Ok(Self::from_log_weights(dist.probs().iter().map(|p| p.ln()).collect()))
    }

    pub fn len(&self) -> usize {
        self.log_mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_mass.is_empty()
    }

    pub fn log_mass(&self) -> &[f64] {
        &self.log_mass
    }

    pub fn probs(&self) -> Vec<f64> {
        self.log_mass.iter().map(|l| l.exp()).collect()
    }

    /// Index of the most probable hypothesis (lowest index on ties).
    pub fn mode(&self) -> usize {
        argmax_lowest(&self.log_mass)
    }

    /// Shannon entropy in nats.
    pub fn entropy(&self) -> f64 {
        entropy(&self.probs())
    }

    /// The `k` most probable hypotheses as `(index, mass)`, highest first.
    pub fn top_k(&self, k: usize) -> Vec<(usize, f64)> {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by(|&a, &b| self.log_mass[b].total_cmp(&self.log_mass[a]).then(a.cmp(&b)));
        idx.into_iter().take(k).map(|i| (i, self.log_mass[i].exp())).collect()
    }

    /// Bit-level fingerprint of the state, for isolation checks.
    pub fn checksum(&self) -> u64 {
        let mut hasher = std::collections::hash_map::DefaultHasher::new();
        for v in &self.log_mass {
            v.to_bits().hash(&mut hasher);
        }
        hasher.finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeliefEngineConfig {
    pub likelihood_floor: f64,
    pub beta: f64,
}

impl Default for BeliefEngineConfig {
    fn default() -> Self {
        Self {
            likelihood_floor: DEFAULT_LIKELIHOOD_FLOOR,
            beta: crate::choice::DEFAULT_BETA,
        }
    }
}

/// Stage 1: prior, floored Bayes update, closed-form posterior and the
/// posterior-predictive over options.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeliefEngine {
    choice: ChoiceModel,
    floor: f64,
}

impl Default for BeliefEngine {
    fn default() -> Self {
        Self {
            choice: ChoiceModel::default(),
            floor: DEFAULT_LIKELIHOOD_FLOOR,
        }
    }
}

impl BeliefEngine {
    pub fn new(config: BeliefEngineConfig) -> Result<Self> {
        let choice = ChoiceModel::new(config.beta)?;
        // The floor must stay below the smallest uniform likelihood 1/K for
        // any K we support; 0.5 covers K = 2.
        if !(config.likelihood_floor > 0.0 && config.likelihood_floor < 0.5) {
            return Err(CoreError::InvalidConfig {
                field: "likelihood_floor",
                reason: format!("must lie in (0, 0.5), got {}", config.likelihood_floor),
            });
        }
        Ok(Self {
            choice,
            floor: config.likelihood_floor,
        })
    }

    pub fn choice_model(&self) -> &ChoiceModel {
        &self.choice
    }

    pub fn likelihood_floor(&self) -> f64 {
        self.floor
    }

    pub fn uniform_prior(&self, m: usize) -> Belief {
        Belief::uniform(m)
    }

    /// `max(ε, P(y | X, h_m))` for every hypothesis.
    pub fn floored_likelihoods(&self, hypotheses: &HypothesisSet, options: &OptionSet, choice: usize) -> Vec<f64> {
        assert!(
            choice < options.k(),
            "choice {choice} out of range for K = {}",
            options.k()
        );
        assert_eq!(hypotheses.dim(), options.dim(), "hypothesis/feature dimension mismatch");
        let mut probs = vec![0.0; options.k()];
        hypotheses
            .iter()
            .map(|h| {
                self.choice.choice_probs_into(&h.weights, options, &mut probs);
                probs[choice].max(self.floor)
            })
            .collect()
    }

    /// One round of `b'_m ∝ b_m · max(ε, P(y | X, h_m))`.
    pub fn bayes_update(
        &self,
        belief: &Belief,
        hypotheses: &HypothesisSet,
        options: &OptionSet,
        choice: usize,
    ) -> Belief {
        assert_eq!(belief.len(), hypotheses.len(), "belief/hypothesis count mismatch");
        let likelihoods = self.floored_likelihoods(hypotheses, options, choice);
        Self::apply_floored(belief, &likelihoods)
    }

    /// Update from externally supplied per-hypothesis likelihoods of the
    /// observed choice; the floor is applied here.
    pub fn update_with_likelihoods(&self, belief: &Belief, likelihoods: &[f64]) -> Belief {
        assert_eq!(belief.len(), likelihoods.len(), "belief/likelihood count mismatch");
        let floored: Vec<f64> = likelihoods.iter().map(|&l| l.max(self.floor)).collect();
        Self::apply_floored(belief, &floored)
    }

    fn apply_floored(belief: &Belief, floored: &[f64]) -> Belief {
        let log_weights = belief.log_mass.iter().zip(floored).map(|(lb, l)| lb + l.ln()).collect();
        Belief::from_log_weights(log_weights)
    }

    /// Posterior after the whole history from a uniform prior, computed as one
    /// product of floored likelihoods per hypothesis.
    pub fn closed_form_posterior(&self, hypotheses: &HypothesisSet, history: &InteractionHistory) -> Result<Belief> {
        if history.is_empty() {
            return Err(CoreError::InvalidConfig {
                field: "history",
                reason: "closed-form posterior needs at least one observed round".into(),
            });
        }
        let mut log_products = vec![0.0; hypotheses.len()];
        let mut probs = Vec::new();
        for (m, h) in hypotheses.iter().enumerate() {
            for round in history.rounds() {
                probs.resize(round.options.k(), 0.0);
                self.choice.choice_probs_into(&h.weights, &round.options, &mut probs);
                log_products[m] += probs[round.choice].max(self.floor).ln();
            }
        }
        Ok(Belief::from_log_weights(log_products))
    }

    /// `π_i = Σ_m b_m · P(i | X, h_m)`. Reads the belief, never changes it.
    pub fn symbolic_predictive(
        &self,
        belief: &Belief,
        hypotheses: &HypothesisSet,
        options: &OptionSet,
    ) -> OptionDistribution {
        assert_eq!(belief.len(), hypotheses.len(), "belief/hypothesis count mismatch");
        assert_eq!(hypotheses.dim(), options.dim(), "hypothesis/feature dimension mismatch");
        let k = options.k();
        let mut mixture = vec![0.0; k];
        let mut probs = vec![0.0; k];
        for (h, &lb) in hypotheses.iter().zip(&belief.log_mass) {
            let weight = lb.exp();
            if weight == 0.0 {
                continue;
            }
            self.choice.choice_probs_into(&h.weights, options, &mut probs);
            for (acc, p) in mixture.iter_mut().zip(&probs) {
                *acc += weight * p;
            }
        }
        OptionDistribution::from_weights(&mixture).expect("mixture of distributions is a distribution")
    }

    /// Predictive with the parse-failure fallback: without features the
    /// prediction is uniform over the `k` options.
    pub fn predictive_or_uniform(
        &self,
        belief: &Belief,
        hypotheses: &HypothesisSet,
        options: Option<&OptionSet>,
        k: usize,
    ) -> OptionDistribution {
        match options {
            Some(x) => self.symbolic_predictive(belief, hypotheses, x),
            None => OptionDistribution::uniform(k),
        }
    }

    /// Update with the parse-failure fallback: a round without features
    /// leaves the belief untouched.
    pub fn update_or_skip(
        &self,
        belief: &Belief,
        hypotheses: &HypothesisSet,
        options: Option<&OptionSet>,
        choice: usize,
    ) -> Belief {
        match options {
            Some(x) => self.bayes_update(belief, hypotheses, x, choice),
            None => belief.clone(),
        }
    }
}
