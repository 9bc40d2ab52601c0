use serde::{Deserialize, Serialize};

use crate::types::{normalize, OptionDistribution};

pub const DEFAULT_MOMENTUM: f64 = 0.65;

/// Exponential moving average over per-round aggregated distributions.
///
/// `smooth` never mutates; it hands back the memory the caller should keep if
/// the round is an interaction round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentumMemory {
    state: Option<OptionDistribution>,
    momentum: f64,
}

impl Default for MomentumMemory {
    fn default() -> Self {
        Self::new(DEFAULT_MOMENTUM)
    }
}

impl MomentumMemory {
    pub fn new(momentum: f64) -> Self {
        assert!((0.0..1.0).contains(&momentum), "momentum must lie in [0, 1)");
        Self { state: None, momentum }
    }

    pub fn momentum(&self) -> f64 {
        self.momentum
    }

    pub fn state(&self) -> Option<&OptionDistribution> {
        self.state.as_ref()
    }

    /// Asymptotic effective sample count `n / (1 - m)`.
    pub fn effective_samples(&self, n: usize) -> f64 {
        n as f64 / (1.0 - self.momentum)
    }

    pub fn smooth(&self, raw: &OptionDistribution) -> (OptionDistribution, MomentumMemory) {
        let out = match &self.state {
            None => raw.clone(),
            Some(mem) => {
                assert_eq!(mem.k(), raw.k(), "memory and raw distribution differ in K");
                let m = self.momentum;
                let mixed: Vec<f64> = mem
                    .probs()
                    .iter()
                    .zip(raw.probs())
                    .map(|(a, b)| m * a + (1.0 - m) * b)
                    .collect();
                OptionDistribution::new(normalize(&mixed).expect("convex combination is positive"))
                    .expect("normalized mixture")
            }
        };
        let next = MomentumMemory {
            state: Some(out.clone()),
            momentum: self.momentum,
        };
        (out, next)
    }

    pub fn checksum(&self) -> u64 {
        use std::hash::{Hash, Hasher};
        let mut hasher = std::collections::hash_map::DefaultHasher::new();
        self.momentum.to_bits().hash(&mut hasher);
        if let Some(s) = &self.state {
            for p in s.probs() {
                p.to_bits().hash(&mut hasher);
            }
        }
        hasher.finish()
    }
}
