//! Stage 3: entropy-adaptive fusion of the sampler and symbolic predictions.
//!
//! Each source is weighted by one minus its normalized entropy, floored at
//! `ε_w`. Because the sampler weight never exceeds one, the sampler's share of
//! the fused prediction is at most `1 / (1 + w_sym)`; every call checks this.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::math::entropy;
use crate::types::{normalize, OptionDistribution};

pub const DEFAULT_WEIGHT_FLOOR: f64 = 1e-3;

const BOUND_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FusionMode {
    Adaptive,
    /// `λ · π_llm + (1 − λ) · π_sym`.
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FusionConfig {
    pub weight_floor: f64,
    pub mode: FusionMode,
}

impl Default for FusionConfig {
    fn default() -> Self {
        Self {
            weight_floor: DEFAULT_WEIGHT_FLOOR,
            mode: FusionMode::Adaptive,
        }
    }
}

impl FusionConfig {
    pub fn fixed(lambda: f64) -> Self {
        Self {
            mode: FusionMode::Fixed(lambda),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.weight_floor > 0.0 && self.weight_floor <= 1.0) {
            return Err(CoreError::InvalidConfig {
                field: "weight_floor",
                reason: format!("must lie in (0, 1], got {}", self.weight_floor),
            });
        }
        if let FusionMode::Fixed(lambda) = self.mode {
            if !(0.0..=1.0).contains(&lambda) {
                return Err(CoreError::InvalidConfig {
                    field: "lambda",
                    reason: format!("must lie in [0, 1], got {lambda}"),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FusionDiagnostics {
    pub w_llm: f64,
    pub w_sym: f64,
    pub llm_share: f64,
    pub bound: f64,
    pub entropy_llm: f64,
    pub entropy_sym: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionOutcome {
    pub fused: OptionDistribution,
    /// 0-based; ties go to the lowest index.
    pub chosen: usize,
    pub diagnostics: FusionDiagnostics,
}

/// Shannon entropy divided by `ln K`, clamped to `[0, 1]`. Panics for K < 2.
pub fn normalized_entropy(pi: &OptionDistribution) -> f64 {
    let k = pi.k();
    assert!(k >= 2, "normalized entropy is undefined for K = {k}");
    (entropy(pi.probs()) / (k as f64).ln()).clamp(0.0, 1.0)
}

/// `(max(ε_w, 1 − H̃(π_llm)), max(ε_w, 1 − H̃(π_sym)))`.
pub fn adaptive_weights(pi_llm: &OptionDistribution, pi_sym: &OptionDistribution, weight_floor: f64) -> (f64, f64) {
    assert_eq!(pi_llm.k(), pi_sym.k(), "fused distributions must share K");
    (
        (1.0 - normalized_entropy(pi_llm)).max(weight_floor),
        (1.0 - normalized_entropy(pi_sym)).max(weight_floor),
    )
}

pub fn fuse(pi_llm: &OptionDistribution, pi_sym: &OptionDistribution, config: &FusionConfig) -> FusionOutcome {
    assert_eq!(pi_llm.k(), pi_sym.k(), "fused distributions must share K");
    let entropy_llm = normalized_entropy(pi_llm);
    let entropy_sym = normalized_entropy(pi_sym);
    let (w_llm, w_sym) = match config.mode {
        FusionMode::Adaptive => (
            (1.0 - entropy_llm).max(config.weight_floor),
            (1.0 - entropy_sym).max(config.weight_floor),
        ),
        FusionMode::Fixed(lambda) => (lambda, 1.0 - lambda),
    };
    let mixed: Vec<f64> = pi_llm
        .probs()
        .iter()
        .zip(pi_sym.probs())
        .map(|(a, b)| w_llm * a + w_sym * b)
        .collect();
    let fused =
        OptionDistribution::new(normalize(&mixed).expect("fusion weights are positive")).expect("normalized fusion");
    let chosen = fused.argmax();
    let llm_share = w_llm / (w_llm + w_sym);
    let bound = 1.0 / (1.0 + w_sym);
    check_bound(llm_share, bound);
    FusionOutcome {
        fused,
        chosen,
        diagnostics: FusionDiagnostics {
            w_llm,
            w_sym,
            llm_share,
            bound,
            entropy_llm,
            entropy_sym,
        },
    }
}

fn check_bound(llm_share: f64, bound: f64) {
    debug_assert!(
        llm_share <= bound + BOUND_SLACK,
        "fusion bound violated: share {llm_share} > {bound}"
    );
    if llm_share > bound + BOUND_SLACK {
        log::error!("fusion bound violated: share {llm_share} > {bound}");
    }
}
