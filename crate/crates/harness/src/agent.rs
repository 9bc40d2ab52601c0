//! Agent variants and the per-round decision pipeline.
//!
//! `Pipeline::decide` is a pure function of the pre-round state and the
//! round's sample batch; `Pipeline::observe` is the only place state moves.

use std::fmt;
use std::str::FromStr;

use adaptfuse_core::aggregation::{
    dirichlet_aggregate, majority_vote, sample_batch, MomentumMemory, SampleBatch, SamplerConfig, SemanticSampler,
    DEFAULT_ALPHA0, DEFAULT_MOMENTUM,
};
use adaptfuse_core::fusion::{adaptive_weights, DEFAULT_WEIGHT_FLOOR};
use adaptfuse_core::{
    fuse, Belief, BeliefEngine, BeliefEngineConfig, CoreError, FusionConfig, FusionDiagnostics, HypothesisSet,
    InteractionHistory, OptionDistribution, OptionSet,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentVariant {
    /// Belief tracking + Dirichlet aggregation + EMA + adaptive fusion.
    Adaptfuse,
    /// Stage 1 alone.
    SymbolicOnly,
    /// Self-consistency: majority vote over the batch, no belief, no memory.
    SamplerOnly,
    /// Full pipeline with vote shares in place of Dirichlet aggregation.
    MajorityVote,
    /// Full pipeline with `λ·π_llm + (1−λ)·π_sym`.
    FixedFusion(f64),
    /// Full pipeline without momentum smoothing.
    NoEma,
}

impl AgentVariant {
    pub fn uses_symbolic(self) -> bool {
        !matches!(self, Self::SamplerOnly)
    }

    pub fn uses_sampler(self) -> bool {
        !matches!(self, Self::SymbolicOnly)
    }

    /// File-name-safe tag, e.g. `fixed_fusion_0.5`.
    pub fn slug(self) -> String {
        self.to_string()
            .replace(['(', ')'], "_")
            .trim_end_matches('_')
            .to_string()
    }

    pub fn validate(self) -> Result<(), CoreError> {
        if let Self::FixedFusion(lambda) = self {
            FusionConfig::fixed(lambda).validate()?;
        }
        Ok(())
    }
}

impl fmt::Display for AgentVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Adaptfuse => f.write_str("adaptfuse"),
            Self::SymbolicOnly => f.write_str("symbolic_only"),
            Self::SamplerOnly => f.write_str("sampler_only"),
            Self::MajorityVote => f.write_str("majority_vote"),
            Self::FixedFusion(lambda) => write!(f, "fixed_fusion({lambda})"),
            Self::NoEma => f.write_str("no_ema"),
        }
    }
}

impl FromStr for AgentVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        Ok(match s {
            "adaptfuse" | "full" => Self::Adaptfuse,
            "symbolic_only" => Self::SymbolicOnly,
            "sampler_only" => Self::SamplerOnly,
            "majority_vote" => Self::MajorityVote,
            "no_ema" => Self::NoEma,
            _ => {
                let lambda = s
                    .strip_prefix("fixed_fusion(")
                    .and_then(|r| r.strip_suffix(')'))
                    .or_else(|| s.strip_prefix("fixed_fusion_"))
                    .ok_or_else(|| format!("unknown agent variant {s:?}"))?;
                let lambda: f64 = lambda.parse().map_err(|_| format!("bad fusion weight in {s:?}"))?;
                Self::FixedFusion(lambda)
            }
        })
    }
}

/// Shared hyperparameters for every variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentConfig {
    pub beta: f64,
    pub likelihood_floor: f64,
    pub weight_floor: f64,
    pub alpha0: f64,
    pub momentum: f64,
    pub sampler: SamplerConfig,
}

impl Default for AgentConfig {
    fn default() -> Self {
        let belief = BeliefEngineConfig::default();
        Self {
            beta: belief.beta,
            likelihood_floor: belief.likelihood_floor,
            weight_floor: DEFAULT_WEIGHT_FLOOR,
            alpha0: DEFAULT_ALPHA0,
            momentum: DEFAULT_MOMENTUM,
            sampler: SamplerConfig::default(),
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<(), CoreError> {
        BeliefEngine::new(self.belief_config())?;
        FusionConfig {
            weight_floor: self.weight_floor,
            ..FusionConfig::default()
        }
        .validate()?;
        if !(self.alpha0.is_finite() && self.alpha0 > 0.0) {
            return Err(CoreError::InvalidConfig {
                field: "alpha0",
                reason: format!("must be positive, got {}", self.alpha0),
            });
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(CoreError::InvalidConfig {
                field: "momentum",
                reason: format!("must lie in [0, 1), got {}", self.momentum),
            });
        }
        self.sampler.validate()
    }

    fn belief_config(&self) -> BeliefEngineConfig {
        BeliefEngineConfig {
            likelihood_floor: self.likelihood_floor,
            beta: self.beta,
        }
    }
}

/// Mutable per-episode (or per-session) agent state.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentState {
    pub belief: Belief,
    pub memory: MomentumMemory,
    pub history: InteractionHistory,
}

/// Everything computed for one decision point.
#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub pi_sym: Option<OptionDistribution>,
    pub pi_llm: Option<OptionDistribution>,
    pub fused: OptionDistribution,
    /// 0-based.
    pub chosen: usize,
    pub w_llm: Option<f64>,
    pub w_sym: Option<f64>,
    /// Only set when both sources were fused.
    pub diagnostics: Option<FusionDiagnostics>,
    /// The memory to persist if this was an interaction round.
    pub memory_after: MomentumMemory,
}

#[derive(Debug, Clone)]
pub struct Pipeline {
    variant: AgentVariant,
    engine: BeliefEngine,
    fusion: FusionConfig,
    sampler: SamplerConfig,
    alpha0: f64,
    momentum: f64,
}

impl Pipeline {
    pub fn new(variant: AgentVariant, config: &AgentConfig) -> Result<Self, CoreError> {
        variant.validate()?;
        config.validate()?;
        let fusion = match variant {
            AgentVariant::FixedFusion(lambda) => FusionConfig {
                weight_floor: config.weight_floor,
                ..FusionConfig::fixed(lambda)
            },
            _ => FusionConfig {
                weight_floor: config.weight_floor,
                ..FusionConfig::default()
            },
        };
        // sampler_only is plain self-consistency: a per-set vote, no memory.
        let momentum = match variant {
            AgentVariant::NoEma | AgentVariant::SamplerOnly => 0.0,
            _ => config.momentum,
        };
        Ok(Self {
            variant,
            engine: BeliefEngine::new(config.belief_config())?,
            fusion,
            sampler: config.sampler.clone(),
            alpha0: config.alpha0,
            momentum,
        })
    }

    pub fn variant(&self) -> AgentVariant {
        self.variant
    }

    pub fn engine(&self) -> &BeliefEngine {
        &self.engine
    }

    pub fn initial_state(&self, hypotheses: &HypothesisSet) -> AgentState {
        AgentState {
            belief: self.engine.uniform_prior(hypotheses.len()),
            memory: MomentumMemory::new(self.momentum),
            history: InteractionHistory::new(),
        }
    }

    /// Queries the sampler if this variant uses one.
    pub fn draw_batch(
        &self,
        sampler: &mut dyn SemanticSampler,
        options: &OptionSet,
        history: &InteractionHistory,
    ) -> Option<SampleBatch> {
        self.variant
            .uses_sampler()
            .then(|| sample_batch(sampler, options, history, &self.sampler))
    }

    /// Predicts from the pre-round state. `parsed` is `None` when feature
    /// extraction failed, in which case the symbolic prediction is uniform.
    pub fn decide(
        &self,
        state: &AgentState,
        hypotheses: &HypothesisSet,
        parsed: Option<&OptionSet>,
        k: usize,
        batch: Option<&SampleBatch>,
    ) -> Decision {
        let pi_sym = self
            .variant
            .uses_symbolic()
            .then(|| self.engine.predictive_or_uniform(&state.belief, hypotheses, parsed, k));

        let (pi_llm, memory_after) = match batch {
            Some(batch) if self.variant.uses_sampler() => {
                let raw = match self.variant {
                    AgentVariant::MajorityVote | AgentVariant::SamplerOnly => majority_vote(batch, k),
                    _ => dirichlet_aggregate(batch, k, self.alpha0),
                };
                let (smoothed, next) = state.memory.smooth(&raw);
                (Some(smoothed), next)
            }
            _ => {
                assert!(!self.variant.uses_sampler(), "{} needs a sample batch", self.variant);
                (None, state.memory.clone())
            }
        };

        let floor = self.fusion.weight_floor;
        let single_weight = |pi: &OptionDistribution| adaptive_weights(pi, pi, floor).0;
        let (fused, chosen, w_llm, w_sym, diagnostics) = match (&pi_llm, &pi_sym) {
            (Some(llm), Some(sym)) => {
                let out = fuse(llm, sym, &self.fusion);
                let d = out.diagnostics;
                (out.fused, out.chosen, Some(d.w_llm), Some(d.w_sym), Some(d))
            }
            (None, Some(sym)) => (sym.clone(), sym.argmax(), None, Some(single_weight(sym)), None),
            (Some(llm), None) => (llm.clone(), llm.argmax(), Some(single_weight(llm)), None, None),
            (None, None) => unreachable!("every variant uses at least one source"),
        };

        Decision {
            pi_sym,
            pi_llm,
            fused,
            chosen,
            w_llm,
            w_sym,
            diagnostics,
            memory_after,
        }
    }

    /// Commits an interaction round: persists the decision's memory, updates
    /// the belief with the observed choice and appends to the history.
    pub fn observe(
        &self,
        state: &mut AgentState,
        hypotheses: &HypothesisSet,
        options: &OptionSet,
        parsed: Option<&OptionSet>,
        decision: Decision,
        choice: usize,
    ) -> Result<(), CoreError> {
        if choice >= options.k() {
            return Err(CoreError::ChoiceOutOfRange {
                index: choice,
                k: options.k(),
            });
        }
        state.memory = decision.memory_after;
        if self.variant.uses_symbolic() {
            state.belief = self.engine.update_or_skip(&state.belief, hypotheses, parsed, choice);
        }
        state.history.push(options.clone(), choice)
    }
}
