//! One full interaction episode, round by round, with held-out evaluation
//! after every round.

use adaptfuse_core::aggregation::{Sample, SampleBatch, SemanticSampler};
use adaptfuse_core::tasks::{Episode, EpisodeSpec};
use adaptfuse_core::{normalized_entropy, ChoiceModel, CoreError, Hypothesis, OptionDistribution, OptionSet};
use serde::{Deserialize, Serialize};

use crate::agent::{AgentState, AgentVariant, Decision, Pipeline};

/// One sampler answer as persisted: 1-based prediction, `null` on failure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub prediction: Option<usize>,
    pub confidence: f64,
}

impl SampleRecord {
    fn from_sample(s: &Sample) -> Self {
        Self {
            prediction: s.prediction.map(|p| p + 1),
            confidence: s.confidence,
        }
    }

    pub fn to_sample(self) -> Sample {
        match self.prediction {
            Some(p) => Sample::valid(p - 1, self.confidence),
            None => Sample::failed(),
        }
    }
}

pub fn batch_from_records(records: &[SampleRecord]) -> SampleBatch {
    SampleBatch::new(records.iter().map(|r| r.to_sample()).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    /// 1-based round number.
    pub round: usize,
    /// Agent's pick, 1-based.
    pub prediction: usize,
    /// User's observed choice, 1-based.
    pub truth: usize,
    /// Whether every option text parsed.
    pub parsed: bool,
    pub pi_sym: Option<Vec<f64>>,
    pub pi_llm: Option<Vec<f64>>,
    pub pi_fused: Vec<f64>,
    pub w_llm: Option<f64>,
    pub w_sym: Option<f64>,
    pub llm_share: Option<f64>,
    pub bound: Option<f64>,
    /// Posterior entropy in nats after the round's update.
    pub belief_entropy: f64,
    /// Posterior mass on the true hypothesis after the update, if it is in H.
    pub posterior_on_truth: Option<f64>,
    /// Normalized entropy of the true user's choice distribution on this set.
    pub truth_choice_entropy: f64,
    pub batch: Option<Vec<SampleRecord>>,
    /// Fraction of held-out sets where the agent picks the user's preferred option.
    pub held_out_accuracy: f64,
    pub held_out_parse_failures: usize,
    pub belief_checksum_before: u64,
    pub belief_checksum_after: u64,
    pub memory_checksum_before: u64,
    pub memory_checksum_after: u64,
}

impl RoundRecord {
    pub fn isolation_held(&self) -> bool {
        self.belief_checksum_before == self.belief_checksum_after
            && self.memory_checksum_before == self.memory_checksum_after
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub agent: AgentVariant,
    pub seed: u64,
    pub spec: EpisodeSpec,
    pub true_weights: Vec<f64>,
    pub true_in_hypotheses: bool,
    pub hypothesis_count: usize,
    pub rounds: Vec<RoundRecord>,
}

impl EpisodeRecord {
    pub fn accuracies(&self) -> Vec<f64> {
        self.rounds.iter().map(|r| r.held_out_accuracy).collect()
    }
}

/// Shortens the trait-object lifetime so the sampler can be lent repeatedly.
fn reborrow<'a>(sampler: &'a mut Option<&mut dyn SemanticSampler>) -> Option<&'a mut dyn SemanticSampler> {
    match sampler {
        Some(s) => Some(&mut **s),
        None => None,
    }
}

/// Parses option texts as an agent would see them.
fn parse(episode: &Episode, options: &OptionSet) -> Option<OptionSet> {
    episode.schema.parse_option_set(options.raw_texts())
}

/// Runs one episode in pipeline order: predict from the pre-update state, sample and
/// aggregate (memory written), fuse, observe the user's choice, update the
/// belief; then score every held-out set with the belief and memory frozen.
///
/// `sampler` may be `None` only for variants that never query it.
pub fn run_episode(
    episode: &Episode,
    pipeline: &Pipeline,
    mut sampler: Option<&mut dyn SemanticSampler>,
) -> Result<EpisodeRecord, CoreError> {
    let variant = pipeline.variant();
    if variant.uses_sampler() && sampler.is_none() {
        return Err(CoreError::InvalidConfig {
            field: "sampler",
            reason: format!("{variant} needs a semantic sampler"),
        });
    }
    let hypotheses = &episode.hypotheses;
    let mut state = pipeline.initial_state(hypotheses);
    let truth_model = ChoiceModel::new(episode.user.beta.unwrap_or(pipeline.engine().choice_model().beta()))?;
    let truth_hypothesis = Hypothesis {
        id: 0,
        weights: episode.user.weights.clone(),
    };
    let mut rounds = Vec::with_capacity(episode.rounds.len());

    for (t, (options, &choice)) in episode.rounds.iter().zip(&episode.choices).enumerate() {
        let k = options.k();
        let parsed = parse(episode, options);
        let batch = reborrow(&mut sampler).and_then(|s| pipeline.draw_batch(s, options, &state.history));
        let decision = pipeline.decide(&state, hypotheses, parsed.as_ref(), k, batch.as_ref());
        let summary = DecisionSummary::from(&decision);
        pipeline.observe(&mut state, hypotheses, options, parsed.as_ref(), decision, choice)?;

        let belief_before = state.belief.checksum();
        let memory_before = state.memory.checksum();
        let (accuracy, failures) = evaluate_held_out(episode, pipeline, &state, reborrow(&mut sampler));
        let belief_after = state.belief.checksum();
        let memory_after = state.memory.checksum();

        let truth_dist = truth_model.choice_likelihood(&truth_hypothesis, options);
        rounds.push(RoundRecord {
            round: t + 1,
            prediction: summary.chosen + 1,
            truth: choice + 1,
            parsed: parsed.is_some(),
            pi_sym: summary.pi_sym,
            pi_llm: summary.pi_llm,
            pi_fused: summary.fused,
            w_llm: summary.w_llm,
            w_sym: summary.w_sym,
            llm_share: summary.llm_share,
            bound: summary.bound,
            belief_entropy: state.belief.entropy(),
            posterior_on_truth: episode.true_index.map(|i| state.belief.log_mass()[i].exp()),
            truth_choice_entropy: normalized_entropy(&truth_dist),
            batch: batch.map(|b| b.samples().iter().map(SampleRecord::from_sample).collect()),
            held_out_accuracy: accuracy,
            held_out_parse_failures: failures,
            belief_checksum_before: belief_before,
            belief_checksum_after: belief_after,
            memory_checksum_before: memory_before,
            memory_checksum_after: memory_after,
        });
    }

    Ok(EpisodeRecord {
        agent: variant,
        seed: episode.spec.seed,
        spec: episode.spec.clone(),
        true_weights: episode.user.weights.clone(),
        true_in_hypotheses: episode.true_index.is_some(),
        hypothesis_count: hypotheses.len(),
        rounds,
    })
}

struct DecisionSummary {
    pi_sym: Option<Vec<f64>>,
    pi_llm: Option<Vec<f64>>,
    fused: Vec<f64>,
    chosen: usize,
    w_llm: Option<f64>,
    w_sym: Option<f64>,
    llm_share: Option<f64>,
    bound: Option<f64>,
}

impl From<&Decision> for DecisionSummary {
    fn from(d: &Decision) -> Self {
        let probs = |p: &OptionDistribution| p.probs().to_vec();
        Self {
            pi_sym: d.pi_sym.as_ref().map(probs),
            pi_llm: d.pi_llm.as_ref().map(probs),
            fused: probs(&d.fused),
            chosen: d.chosen,
            w_llm: d.w_llm,
            w_sym: d.w_sym,
            llm_share: d.diagnostics.map(|x| x.llm_share),
            bound: d.diagnostics.map(|x| x.bound),
        }
    }
}

/// Held-out accuracy with read-only state. Returns `(accuracy, parse failures)`.
fn evaluate_held_out(
    episode: &Episode,
    pipeline: &Pipeline,
    state: &AgentState,
    mut sampler: Option<&mut dyn SemanticSampler>,
) -> (f64, usize) {
    if episode.held_out.is_empty() {
        return (0.0, 0);
    }
    let mut correct = 0usize;
    let mut failures = 0usize;
    for (options, &label) in episode.held_out.iter().zip(&episode.held_out_labels) {
        let parsed = parse(episode, options);
        failures += usize::from(parsed.is_none());
        let batch = reborrow(&mut sampler).and_then(|s| pipeline.draw_batch(s, options, &state.history));
        let decision = pipeline.decide(state, &episode.hypotheses, parsed.as_ref(), options.k(), batch.as_ref());
        correct += usize::from(decision.chosen == label);
    }
    (correct as f64 / episode.held_out.len() as f64, failures)
}

/// Held-out accuracy of the agent before any observation: uniform prior and
/// empty memory. Used as the zero-round reference.
pub fn prior_accuracy(episode: &Episode, pipeline: &Pipeline, sampler: Option<&mut dyn SemanticSampler>) -> f64 {
    let state = pipeline.initial_state(&episode.hypotheses);
    evaluate_held_out(episode, pipeline, &state, sampler).0
}
