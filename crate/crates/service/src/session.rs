//! One live session: agent state for a human (or demo) user.
//!
//! Option sets come from a seeded episode so a session is reproducible from
//! its request and the sequence of choices; the episode's simulated user is
//! used only as the synthetic sampler's reference and for demo suggestions.

use std::time::Instant;

use adaptfuse_core::aggregation::{
    HttpChatConfig, HttpChatSampler, SemanticSampler, SyntheticSampler, SyntheticSamplerConfig,
};
use adaptfuse_core::tasks::{stream_rng, DomainKind, Episode, EpisodeSpec, Stream};
use adaptfuse_core::OptionSet;
use adaptfuse_harness::{AgentConfig, AgentState, AgentVariant, Backend, Decision, Pipeline};
use serde::{Deserialize, Serialize};

use crate::error::{core_field, ApiError};

pub const MAX_K: usize = 10;
pub const MAX_ROUNDS: usize = 100;
pub const TOP_HYPOTHESES: usize = 5;

fn default_domain() -> DomainKind {
    DomainKind::Flight
}

fn default_k() -> usize {
    3
}

fn default_rounds() -> usize {
    5
}

fn default_true() -> bool {
    true
}

fn default_beta_user() -> Option<f64> {
    Some(adaptfuse_core::choice::DEFAULT_BETA)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSessionRequest {
    #[serde(default = "default_domain")]
    pub domain: DomainKind,
    #[serde(default = "default_k")]
    pub k: usize,
    /// Number of interaction rounds, T.
    #[serde(default = "default_rounds")]
    pub rounds: usize,
    #[serde(default)]
    pub d: Option<usize>,
    /// Random when omitted; echoed back in every view.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_true")]
    pub well_specified: bool,
    #[serde(default = "default_beta_user")]
    pub beta_user: Option<f64>,
    #[serde(default)]
    pub max_hypotheses: Option<usize>,
    /// Server default when omitted.
    #[serde(default)]
    pub backend: Option<Backend>,
    /// Attach the episode's simulated user and suggest its choice each round.
    #[serde(default)]
    pub demo: bool,
}

impl Default for CreateSessionRequest {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChoiceRequest {
    /// 1-based option index.
    pub choice: usize,
}

/// Server-wide settings every session is built from.
#[derive(Debug, Clone, Default)]
pub struct Backends {
    pub default_backend: Backend,
    /// `None` disables the http backend.
    pub http: Option<HttpChatConfig>,
    pub synthetic: SyntheticSamplerConfig,
    pub agent: AgentConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptionView {
    pub index: usize,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub pi_fused: Vec<f64>,
    pub pi_sym: Vec<f64>,
    pub pi_llm: Vec<f64>,
    pub w_llm: f64,
    pub w_sym: f64,
    pub llm_share: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundView {
    /// 1-based.
    pub round: usize,
    pub options: Vec<OptionView>,
    /// 1-based.
    pub recommendation: usize,
    pub diagnostics: Diagnostics,
    /// Demo mode only: what the simulated user would pick.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulated_choice: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundTrace {
    pub round: usize,
    pub options: Vec<String>,
    pub recommendation: usize,
    pub choice: usize,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisView {
    /// 1-based position in the hypothesis set.
    pub index: usize,
    pub weights: Vec<f64>,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorView {
    pub hypothesis_count: usize,
    /// Nats.
    pub entropy: f64,
    /// Sum over all hypotheses; 1 up to rounding.
    pub total_mass: f64,
    pub top: Vec<HypothesisView>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checksums {
    pub belief: String,
    pub memory: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub session_id: String,
    pub domain: DomainKind,
    pub k: usize,
    pub rounds: usize,
    pub seed: u64,
    pub backend: Backend,
    pub demo: bool,
    pub feature_names: Vec<String>,
    pub completed_rounds: usize,
    pub complete: bool,
    /// The round awaiting a choice; `null` once complete.
    pub current: Option<RoundView>,
    pub posterior: PosteriorView,
    pub trace: Vec<RoundTrace>,
    pub checksums: Checksums,
}

/// Enough to rebuild a session by replay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSnapshot {
    pub id: String,
    pub request: CreateSessionRequest,
    /// 1-based choices in order.
    pub choices: Vec<usize>,
}

struct Pending {
    parsed: Option<OptionSet>,
    decision: Decision,
}

pub struct Session {
    id: String,
    request: CreateSessionRequest,
    backend: Backend,
    episode: Episode,
    pipeline: Pipeline,
    sampler: Box<dyn SemanticSampler + Send>,
    state: AgentState,
    pending: Option<Pending>,
    trace: Vec<RoundTrace>,
    choices: Vec<usize>,
    last_active: Instant,
}

fn validate(request: &CreateSessionRequest) -> Result<(), ApiError> {
    if !(2..=MAX_K).contains(&request.k) {
        return Err(ApiError::bad_request(
            "k",
            format!("must be between 2 and {MAX_K}, got {}", request.k),
        ));
    }
    if !(1..=MAX_ROUNDS).contains(&request.rounds) {
        return Err(ApiError::bad_request(
            "rounds",
            format!("must be between 1 and {MAX_ROUNDS}, got {}", request.rounds),
        ));
    }
    Ok(())
}

fn diagnostics(d: &Decision) -> Diagnostics {
    let probs =
        |p: &Option<adaptfuse_core::OptionDistribution>| p.as_ref().map(|p| p.probs().to_vec()).unwrap_or_default();
    let diag = d.diagnostics.expect("the full pipeline always fuses");
    Diagnostics {
        pi_fused: d.fused.probs().to_vec(),
        pi_sym: probs(&d.pi_sym),
        pi_llm: probs(&d.pi_llm),
        w_llm: diag.w_llm,
        w_sym: diag.w_sym,
        llm_share: diag.llm_share,
        bound: diag.bound,
    }
}

impl Session {
    pub fn create(id: String, mut request: CreateSessionRequest, backends: &Backends) -> Result<Self, ApiError> {
        validate(&request)?;
        let seed = *request.seed.get_or_insert_with(rand::random);
        let spec = EpisodeSpec {
            domain: request.domain,
            d: request.d,
            seed,
            rounds: request.rounds,
            k: request.k,
            held_out_count: 0,
            well_specified: request.well_specified,
            beta_user: request.beta_user,
            max_hypotheses: request.max_hypotheses,
        };
        spec.validate()
            .map_err(|e| ApiError::bad_request(core_field(&e), e.to_string()))?;
        let episode = Episode::generate(&spec).map_err(|e| ApiError::bad_request(core_field(&e), e.to_string()))?;

        let backend = request.backend.unwrap_or(backends.default_backend);
        let sampler: Box<dyn SemanticSampler + Send> = match backend {
            Backend::Synthetic => Box::new(
                SyntheticSampler::new(
                    &backends.synthetic,
                    episode.user.weights.clone(),
                    stream_rng(seed, Stream::Sampler),
                )
                .map_err(|e| ApiError::Internal(e.to_string()))?,
            ),
            Backend::Http => {
                let mut config = backends
                    .http
                    .clone()
                    .ok_or_else(|| ApiError::bad_request("backend", "http backend is not configured on this server"))?;
                config.item_noun = episode.schema.item_noun().into();
                Box::new(HttpChatSampler::new(config).map_err(|e| ApiError::Internal(e.to_string()))?)
            }
        };
        let pipeline =
            Pipeline::new(AgentVariant::Adaptfuse, &backends.agent).map_err(|e| ApiError::Internal(e.to_string()))?;
        let state = pipeline.initial_state(&episode.hypotheses);

        let mut session = Self {
            id,
            request,
            backend,
            episode,
            pipeline,
            sampler,
            state,
            pending: None,
            trace: Vec::new(),
            choices: Vec::new(),
            last_active: Instant::now(),
        };
        session.prepare_round();
        Ok(session)
    }

    /// Rebuilds a session by replaying its recorded choices.
    pub fn restore(snapshot: SessionSnapshot, backends: &Backends) -> Result<Self, ApiError> {
        let mut session = Self::create(snapshot.id, snapshot.request, backends)?;
        for choice in snapshot.choices {
            session.choose(choice)?;
        }
        Ok(session)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn last_active(&self) -> Instant {
        self.last_active
    }

    pub fn touch(&mut self) {
        self.last_active = Instant::now();
    }

    pub fn is_complete(&self) -> bool {
        self.trace.len() == self.request.rounds
    }

    pub fn snapshot(&self) -> SessionSnapshot {
        SessionSnapshot {
            id: self.id.clone(),
            request: self.request.clone(),
            choices: self.choices.clone(),
        }
    }

    /// Samples and decides for the next round. The decision is computed once
    /// so that reads never touch the sampler.
    fn prepare_round(&mut self) {
        if self.is_complete() {
            self.pending = None;
            return;
        }
        let options = &self.episode.rounds[self.trace.len()];
        let parsed = self.episode.schema.parse_option_set(options.raw_texts());
        let batch = self
            .pipeline
            .draw_batch(self.sampler.as_mut(), options, &self.state.history)
            .expect("the full pipeline samples");
        let decision = self.pipeline.decide(
            &self.state,
            &self.episode.hypotheses,
            parsed.as_ref(),
            options.k(),
            Some(&batch),
        );
        self.pending = Some(Pending { parsed, decision });
    }

    /// Records the user's 1-based choice for the current round.
    pub fn choose(&mut self, choice: usize) -> Result<(), ApiError> {
        if self.is_complete() {
            return Err(ApiError::Conflict(format!(
                "session {} is complete after {} rounds",
                self.id, self.request.rounds
            )));
        }
        let t = self.trace.len();
        let options = &self.episode.rounds[t];
        if !(1..=options.k()).contains(&choice) {
            return Err(ApiError::bad_request(
                "choice",
                format!("must be between 1 and {}, got {choice}", options.k()),
            ));
        }
        let Pending { parsed, decision } = self.pending.take().expect("an open round has a pending decision");
        let trace = RoundTrace {
            round: t + 1,
            options: options.raw_texts().to_vec(),
            recommendation: decision.chosen + 1,
            choice,
            diagnostics: diagnostics(&decision),
        };
        self.pipeline
            .observe(
                &mut self.state,
                &self.episode.hypotheses,
                options,
                parsed.as_ref(),
                decision,
                choice - 1,
            )
            .map_err(|e| ApiError::Internal(e.to_string()))?;
        self.trace.push(trace);
        self.choices.push(choice);
        self.prepare_round();
        Ok(())
    }

    pub fn view(&self) -> SessionView {
        let t = self.trace.len();
        let current = self.pending.as_ref().map(|p| {
            let options = &self.episode.rounds[t];
            RoundView {
                round: t + 1,
                options: options
                    .raw_texts()
                    .iter()
                    .enumerate()
                    .map(|(i, text)| OptionView {
                        index: i + 1,
                        text: text.clone(),
                    })
                    .collect(),
                recommendation: p.decision.chosen + 1,
                diagnostics: diagnostics(&p.decision),
                simulated_choice: self.request.demo.then(|| self.episode.choices[t] + 1),
            }
        });
        let belief = &self.state.belief;
        let hypotheses = &self.episode.hypotheses;
        let top = belief
            .top_k(TOP_HYPOTHESES)
            .into_iter()
            .map(|(i, probability)| HypothesisView {
                index: i + 1,
                weights: hypotheses
                    .get(i)
                    .expect("belief matches hypothesis set")
                    .weights
                    .clone(),
                probability,
            })
            .collect();
        SessionView {
            session_id: self.id.clone(),
            domain: self.request.domain,
            k: self.request.k,
            rounds: self.request.rounds,
            seed: self.request.seed.expect("filled on create"),
            backend: self.backend,
            demo: self.request.demo,
            feature_names: self
                .episode
                .schema
                .attributes()
                .iter()
                .map(|a| a.name.clone())
                .collect(),
            completed_rounds: t,
            complete: self.is_complete(),
            current,
            posterior: PosteriorView {
                hypothesis_count: hypotheses.len(),
                entropy: belief.entropy(),
                total_mass: belief.probs().iter().sum(),
                top,
            },
            trace: self.trace.clone(),
            checksums: Checksums {
                belief: format!("{:016x}", belief.checksum()),
                memory: format!("{:016x}", self.state.memory.checksum()),
            },
        }
    }
}
