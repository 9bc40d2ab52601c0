//! Config-driven experiment suites: every (variant, seed) pair, in parallel,
//! with artifacts written deterministically.

use std::fs;
use std::path::{Path, PathBuf};

use adaptfuse_core::aggregation::{
    HttpChatConfig, HttpChatSampler, SemanticSampler, SyntheticSampler, SyntheticSamplerConfig,
};
use adaptfuse_core::tasks::{stream_rng, Episode, EpisodeSpec, Stream};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agent::{AgentConfig, AgentVariant, Pipeline};
use crate::episode::{run_episode, EpisodeRecord};
use crate::error::{HarnessError, Result};
use crate::format::to_json_line;
use crate::report::{summary_csv, RunSummary};

/// Standard errors need at least this many seeds.
pub const MIN_SEEDS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    #[default]
    Synthetic,
    Http,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    /// Episode template; its `seed` is replaced per run.
    #[serde(default)]
    pub episode: EpisodeSpec,
    pub variants: Vec<AgentVariant>,
    /// Explicit seeds; otherwise `0..seed_count`.
    #[serde(default)]
    pub seeds: Option<Vec<u64>>,
    #[serde(default)]
    pub seed_count: Option<usize>,
    #[serde(default)]
    pub backend: Backend,
    #[serde(default)]
    pub agent: AgentConfig,
    #[serde(default)]
    pub synthetic: SyntheticSamplerConfig,
    #[serde(default)]
    pub http: HttpChatConfig,
    /// Worker threads; defaults to all cores.
    #[serde(default)]
    pub threads: Option<usize>,
}

impl SuiteConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(HarnessError::io(path))?;
        serde_json::from_str(&text).map_err(|source| HarnessError::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn seed_list(&self) -> Result<Vec<u64>> {
        match (&self.seeds, self.seed_count) {
            (Some(_), Some(_)) => Err(HarnessError::config(
                "seeds",
                "give either seeds or seed_count, not both",
            )),
            (Some(s), None) => Ok(s.clone()),
            (None, Some(n)) => Ok((0..n as u64).collect()),
            (None, None) => Err(HarnessError::config("seeds", "missing; give seeds or seed_count")),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.variants.is_empty() {
            return Err(HarnessError::config("variants", "need at least one agent variant"));
        }
        for (i, v) in self.variants.iter().enumerate() {
            v.validate()
                .map_err(|e| HarnessError::config(format!("variants[{i}]"), e.to_string()))?;
            if self.variants[..i].contains(v) {
                return Err(HarnessError::config(
                    format!("variants[{i}]"),
                    format!("duplicate variant {v}"),
                ));
            }
        }
        let seeds = self.seed_list()?;
        if seeds.len() < MIN_SEEDS {
            return Err(HarnessError::config(
                "seeds",
                format!(
                    "need at least {MIN_SEEDS} seeds for a standard error, got {}",
                    seeds.len()
                ),
            ));
        }
        let mut sorted = seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != seeds.len() {
            return Err(HarnessError::config("seeds", "duplicate seeds"));
        }
        if self.episode.rounds == 0 {
            return Err(HarnessError::config(
                "episode.rounds",
                "a suite needs at least one interaction round",
            ));
        }
        self.episode
            .validate()
            .map_err(|e| HarnessError::config(format!("episode.{}", core_field(&e)), e.to_string()))?;
        self.agent
            .validate()
            .map_err(|e| HarnessError::config(format!("agent.{}", core_field(&e)), e.to_string()))?;
        if self.backend == Backend::Synthetic {
            self.synthetic
                .validate()
                .map_err(|e| HarnessError::config(format!("synthetic.{}", core_field(&e)), e.to_string()))?;
        }
        if self.threads == Some(0) {
            return Err(HarnessError::config("threads", "must be at least 1"));
        }
        Ok(())
    }
}

fn core_field(e: &adaptfuse_core::CoreError) -> &'static str {
    match e {
        adaptfuse_core::CoreError::InvalidConfig { field, .. } => field,
        _ => "value",
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    /// Ordered by variant (config order), then seed (config order).
    pub records: Vec<EpisodeRecord>,
    pub summary: RunSummary,
}

/// Builds the sampler for one (variant, seed) run.
fn make_sampler(config: &SuiteConfig, episode: &Episode) -> Result<Box<dyn SemanticSampler>> {
    Ok(match config.backend {
        Backend::Synthetic => Box::new(SyntheticSampler::new(
            &config.synthetic,
            episode.user.weights.clone(),
            stream_rng(episode.spec.seed, Stream::Sampler),
        )?),
        Backend::Http => {
            let mut http = config.http.clone();
            if http.item_noun == HttpChatConfig::default().item_noun {
                http.item_noun = episode.schema.item_noun().into();
            }
            Box::new(HttpChatSampler::new(http.with_env_api_key())?)
        }
    })
}

fn run_seed(config: &SuiteConfig, pipelines: &[Pipeline], seed: u64) -> Result<Vec<EpisodeRecord>> {
    let spec = EpisodeSpec {
        seed,
        ..config.episode.clone()
    };
    let episode = Episode::generate(&spec)?;
    pipelines
        .iter()
        .map(|pipeline| {
            let mut sampler = make_sampler(config, &episode)?;
            let sampler: Option<&mut dyn SemanticSampler> = pipeline
                .variant()
                .uses_sampler()
                .then_some(sampler.as_mut() as &mut dyn SemanticSampler);
            Ok(run_episode(&episode, pipeline, sampler)?)
        })
        .collect()
}

/// Runs every (variant, seed) pair. Deterministic for the synthetic backend
/// regardless of thread count.
pub fn run_suite(config: &SuiteConfig) -> Result<SuiteResult> {
    config.validate()?;
    let seeds = config.seed_list()?;
    let pipelines: Vec<Pipeline> = config
        .variants
        .iter()
        .map(|&v| Pipeline::new(v, &config.agent))
        .collect::<std::result::Result<_, _>>()?;

    let run = || -> Result<Vec<Vec<EpisodeRecord>>> {
        seeds
            .par_iter()
            .map(|&seed| run_seed(config, &pipelines, seed))
            .collect()
    };
    let per_seed = match config.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| HarnessError::config("threads", e.to_string()))?
            .install(run)?,
        None => run()?,
    };

    // Transpose seed-major results into variant-major order.
    let mut records = Vec::with_capacity(seeds.len() * pipelines.len());
    for v in 0..pipelines.len() {
        for seed_records in &per_seed {
            records.push(seed_records[v].clone());
        }
    }
    let summary = RunSummary::from_records(&records);
    Ok(SuiteResult { records, summary })
}

pub fn record_file_name(record: &EpisodeRecord) -> String {
    format!("{}__seed{}.ndjson", record.agent.slug(), record.seed)
}

/// Writes `records/<variant>__seed<seed>.ndjson` (one JSON line each) and
/// `summary.csv` under `out`. Returns the summary path.
pub fn write_artifacts(result: &SuiteResult, out: &Path) -> Result<PathBuf> {
    let records_dir = out.join("records");
    fs::create_dir_all(&records_dir).map_err(HarnessError::io(&records_dir))?;
    for record in &result.records {
        let path = records_dir.join(record_file_name(record));
        let mut line = to_json_line(record).map_err(|source| HarnessError::Json {
            path: path.clone(),
            source,
        })?;
        line.push('\n');
        fs::write(&path, line).map_err(HarnessError::io(&path))?;
    }
    let summary_path = out.join("summary.csv");
    fs::write(&summary_path, summary_csv(&result.summary)?).map_err(HarnessError::io(&summary_path))?;
    Ok(summary_path)
}
