//! Episode runner, baselines and ablations, and experiment-suite plumbing.
//!
//! Each agent variant runs the same seeded episodes (same user, option sets
//! and choices), so variant comparisons are paired by seed.

pub mod agent;
pub mod episode;
pub mod error;
pub mod format;
pub mod report;
pub mod stats;
pub mod suite;

pub use agent::{AgentConfig, AgentState, AgentVariant, Decision, Pipeline};
pub use episode::{batch_from_records, prior_accuracy, run_episode, EpisodeRecord, RoundRecord, SampleRecord};
pub use error::{HarnessError, Result};
pub use report::{ablation_csv, fusion_schedule, load_records, schedule_csv, summary_csv, RunSummary, SummaryRow};
pub use suite::{run_suite, write_artifacts, Backend, SuiteConfig, SuiteResult};
