//! Seed-level summaries and the CSV tables built from episode records.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::episode::EpisodeRecord;
use crate::error::{HarnessError, Result};
use crate::format::sig17;
use crate::stats::{mean, stderr};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub variant: String,
    /// 1-based.
    pub round: usize,
    pub mean_acc: f64,
    pub stderr: f64,
    pub seeds: usize,
}

/// Mean ± standard error of held-out accuracy per (variant, round).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub rows: Vec<SummaryRow>,
}

/// Records grouped by variant label, in order of first appearance.
pub fn group_by_variant(records: &[EpisodeRecord]) -> Vec<(String, Vec<&EpisodeRecord>)> {
    let mut groups: Vec<(String, Vec<&EpisodeRecord>)> = Vec::new();
    for r in records {
        let label = r.agent.to_string();
        match groups.iter_mut().find(|(l, _)| *l == label) {
            Some((_, g)) => g.push(r),
            None => groups.push((label, vec![r])),
        }
    }
    groups
}

/// Per-round values of `f` across a group, one inner vector per round.
fn per_round<F: Fn(&EpisodeRecord, usize) -> Option<f64>>(group: &[&EpisodeRecord], f: F) -> Vec<Vec<f64>> {
    let rounds = group.iter().map(|r| r.rounds.len()).max().unwrap_or(0);
    (0..rounds)
        .map(|t| group.iter().filter_map(|r| f(r, t)).collect())
        .collect()
}

impl RunSummary {
    pub fn from_records(records: &[EpisodeRecord]) -> Self {
        let mut rows = Vec::new();
        for (variant, group) in group_by_variant(records) {
            let accs = per_round(&group, |r, t| r.rounds.get(t).map(|x| x.held_out_accuracy));
            for (t, values) in accs.iter().enumerate() {
                rows.push(SummaryRow {
                    variant: variant.clone(),
                    round: t + 1,
                    mean_acc: mean(values),
                    stderr: stderr(values),
                    seeds: values.len(),
                });
            }
        }
        Self { rows }
    }

    pub fn row(&self, variant: &str, round: usize) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| r.variant == variant && r.round == round)
    }

    /// `(first-round row, final-round row)` for a variant.
    pub fn first_and_final(&self, variant: &str) -> Option<(&SummaryRow, &SummaryRow)> {
        let mut rows = self.rows.iter().filter(|r| r.variant == variant);
        let first = rows.next()?;
        let last = rows.next_back().unwrap_or(first);
        Some((first, last))
    }
}

fn write_csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| HarnessError::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// `variant,round,mean_acc,stderr`.
pub fn summary_csv(summary: &RunSummary) -> Result<String> {
    write_csv(
        &["variant", "round", "mean_acc", "stderr"],
        summary.rows.iter().map(|r| {
            vec![
                r.variant.clone(),
                r.round.to_string(),
                sig17(r.mean_acc),
                sig17(r.stderr),
            ]
        }),
    )
}

/// First- and final-round accuracy per variant.
pub fn ablation_csv(records: &[EpisodeRecord]) -> Result<String> {
    let summary = RunSummary::from_records(records);
    let mut rows = Vec::new();
    for (variant, _) in group_by_variant(records) {
        let (first, last) = summary.first_and_final(&variant).expect("variant has rows");
        rows.push(vec![
            variant,
            sig17(first.mean_acc),
            sig17(first.stderr),
            sig17(last.mean_acc),
            sig17(last.stderr),
            last.seeds.to_string(),
        ]);
    }
    write_csv(
        &[
            "variant",
            "first_round_mean",
            "first_round_stderr",
            "final_round_mean",
            "final_round_stderr",
            "seeds",
        ],
        rows,
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleRow {
    pub variant: String,
    pub round: usize,
    pub mean_w_sym: f64,
    pub mean_w_llm: f64,
    pub mean_llm_share: f64,
    pub mean_truth_choice_entropy: f64,
}

/// Per-round mean fusion weights, for variants that fuse both sources.
pub fn fusion_schedule(records: &[EpisodeRecord]) -> Vec<ScheduleRow> {
    let mut out = Vec::new();
    for (variant, group) in group_by_variant(records) {
        if !group.iter().any(|r| r.rounds.iter().any(|x| x.llm_share.is_some())) {
            continue;
        }
        let w_sym = per_round(&group, |r, t| r.rounds.get(t).and_then(|x| x.w_sym));
        let w_llm = per_round(&group, |r, t| r.rounds.get(t).and_then(|x| x.w_llm));
        let share = per_round(&group, |r, t| r.rounds.get(t).and_then(|x| x.llm_share));
        let h_true = per_round(&group, |r, t| r.rounds.get(t).map(|x| x.truth_choice_entropy));
        for t in 0..w_sym.len() {
            out.push(ScheduleRow {
                variant: variant.clone(),
                round: t + 1,
                mean_w_sym: mean(&w_sym[t]),
                mean_w_llm: mean(&w_llm[t]),
                mean_llm_share: mean(&share[t]),
                mean_truth_choice_entropy: mean(&h_true[t]),
            });
        }
    }
    out
}

pub fn schedule_csv(records: &[EpisodeRecord]) -> Result<String> {
    write_csv(
        &[
            "variant",
            "round",
            "mean_w_sym",
            "mean_w_llm",
            "mean_llm_share",
            "mean_truth_choice_entropy",
        ],
        fusion_schedule(records).into_iter().map(|r| {
            vec![
                r.variant,
                r.round.to_string(),
                sig17(r.mean_w_sym),
                sig17(r.mean_w_llm),
                sig17(r.mean_llm_share),
                sig17(r.mean_truth_choice_entropy),
            ]
        }),
    )
}

/// Loads every `records/*.ndjson` under `dir`, sorted by file name.
pub fn load_records(dir: &Path) -> Result<Vec<EpisodeRecord>> {
    let records_dir = dir.join("records");
    let mut paths: Vec<_> = fs::read_dir(&records_dir)
        .map_err(HarnessError::io(&records_dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "ndjson"))
        .collect();
    paths.sort();
    let mut out = Vec::new();
    for path in paths {
        let text = fs::read_to_string(&path).map_err(HarnessError::io(&path))?;
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            out.push(serde_json::from_str(line).map_err(|source| HarnessError::Json {
                path: path.clone(),
                source,
            })?);
        }
    }
    if out.is_empty() {
        return Err(HarnessError::config(
            "in",
            format!("no records under {}", records_dir.display()),
        ));
    }
    Ok(out)
}
