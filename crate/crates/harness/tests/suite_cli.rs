use std::fs;
use std::path::Path;
use std::process::Command;

use adaptfuse_harness::{load_records, run_suite, write_artifacts, SuiteConfig};

const SMALL: &str = r#"{
  "episode": { "domain": "flight", "rounds": 3, "held_out_count": 10 },
  "variants": ["adaptfuse", "sampler_only"],
  "seeds": [0, 1, 2]
}"#;

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let path = dir.join("suite.json");
    fs::write(&path, text).unwrap();
    path
}

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_adaptfuse"))
}

#[test]
fn three_seeds_two_variants_give_six_records_and_one_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg: SuiteConfig = serde_json::from_str(SMALL).unwrap();
    let result = run_suite(&cfg).unwrap();
    let summary = write_artifacts(&result, dir.path()).unwrap();

    let mut names: Vec<String> = fs::read_dir(dir.path().join("records"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(
        names,
        [
            "adaptfuse__seed0.ndjson",
            "adaptfuse__seed1.ndjson",
            "adaptfuse__seed2.ndjson",
            "sampler_only__seed0.ndjson",
            "sampler_only__seed1.ndjson",
            "sampler_only__seed2.ndjson",
        ]
    );
    let csv = fs::read_to_string(summary).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("variant,round,mean_acc,stderr"));
    assert_eq!(lines.count(), 2 * 3);

    let loaded = load_records(dir.path()).unwrap();
    assert_eq!(loaded.len(), 6);
    let mut expected = result.records.clone();
    expected.sort_by_key(|r| (r.agent.slug(), r.seed));
    // Bit-exact: floats are written with 17 significant digits.
    assert_eq!(loaded, expected);
}

#[test]
fn records_are_single_json_lines_with_17_digit_floats() {
    let dir = tempfile::tempdir().unwrap();
    let cfg: SuiteConfig = serde_json::from_str(SMALL).unwrap();
    write_artifacts(&run_suite(&cfg).unwrap(), dir.path()).unwrap();
    let text = fs::read_to_string(dir.path().join("records/adaptfuse__seed0.ndjson")).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.ends_with('\n'));
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(value["agent"], "adaptfuse");
    let acc = value["rounds"][0]["pi_fused"][0].as_f64().unwrap();
    // 17 significant digits survive the round trip exactly.
    assert!(text.contains(&adaptfuse_harness::format::sig17(acc)));
}

#[test]
fn cli_run_then_report() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL);
    let out = dir.path().join("out");
    let status = cli()
        .args(["run", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(out.join("summary.csv").exists());

    for (table, header) in [
        ("rounds", "variant,round,mean_acc,stderr"),
        ("ablation", "variant,first_round_mean"),
        ("schedule", "variant,round,mean_w_sym"),
    ] {
        let output = cli()
            .args(["report", "--in"])
            .arg(&out)
            .args(["--table", table])
            .output()
            .unwrap();
        assert!(output.status.success());
        assert!(String::from_utf8(output.stdout).unwrap().starts_with(header), "{table}");
    }
}

#[test]
fn cli_seed_override_replaces_config_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL);
    let out = dir.path().join("out");
    let status = cli()
        .args(["run", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .args(["--seeds", "7,8,9"])
        .status()
        .unwrap();
    assert!(status.success());
    assert!(out.join("records/sampler_only__seed9.ndjson").exists());
    assert!(!out.join("records/sampler_only__seed0.ndjson").exists());
}

#[test]
fn cli_rejects_bad_config_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    for (text, field) in [
        (r#"{"variants": ["adaptfuse"], "seeds": [0, 1]}"#, "seeds"),
        (
            r#"{"variants": ["adaptfuse"], "seed_count": 3, "episode": {"k": 1}}"#,
            "episode.k",
        ),
        (
            r#"{"variants": ["adaptfuse"], "seed_count": 3, "agent": {"momentum": 1.5}}"#,
            "agent.momentum",
        ),
        (r#"{"variants": [], "seed_count": 3}"#, "variants"),
        (r#"{"variants": ["adaptfuse"], "seed_count": 3, "colour": 1}"#, "colour"),
    ] {
        let config = write_config(dir.path(), text);
        let output = cli()
            .args(["run", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(dir.path())
            .output()
            .unwrap();
        assert!(!output.status.success(), "{text}");
        let stderr = String::from_utf8(output.stderr).unwrap();
        assert!(stderr.contains(field), "{text}: {stderr}");
    }
}

#[test]
fn cli_report_on_empty_directory_fails() {
    let dir = tempfile::tempdir().unwrap();
    let output = cli().args(["report", "--in"]).arg(dir.path()).output().unwrap();
    assert!(!output.status.success());
    assert!(String::from_utf8(output.stderr).unwrap().starts_with("error:"));
}

#[test]
fn cli_http_backend_with_unreachable_endpoint_still_completes() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"{
          "episode": { "rounds": 1, "held_out_count": 2 },
          "variants": ["adaptfuse"],
          "seed_count": 3,
          "http": { "timeout_secs": 0.2, "retries": 0 }
        }"#,
    );
    let out = dir.path().join("out");
    let output = cli()
        .args(["run", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .args(["--backend", "http", "--base-url", "http://127.0.0.1:9"])
        .output()
        .unwrap();
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let records = load_records(&out).unwrap();
    assert!(records.iter().flat_map(|r| &r.rounds).all(|r| r
        .batch
        .as_ref()
        .unwrap()
        .iter()
        .all(|s| s.prediction.is_none())));
}
