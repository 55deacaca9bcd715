use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use sensor_rank::corpus::write_corpus;
use sensor_rank::synthlab::{keyword_plant_corpus, SynthConfig, EXPANSION_KEYWORDS, SEED_KEYWORDS};

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sensor-rank"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn ok(args: &[&str], dir: &Path) -> String {
    let out = run(args, dir);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn contents(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect()
}

/// A small synthetic population that keeps the CLI runs quick.
fn small_config(dir: &Path) {
    let synth = SynthConfig {
        n_users: 800,
        tail_histogram: serde_json::from_str(
            r#"[{"min":1,"max":1,"users":400},{"min":2,"max":2,"users":80},{"min":3,"max":9,"users":40},{"min":20,"max":null,"users":2}]"#,
        )
        .unwrap(),
        training_size: 800,
        ..SynthConfig::default()
    };
    let config = serde_json::json!({ "seed": 3, "n_trees": 5, "folds": 3, "synth": synth });
    fs::write(dir.join("config.json"), config.to_string()).unwrap();
}

#[test]
fn keyword_expansion_recovers_planted_terms() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = keyword_plant_corpus(&SEED_KEYWORDS, &EXPANSION_KEYWORDS, 300, 1).unwrap();
    write_corpus(&dir.path().join("stream.jsonl"), &corpus).unwrap();
    let report = ok(&["keywords", "--corpus", "stream.jsonl", "--out", "kw"], dir.path());
    let report: serde_json::Value = serde_json::from_str(&report).unwrap();
    let mut additions: Vec<&str> = report["additions"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    additions.sort_unstable();
    let mut expected = EXPANSION_KEYWORDS.to_vec();
    expected.sort_unstable();
    assert_eq!(additions, expected);
    let merged = fs::read_to_string(dir.path().join("kw/keywords.txt")).unwrap();
    let mut all: Vec<&str> = SEED_KEYWORDS.iter().chain(&EXPANSION_KEYWORDS).copied().collect();
    all.sort_unstable();
    assert_eq!(merged.lines().collect::<Vec<_>>(), all);
}

#[test]
fn manual_exclusions_skip_terms() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = keyword_plant_corpus(&SEED_KEYWORDS, &EXPANSION_KEYWORDS, 300, 1).unwrap();
    write_corpus(&dir.path().join("stream.jsonl"), &corpus).unwrap();
    fs::write(dir.path().join("skip.txt"), "epidemia\nDoença\n").unwrap();
    let report = ok(
        &["keywords", "--corpus", "stream.jsonl", "--manual-exclusions", "skip.txt", "--top", "8"],
        dir.path(),
    );
    let report: serde_json::Value = serde_json::from_str(&report).unwrap();
    let additions = report["additions"].as_array().unwrap();
    assert_eq!(additions.len(), 8);
    assert!(additions.iter().all(|a| a != "epidemia" && a != "doenca"));
}

#[test]
fn empty_seed_harvest_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = keyword_plant_corpus(&["gripe"], &["febre"], 10, 1).unwrap();
    write_corpus(&dir.path().join("stream.jsonl"), &corpus).unwrap();
    let out = run(&["keywords", "--corpus", "stream.jsonl"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn errors_are_one_json_line() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["train", "--corpus", "missing.jsonl", "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert_eq!(stderr.lines().count(), 1);
    let line: serde_json::Value = serde_json::from_str(stderr.trim()).unwrap();
    assert_eq!(line["command"], "train");
    assert!(line["message"].as_str().unwrap().contains("seed"));
    assert!(out.stdout.is_empty());
}

#[test]
fn pipeline_leaves_inputs_untouched_and_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    small_config(d);
    ok(&["synth", "--config", "config.json", "--out", "data"], d);
    let inputs = contents(&d.join("data"));
    ok(&["train", "--config", "config.json", "--corpus", "data/training.jsonl", "--out", "out"], d);
    ok(&["eval", "--config", "config.json", "--corpus", "data/training.jsonl", "--out", "out"], d);
    ok(&["classify", "--config", "config.json", "--corpus", "data/harvest.jsonl", "--model", "out/model.json", "--out", "out"], d);
    fs::write(d.join("private.txt"), "influencer\n").unwrap();
    ok(
        &[
            "rank", "--config", "config.json", "--corpus", "out/classified.jsonl", "--graph", "data/followers.csv",
            "--exclusions", "private.txt", "--out", "out",
        ],
        d,
    );
    assert_eq!(contents(&d.join("data")), inputs);

    let out = contents(&d.join("out"));
    for name in [
        "model.json", "eval_report.json", "classified.jsonl", "ranking_tr.tsv", "ranking_tf.json",
        "ranking_of.tsv", "components.json", "candidates.json", "rank_summary.json",
    ] {
        assert!(out.contains_key(name), "missing {name}");
    }
    let candidates = String::from_utf8(out["candidates.json"].clone()).unwrap();
    assert!(!candidates.contains("\"influencer\""));
    let summary: serde_json::Value = serde_json::from_slice(&out["rank_summary.json"]).unwrap();
    assert_eq!(summary["histogram"].as_array().unwrap().len(), 7);

    let tsv = ok(&["report", "--config", "config.json", "--metric", "tf", "--k", "3", "--out", "out"], d);
    let lines: Vec<&str> = tsv.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[0].starts_with("user_id\trelevant_count"));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    small_config(d);
    ok(&["synth", "--config", "config.json", "--out", "a"], d);
    ok(&["synth", "--config", "config.json", "--seed", "4", "--out", "b"], d);
    assert_ne!(fs::read(d.join("a/harvest.jsonl")).unwrap(), fs::read(d.join("b/harvest.jsonl")).unwrap());
    let written: serde_json::Value = serde_json::from_slice(&fs::read(d.join("b/synth_config.json")).unwrap()).unwrap();
    assert_eq!(written["seed"], 4);
}
