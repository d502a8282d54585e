use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use linkpred::io;
use linkpred_core::synthetic::stochastic_block_model;

const SMALL: &str = "\
directed = false
mode = structural-only
walk_length = 12
walks_per_node = 3
struct_dim = 8
struct_epochs = 1
classifier_epochs = 30
seed = 11
";

fn linkpred(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_linkpred"))
        .args(args)
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = linkpred(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn setup(dir: &Path) -> (String, String) {
    let (g, _) = stochastic_block_model(&[20, 20], 0.3, 0.03, false, 2).unwrap();
    let edges = dir.join("edges.tsv");
    let mut buf = Vec::new();
    io::write_edge_list(&g, &mut buf).unwrap();
    fs::write(&edges, buf).unwrap();
    let cfg = dir.join("small.conf");
    fs::write(&cfg, format!("{SMALL}edges = {}\n", edges.display())).unwrap();
    (cfg.display().to_string(), edges.display().to_string())
}

#[test]
fn staged_commands_reproduce_run() {
    let dir = tempfile::tempdir().unwrap();
    let (cfg, _) = setup(dir.path());
    let full = dir.path().join("full");
    let staged = dir.path().join("staged");
    let full_s = full.display().to_string();
    let staged_s = staged.display().to_string();

    let report = ok(&["run", "--config", &cfg, "--output", &full_s]);
    assert!(report.contains("embedding (structural-only)"));

    for stage in ["split", "communities", "walk", "embed-struct", "train", "evaluate"] {
        ok(&[stage, "--config", &cfg, "--output", &staged_s]);
    }
    for name in [
        "split.tsv",
        "communities.tsv",
        "walks.txt",
        "structural.emb",
        "model.json",
    ] {
        assert_eq!(
            fs::read(full.join(name)).unwrap(),
            fs::read(staged.join(name)).unwrap(),
            "{name}"
        );
    }
    let auc_lines = |p: &Path| -> Vec<String> {
        fs::read_to_string(p.join("report.txt"))
            .unwrap()
            .lines()
            .filter(|l| l.starts_with("auc."))
            .map(str::to_owned)
            .collect()
    };
    assert_eq!(auc_lines(&full), auc_lines(&staged));
    assert_eq!(auc_lines(&full).len(), 6);
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let (cfg, _) = setup(dir.path());
    let out = dir.path().join("o").display().to_string();
    let report = ok(&[
        "run",
        "--config",
        &cfg,
        "--output",
        &out,
        "--struct-dim",
        "4",
        "--alpha",
        "0.5",
    ]);
    assert!(report.contains("\nstruct_dim = 4\n"));
    assert!(report.contains("\nalpha = 0.5\n"));
    assert!(report.contains("\nwalk_length = 12\n"));
}

#[test]
fn baseline_prints_scored_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let (cfg, _) = setup(dir.path());
    let out = dir.path().join("o").display().to_string();
    ok(&["split", "--config", &cfg, "--output", &out]);
    let text = ok(&["baseline", "--config", &cfg, "--output", &out, "--kind", "jaccard"]);
    let split = fs::read_to_string(dir.path().join("o/split.tsv")).unwrap();
    let test_pairs = split
        .split("# positive_test\n")
        .nth(1)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .count();
    assert_eq!(text.lines().count(), test_pairs);
    for line in text.lines() {
        let f: Vec<&str> = line.split('\t').collect();
        assert_eq!(f.len(), 3);
        let s: f64 = f[2].parse().unwrap();
        assert!((0.0..=1.0).contains(&s));
    }
}

#[test]
fn sweep_emits_one_row_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let (cfg, _) = setup(dir.path());
    let text = ok(&["sweep", "--config", &cfg, "--values", "2,4,8", "--axis", "structural"]);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "structural_dim\tauc");
    assert_eq!(lines.len(), 4);
}

#[test]
fn failures_exit_nonzero_with_stage_name() {
    let dir = tempfile::tempdir().unwrap();
    let (cfg, _) = setup(dir.path());
    let out_dir = dir.path().join("o").display().to_string();

    let missing = linkpred(&[
        "run",
        "--config",
        &cfg,
        "--output",
        &out_dir,
        "--edges",
        "/nonexistent/edges.tsv",
    ]);
    assert!(!missing.status.success());
    let err = String::from_utf8_lossy(&missing.stderr);
    assert!(err.starts_with("error: ingest: /nonexistent/edges.tsv"), "{err}");

    let bad = linkpred(&["run", "--config", &cfg, "--output", &out_dir, "--alpha", "2"]);
    assert!(!bad.status.success());
    assert!(String::from_utf8_lossy(&bad.stderr).starts_with("error: config: "));

    let early = linkpred(&["walk", "--config", &cfg, "--output", &out_dir]);
    assert!(!early.status.success());
    assert!(String::from_utf8_lossy(&early.stderr).starts_with("error: walk: "));

    let malformed = dir.path().join("bad.tsv");
    fs::write(&malformed, "a\tb\nc\td\tnope\n").unwrap();
    let m = linkpred(&["ingest", "--edges", &malformed.display().to_string()]);
    assert!(!m.status.success());
    let err = String::from_utf8_lossy(&m.stderr);
    assert!(err.contains("ingest: line 2: "), "{err}");
}

#[test]
fn ingest_reports_counts() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("e.tsv");
    fs::write(&edges, "a\tb\na\tb\nb\tb\nb\tc\t2\n").unwrap();
    let text = ok(&["ingest", "--edges", &edges.display().to_string()]);
    assert!(text.contains("nodes = 3\n"));
    assert!(text.contains("edges = 2\n"));
    assert!(text.contains("self_loops_dropped = 1\n"));
    assert!(text.contains("duplicates_merged = 1\n"));
}
