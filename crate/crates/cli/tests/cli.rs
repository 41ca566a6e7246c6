use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn deed(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_deed"))
        .args(args)
        .current_dir(dir)
        .env_remove("DEED_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = deed(dir, args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn gen(dir: &Path, name: &str, preset: &str) {
    ok(dir, &["gen", "--preset", preset, "--n", "500", "--hs-dim", "64", "--pd-k", "50", "--seed", "7", "-o", name]);
}

fn jsonl_rows(path: &Path) -> Vec<serde_json::Value> {
    fs::read_to_string(path).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

#[test]
fn gen_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    gen(dir.path(), "a.deed", "le-like");
    gen(dir.path(), "b.deed", "le-like");
    assert_eq!(fs::read(dir.path().join("a.deed")).unwrap(), fs::read(dir.path().join("b.deed")).unwrap());
}

#[test]
fn eval_on_the_same_file_is_contamination() {
    let dir = tempfile::tempdir().unwrap();
    gen(dir.path(), "a.deed", "le-like");
    let out = deed(dir.path(), &["eval", "--train", "a.deed", "--test", "a.deed"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("contamination"));
}

#[test]
fn le_like_eval_scores_high() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    gen(d, "a.deed", "le-like");
    let before = fs::read(d.join("a.deed")).unwrap();
    ok(d, &["split", "--data", "a.deed", "--train-out", "train.deed", "--test-out", "test.deed"]);
    let out = ok(d, &["eval", "--train", "train.deed", "--test", "test.deed"]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("HS_PD"));
    let rows = jsonl_rows(&d.join("eval.jsonl"));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0]["experiment_kind"], "ID");
    assert!(rows[0]["f1"].as_f64().unwrap() >= 0.9, "{}", rows[0]);
    assert!(d.join("eval.csv").exists());
    assert_eq!(fs::read(d.join("a.deed")).unwrap(), before);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(deed(d, &["--no-such-flag"]).status.code(), Some(1));
    assert_eq!(deed(d, &["eval", "--help"]).status.code(), Some(0));
    assert_eq!(deed(d, &["inspect", "missing.deed"]).status.code(), Some(2));
    fs::write(d.join("junk.deed"), b"not a feature file").unwrap();
    assert_eq!(deed(d, &["inspect", "junk.deed"]).status.code(), Some(2));
    gen(d, "a.deed", "le-like");
    let bytes = fs::read(d.join("a.deed")).unwrap();
    fs::write(d.join("cut.deed"), &bytes[..bytes.len() - 3]).unwrap();
    assert_eq!(deed(d, &["inspect", "cut.deed"]).status.code(), Some(2));
    assert_eq!(deed(d, &["eval", "--data", "a.deed", "--n-train", "2000"]).status.code(), Some(1));
}

#[test]
fn train_then_predict() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    gen(d, "a.deed", "le-like");
    ok(d, &["split", "--data", "a.deed", "--train-out", "tr.deed", "--test-out", "te.deed"]);
    ok(d, &["train", "--data", "tr.deed", "--mode", "PD", "--detector", "linear-l1", "-o", "m.json"]);
    let out = ok(d, &["predict", "--model", "m.json", "--data", "te.deed"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("fact_id,label,predicted"));
    let rows: Vec<Vec<i64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    let correct = rows.iter().filter(|r| r[1] == r[2]).count();
    assert!(correct as f64 >= 0.9 * rows.len() as f64);
}

#[test]
fn sweep_and_report_use_the_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    gen(d, "a.deed", "ml-like");
    let out = Command::new(env!("CARGO_BIN_EXE_deed"))
        .args(["--workers", "2", "sweep", "--data", "a.deed", "--sizes", "10,50,50", "--seeds", "0,1"])
        .current_dir(d)
        .env("DEED_OUT_DIR", "results")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("duplicate"));
    let rows = jsonl_rows(&d.join("results/sweep.jsonl"));
    let cells: Vec<(u64, u64)> = rows.iter().map(|r| (r["n_train"].as_u64().unwrap(), r["seed"].as_u64().unwrap())).collect();
    assert_eq!(cells, vec![(10, 0), (10, 1), (50, 0), (50, 1)]);

    ok(d, &["eval", "--data", "a.deed", "--name", "single"]);
    let out = ok(d, &["report", "results/sweep.csv", "single.jsonl", "-o", "all.jsonl"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 6);
    assert_eq!(jsonl_rows(&d.join("all.jsonl")).len(), 5);
}

#[test]
fn analyze_writes_plot_data() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    gen(d, "a.deed", "le-like");
    ok(d, &["analyze", "lda", "--data", "a.deed", "-o", "lda.csv"]);
    ok(d, &["analyze", "kde", "--data", "a.deed", "-o", "kde.csv"]);
    let lda = fs::read_to_string(d.join("lda.csv")).unwrap();
    assert_eq!(lda.lines().next(), Some("fact_id,label,z,jitter"));
    assert_eq!(lda.lines().count(), 1001);
    assert_eq!(fs::read_to_string(d.join("kde.csv")).unwrap().lines().count(), 1 + 2 * 512);
}

#[test]
fn layers_and_shift() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    gen(d, "base.deed", "le-like");
    ok(d, &["shift", "--data", "base.deed", "-o", "shifted.deed"]);
    let out = ok(d, &["inspect", "shifted.deed"]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("synthetic-shifted"));
    let out = deed(d, &["layers", "base.deed", "shifted.deed"]);
    assert_eq!(out.status.code(), Some(1), "mixed model ids must be rejected");
    ok(d, &["layers", "base.deed", "--out-dir", "l"]);
    let grid = fs::read_to_string(d.join("l/layers.csv")).unwrap();
    assert_eq!(grid.lines().next(), Some("layer_index,f1"));
    assert_eq!(grid.lines().count(), 2);
}
