use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn trlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&out.stdout));
    })
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn analytic_rank_does_not_depend_on_slot() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("t.json");
    let out = trlab(&["gen", "random", "--dims", "2,3,2", "--q", "3", "--seed", "7", "-o", path(&t)]);
    assert!(out.status.success());
    let ranks: Vec<f64> = (0..3)
        .map(|k| {
            let out = trlab(&["rank", path(&t), "--slot", &k.to_string()]);
            assert!(out.status.success());
            json(&out)["analytic_rank"].as_f64().unwrap()
        })
        .collect();
    assert!(ranks.iter().all(|a| (a - ranks[0]).abs() <= 1e-9), "{ranks:?}");
}

#[test]
fn verify_diagonal_over_f5() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("d.json");
    assert!(trlab(&["gen", "diagonal", "--dims", "2,2,2", "--q", "5", "-o", path(&t)]).status.success());
    let out = trlab(&["verify", path(&t)]);
    assert_eq!(out.status.code(), Some(0));
    let rep = json(&out);
    assert_eq!(rep["r"], 2);
    assert_eq!(rep["zero_count"], 81);
}

#[test]
fn rank_one_generator() {
    let out = trlab(&["gen", "rank1", "--dims", "2,3,2", "--q", "4", "--seed", "3"]);
    assert!(out.status.success());
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("r1.json");
    std::fs::write(&t, &out.stdout).unwrap();
    assert_eq!(json(&trlab(&["rank", path(&t)]))["slice_rank"], 1);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(trlab(&["gen", "random", "--dims", "2,2", "--q", "6"]).status.code(), Some(2));
    assert_eq!(trlab(&["rank", "/definitely/missing.json"]).status.code(), Some(2));

    let big = dir.path().join("big.json");
    assert!(trlab(&["gen", "random", "--dims", "1,20,20", "--q", "2", "-o", path(&big)]).status.success());
    assert_eq!(trlab(&["rank", path(&big)]).status.code(), Some(3));

    let poly = dir.path().join("q.json");
    std::fs::write(&poly, r#"{"field":{"p":3,"e":1},"n":2,"terms":[{"exps":[1,1],"coeff":1}]}"#).unwrap();
    assert_eq!(trlab(&["gowers", path(&poly), "--d", "2"]).status.code(), Some(0));
    assert_eq!(trlab(&["gowers", path(&poly), "--d", "3"]).status.code(), Some(2));
}

#[test]
fn pencil_commands() {
    let dir = tempfile::tempdir().unwrap();
    let kr = dir.path().join("kr.json");
    assert!(trlab(&["pencil", "counterexample", "--q", "3", "-o", path(&kr)]).status.success());
    let rep = json(&trlab(&["pencil", "kr", path(&kr)]));
    assert_eq!(rep["affine_hypothesis_base"], true);
    assert_eq!(rep["conclusion"], false);
    assert_eq!(rep["affine_hypothesis_ext"], false);

    let block = dir.path().join("b.json");
    assert!(trlab(&["pencil", "block", "--kind", "ln-transpose", "--n", "3", "--q", "2", "-o", path(&block)]).status.success());
    let prof = json(&trlab(&["pencil", "profile", path(&block), "--ext-e", "2"]));
    let points = prof["points"].as_array().unwrap();
    assert_eq!(points.len(), 5);
    assert!(points.iter().all(|p| p["rank"] == 3));

    let w = json(&trlab(&["pencil", "prop22", path(&kr)]));
    assert_eq!(w["r_tilde"], 3);
    assert!(w["subspace_rank"].as_u64().unwrap() <= 6);
}

#[test]
fn survey_writes_identical_csv_for_any_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"field":{"p":3,"e":1},"dims":[2,2,2],"ensemble":10,"seed":5}"#).unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "4"] {
        let csv = dir.path().join(format!("out{threads}.csv"));
        let out = trlab(&["survey", path(&cfg), "-o", path(&csv), "--threads", threads]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        assert!(dir.path().join(format!("out{threads}.summary.json")).exists());
        outputs.push(std::fs::read(&csv).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    let text = String::from_utf8(outputs.remove(0)).unwrap();
    assert!(text.starts_with("# tensor-rank-lab v1\nseed,q,dims,d,a,r,r_exact,g_hat,checks\n"));
    assert_eq!(text.lines().count(), 12);
}

#[test]
fn survey_rejects_inapplicable_checks() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"field":{"p":2,"e":1},"dims":[2,2,2],"ensemble":1,"checks":["a_ge_g_rough"]}"#).unwrap();
    let out = trlab(&["survey", path(&cfg), "-o", path(&dir.path().join("o.csv"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("q > d"));
}
