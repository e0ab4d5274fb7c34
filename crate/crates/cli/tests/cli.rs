use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use depsel::evaluate::EvalReport;
use depsel::synth::ReviewSpec;

fn depsel(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_depsel"));
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Synthetic reviews plus three documents (one per class) with no word vector.
fn fixture(dir: &Path, n_docs: usize) -> (PathBuf, PathBuf) {
    let r = ReviewSpec {
        n_docs,
        dim: 12,
        seed: 3,
        ..Default::default()
    }
    .generate();
    let (csv, vecs) = r.write(dir).unwrap();
    let mut text = std::fs::read_to_string(&csv).unwrap();
    text.push_str("qqqx zzzy,1\nqqqx wwwv,3\nzzzy wwwv,5\n");
    std::fs::write(&csv, text).unwrap();
    (csv, vecs)
}

#[test]
fn ingest_ten_rows_is_balanced_and_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("ten.csv");
    std::fs::write(
        &csv,
        "text,score\nGreat unit,5\nLoved it,4\nokay I guess,3\nfine,3\nmeh,3\nawful,1\nbad lectures,2\nnot good,1\ngood,5\nbrilliant,4\n",
    )
    .unwrap();
    let out1 = dir.path().join("a");
    let out2 = dir.path().join("b");
    for out in [&out1, &out2] {
        let o = depsel(&["ingest", "--input", s(&csv), "--seed", "9", "--out", s(out)], &[]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let a = std::fs::read(out1.join("corpus.json")).unwrap();
    let b = std::fs::read(out2.join("corpus.json")).unwrap();
    assert_eq!(a, b);
    let summary: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out1.join("ingest_summary.json")).unwrap()).unwrap();
    let after = summary["categories_after_rebalance"].as_object().unwrap();
    assert_eq!(after.len(), 3);
    assert!(after.values().all(|v| v == 3));
}

#[test]
fn bad_score_exits_2_with_row_number() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("bad.csv");
    std::fs::write(&csv, "text,score\ngood,5\nbad,1\nhmm,seven\n").unwrap();
    let o = depsel(&["ingest", "--input", s(&csv), "--out", s(&dir.path().join("o"))], &[]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("row 3"), "{err}");
}

#[test]
fn w2v_without_embeddings_names_the_flag() {
    let dir = tempfile::tempdir().unwrap();
    let (csv, _) = fixture(dir.path(), 30);
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"featurizers": ["w2v"], "classifiers": ["gsvm"]}"#).unwrap();
    let o = depsel(
        &[
            "run",
            "--config",
            s(&cfg),
            "--input",
            s(&csv),
            "--out",
            s(&dir.path().join("o")),
        ],
        &[],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--embeddings"));

    let o = depsel(
        &[
            "run",
            "--input",
            s(&csv),
            "--embeddings",
            s(&dir.path().join("nope.txt")),
        ],
        &[],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--embeddings"));
}

#[test]
fn minimal_run_then_inspect() {
    let dir = tempfile::tempdir().unwrap();
    let (csv, vecs) = fixture(dir.path(), 60);
    let out = dir.path().join("out");
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"featurizers": ["w2v"], "reducers": ["none", "pca", "rdc", "mmd"], "classifiers": ["gsvm"], "target_dim": 5}"#,
    )
    .unwrap();
    let o = depsel(
        &[
            "run",
            "--config",
            s(&cfg),
            "--input",
            s(&csv),
            "--embeddings",
            s(&vecs),
            "--out",
            s(&out),
            "--folds",
            "3",
        ],
        &[("DEPSEL_THREADS", "2")],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: EvalReport = serde_json::from_slice(&std::fs::read(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report.rows.len(), 4);
    assert_eq!(report.dropped.len(), 3);
    assert!(out.join("report.md").exists());
    assert!(out.join("models/w2v_gsvm.json").exists());
    assert!(out.join("selections/w2v_rdc.json").exists());

    let id = report.doc_ids[0].to_string();
    let o = depsel(&["inspect", &id, "--out", s(&out)], &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(
        lines[2].matches("(correct)").count() + lines[2].matches("(wrong)").count(),
        4
    );

    let o = depsel(&["inspect", "--out", s(&out)], &[]);
    assert!(o.status.success());
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 2);

    let dropped = report.dropped[0].to_string();
    let o = depsel(&["inspect", &dropped, "--out", s(&out)], &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("dropped"));

    let o = depsel(&["inspect", "100000", "--out", s(&out)], &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("ids in"));
}

#[test]
fn featurize_select_and_stat() {
    let dir = tempfile::tempdir().unwrap();
    let (csv, vecs) = fixture(dir.path(), 45);
    let out = dir.path().join("out");
    let o = depsel(
        &[
            "featurize",
            "--input",
            s(&csv),
            "--embeddings",
            s(&vecs),
            "--out",
            s(&out),
        ],
        &[],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["bow", "tfidf", "w2v"] {
        assert!(out.join(format!("features_{f}.csv")).exists());
    }
    let o = depsel(
        &[
            "select",
            "--input",
            s(&out.join("features_w2v.csv")),
            "--target-dim",
            "4",
            "--out",
            s(&out),
        ],
        &[],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let sel: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.join("selection_rdc.json")).unwrap()).unwrap();
    assert_eq!(sel["selected"].as_array().unwrap().len(), 4);
    assert!(out.join("reduced_pca.csv").exists());

    let o = depsel(
        &["stat", "--input", s(&csv), "--embeddings", s(&vecs), "--out", s(&out)],
        &[],
    );
    assert!(o.status.success());
    let stat: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(stat["documents"], 48);
    assert_eq!(stat["embeddings"]["documents_without_vectors"], 3);
}

#[test]
fn bad_thread_count_is_input_error() {
    let o = depsel(&["stat"], &[("DEPSEL_THREADS", "zero")]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn help_and_unknown_flags() {
    let o = depsel(&["--help"], &[]);
    assert!(o.status.success());
    let help = String::from_utf8(o.stdout).unwrap();
    for cmd in ["ingest", "featurize", "select", "run", "inspect", "stat", "bench"] {
        assert!(help.contains(cmd));
    }
    let o = depsel(&["run", "--frobnicate"], &[]);
    assert_eq!(o.status.code(), Some(2));
}
