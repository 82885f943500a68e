use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn edsf(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_edsf"))
        .arg("--out-dir")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(out: &Path, args: &[&str]) -> Output {
    let o = edsf(out, args);
    assert!(
        o.status.success(),
        "edsf {args:?} exited {:?}\nstdout:\n{}\nstderr:\n{}",
        o.status.code(),
        String::from_utf8_lossy(&o.stdout),
        String::from_utf8_lossy(&o.stderr)
    );
    o
}

fn json(path: impl AsRef<Path>) -> Value {
    let p = path.as_ref();
    serde_json::from_str(&fs::read_to_string(p).unwrap_or_else(|e| panic!("{}: {e}", p.display())))
        .unwrap()
}

/// Manifest is complete and every listed output exists.
fn assert_complete(dir: &Path, command: &str) -> Value {
    let m = json(dir.join("manifest.json"));
    assert_eq!(m["status"], "complete");
    assert_eq!(m["command"], command);
    for o in m["outputs"].as_array().unwrap() {
        assert!(dir.join(o.as_str().unwrap()).exists(), "missing output {o}");
    }
    m
}

fn csv_rows(path: &Path) -> usize {
    csv::Reader::from_path(path).unwrap().records().count()
}

fn gen_coverage(dir: &Path, items: &str, seed: &str) -> PathBuf {
    ok(
        dir,
        &[
            "gen",
            "coverage",
            "--items",
            items,
            "--universe",
            "20",
            "--samples",
            "60",
            "--seed",
            seed,
        ],
    );
    assert_complete(dir, "gen");
    dir.to_path_buf()
}

const QUICK_TRAIN: &[&str] = &[
    "--epochs",
    "15",
    "--r",
    "2",
    "--widths",
    "4,4",
    "--batch-size",
    "16",
];

fn train(dir: &Path, data: &Path, extra: &[&str]) {
    let data = data.to_str().unwrap();
    let mut args = vec!["train", "--data", data, "--seed", "3"];
    args.extend_from_slice(QUICK_TRAIN);
    args.extend_from_slice(extra);
    ok(dir, &args);
}

#[test]
fn gen_train_eval_report_pipeline() {
    let tmp = tempfile::tempdir().unwrap();
    let g = gen_coverage(&tmp.path().join("gen"), "6", "5");
    let data = g.join("dataset.jsonl");
    assert_eq!(fs::read_to_string(&data).unwrap().lines().count(), 60);

    let t = tmp.path().join("train");
    train(&t, &data, &[]);
    let m = assert_complete(&t, "train");
    assert!(m["summary"]["test_l1"]["mean"]
        .as_f64()
        .unwrap()
        .is_finite());
    let metrics = fs::read_to_string(t.join("metrics.csv")).unwrap();
    assert_eq!(metrics.lines().count(), 16);

    let e = tmp.path().join("eval");
    ok(
        &e,
        &[
            "eval",
            "--model",
            t.join("model.json").to_str().unwrap(),
            "--data",
            t.join("test.jsonl").to_str().unwrap(),
        ],
    );
    assert_complete(&e, "eval");
    let eval = json(e.join("eval.json"));
    let summary = json(t.join("summary.json"));
    let (a, b) = (
        eval["mean_l1"].as_f64().unwrap(),
        summary["test_l1"].as_f64().unwrap(),
    );
    assert!(
        (a - b).abs() <= 1e-3 * a.abs().max(1.0),
        "eval {a} vs train summary {b}"
    );

    let r = tmp.path().join("report");
    ok(&r, &["report", "--run", t.to_str().unwrap()]);
    assert_complete(&r, "report");
    assert_eq!(csv_rows(&r.join("train_truth_vs_predicted.csv")), 48);
    assert_eq!(csv_rows(&r.join("test_truth_vs_predicted.csv")), 12);
    assert_eq!(csv_rows(&r.join("loss.csv")), 15);
}

#[test]
fn seeded_runs_reproduce_summaries() {
    let tmp = tempfile::tempdir().unwrap();
    let g1 = gen_coverage(&tmp.path().join("g1"), "5", "9");
    let g2 = gen_coverage(&tmp.path().join("g2"), "5", "9");
    assert_eq!(
        fs::read(g1.join("dataset.jsonl")).unwrap(),
        fs::read(g2.join("dataset.jsonl")).unwrap()
    );
    assert_eq!(
        fs::read(g1.join("oracle.json")).unwrap(),
        fs::read(g2.join("oracle.json")).unwrap()
    );

    let (t1, t2) = (tmp.path().join("t1"), tmp.path().join("t2"));
    train(&t1, &g1.join("dataset.jsonl"), &["--trials", "2"]);
    train(&t2, &g1.join("dataset.jsonl"), &["--trials", "2"]);
    for trial in ["trial_000", "trial_001"] {
        assert_eq!(
            json(t1.join(trial).join("summary.json")),
            json(t2.join(trial).join("summary.json"))
        );
        assert_eq!(
            fs::read(t1.join(trial).join("model.json")).unwrap(),
            fs::read(t2.join(trial).join("model.json")).unwrap()
        );
    }
    assert_eq!(json(t1.join("summary.json")), json(t2.join("summary.json")));
}

#[test]
fn construct_then_report_is_exact() {
    let tmp = tempfile::tempdir().unwrap();
    let g = gen_coverage(&tmp.path().join("gen"), "4", "2");
    for mode in ["submodular", "monotone"] {
        let c = tmp.path().join(mode);
        ok(
            &c,
            &[
                "construct",
                "--oracle",
                g.join("oracle.json").to_str().unwrap(),
                "--mode",
                mode,
            ],
        );
        assert_complete(&c, "construct");
        let r = tmp.path().join(format!("{mode}-report"));
        let data = g.join("dataset.jsonl");
        let data = data.to_str().unwrap();
        ok(
            &r,
            &[
                "report",
                "--run",
                c.to_str().unwrap(),
                "--train-data",
                data,
                "--test-data",
                data,
            ],
        );
        let mut rows = csv::Reader::from_path(r.join("test_truth_vs_predicted.csv")).unwrap();
        let mut count = 0;
        for rec in rows.records() {
            let rec = rec.unwrap();
            let (t, p): (f64, f64) = (rec[0].parse().unwrap(), rec[1].parse().unwrap());
            assert!((t - p).abs() <= 1e-3, "{mode}: truth {t} predicted {p}");
            count += 1;
        }
        assert_eq!(count, 60);
    }
}

#[test]
fn verify_passes_and_injected_bug_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let v = tmp.path().join("verify");
    let o = ok(
        &v,
        &["verify", "--n", "3", "--functions", "3", "--samples", "200"],
    );
    assert!(String::from_utf8_lossy(&o.stdout).contains("PASS"));
    assert_complete(&v, "verify");

    let b = tmp.path().join("bug");
    let o = edsf(
        &b,
        &[
            "verify",
            "--n",
            "3",
            "--functions",
            "3",
            "--samples",
            "200",
            "--inject-bug",
        ],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));
}

#[test]
fn invalid_input_exits_1() {
    let tmp = tempfile::tempdir().unwrap();
    let cases: &[&[&str]] = &[
        &["gen", "coverage", "--p", "1.5"],
        &["verify", "--n", "20"],
        &["train", "--data", "no/such/file.jsonl"],
        &["welfare", "--method", "nonsense"],
        &["no-such-command"],
    ];
    for args in cases {
        let o = edsf(tmp.path(), args);
        assert_eq!(
            o.status.code(),
            Some(1),
            "edsf {args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
}

#[test]
fn welfare_generated_instances() {
    let tmp = tempfile::tempdir().unwrap();
    let w = tmp.path().join("w");
    ok(
        &w,
        &[
            "welfare",
            "--method",
            "gaexact",
            "--users",
            "2",
            "--probs",
            "0.2,0.4",
            "--items",
            "5",
            "--universe",
            "15",
            "--trials",
            "2",
            "--ga-steps",
            "50",
        ],
    );
    let m = assert_complete(&w, "welfare");
    assert_eq!(
        fs::read_to_string(w.join("trials.jsonl"))
            .unwrap()
            .lines()
            .count(),
        2
    );
    assert_eq!(csv_rows(&w.join("aggregate.csv")), 1);
    let eff = m["summary"]["efficiency"]["mean"].as_f64().unwrap();
    assert!(eff > 0.0 && eff <= 1.0 + 1e-9, "efficiency {eff}");

    let b = tmp.path().join("b");
    ok(
        &b,
        &[
            "welfare",
            "--method",
            "brute",
            "--users",
            "2",
            "--probs",
            "0.2,0.4",
            "--items",
            "5",
            "--universe",
            "15",
            "--trials",
            "2",
        ],
    );
    let m = assert_complete(&b, "welfare");
    assert!((m["summary"]["efficiency"]["mean"].as_f64().unwrap() - 1.0).abs() <= 1e-9);
}

#[test]
fn welfare_from_oracle_and_model_files() {
    let tmp = tempfile::tempdir().unwrap();
    let mut oracles = Vec::new();
    let mut models = Vec::new();
    for u in 0..3 {
        let g = gen_coverage(&tmp.path().join(format!("g{u}")), "4", &u.to_string());
        let c = tmp.path().join(format!("c{u}"));
        ok(
            &c,
            &[
                "construct",
                "--oracle",
                g.join("oracle.json").to_str().unwrap(),
            ],
        );
        oracles.push(g.join("oracle.json").to_str().unwrap().to_string());
        models.push(c.join("model.json").to_str().unwrap().to_string());
    }
    let (oracles, models) = (oracles.join(","), models.join(","));
    for method in ["brute", "cg", "gaexact", "ga"] {
        let w = tmp.path().join(format!("w-{method}"));
        let mut args = vec![
            "welfare",
            "--method",
            method,
            "--oracles",
            &oracles,
            "--ga-steps",
            "50",
            "--cg-steps",
            "20",
        ];
        if method == "ga" {
            args.extend_from_slice(&["--models", &models]);
        }
        ok(&w, &args);
        let m = assert_complete(&w, "welfare");
        let eff = m["summary"]["efficiency"]["mean"].as_f64().unwrap();
        assert!(eff > 0.0 && eff <= 1.0 + 1e-9, "{method}: efficiency {eff}");
    }
    let o = edsf(
        &tmp.path().join("bad"),
        &["welfare", "--method", "ga", "--oracles", &oracles],
    );
    assert_eq!(o.status.code(), Some(1));
}
