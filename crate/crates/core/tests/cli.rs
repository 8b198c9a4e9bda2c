use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hypwalk"))
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn run(config: &Path, out: &Path, extra: &[&str]) -> Output {
    bin()
        .arg("run")
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .unwrap()
}

fn csv_records(path: &Path) -> Vec<csv::StringRecord> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(Result::unwrap).collect()
}

#[test]
fn drift_run_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "drift.json",
        r#"{ "kind": "drift", "seed": 11, "measure": { "type": "srw", "rank": 2 }, "n_grid": [2000], "trials": 400 }"#,
    );
    let out = dir.path().join("out");
    let o = run(&cfg, &out, &["--threads", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_records(&out.join("drift.csv"));
    let estimate = rows.iter().find(|r| &r[6] == "estimate").unwrap();
    let ell: f64 = estimate[3].parse().unwrap();
    assert!((0.495..=0.505).contains(&ell), "{ell}");

    let json: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("drift.json")).unwrap()).unwrap();
    assert_eq!(json["experiment"], "drift");
    assert_eq!(json["seed"], 11);
    assert_eq!(json["threads"], 2);
    assert!(json["invariants"].as_array().unwrap().iter().all(|c| c["passed"] == true));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "tail.json",
        r#"{ "kind": "tail", "measure": { "type": "srw", "rank": 2 }, "n_grid": [50, 100],
            "t_grid": [0.1, 0.2], "trials": 400, "samples": 100 }"#,
    );
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    assert!(run(&cfg, &a, &["--seed", "5", "--threads", "1"]).status.success());
    assert!(run(&cfg, &b, &["--seed", "5", "--threads", "3"]).status.success());
    assert!(run(&cfg, &c, &["--seed", "6", "--threads", "1"]).status.success());
    let read = |d: &Path| std::fs::read(d.join("tail.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
}

#[test]
fn bounds_table_at_lambda_one_is_vacuous() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bounds.json",
        r#"{ "kind": "bounds-table", "model": { "type": "tree", "rank": 2 }, "kappa": 1.0,
            "lambdas": [1.0], "n_grid": [1000000], "t_grid": [0.1, 0.5] }"#,
    );
    let out = dir.path().join("out");
    let o = run(&cfg, &out, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_records(&out.join("bounds-table.csv"));
    assert!(!rows.is_empty());
    for r in &rows {
        if !r[5].is_empty() && &r[6] != "estimate" {
            let finite_prob = r[5].parse::<f64>().map(|v| v >= 1.0 || v <= 0.0);
            assert!(&r[5] == "inf" || finite_prob == Ok(true), "{r:?}");
            assert_eq!(&r[7], "true", "{r:?}");
        }
    }
    assert!(rows.iter().any(|r| &r[5] == "inf"));
}

#[test]
fn malformed_config_reports_location() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.json", "{\n  \"kind\": \"drift\",\n  \"trials\": oops\n}\n");
    let o = run(&cfg, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 3"), "{err}");

    let cfg = write_config(dir.path(), "unknown.json", r#"{ "kind": "drift", "colour": 1 }"#);
    let o = run(&cfg, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("colour"));

    let o = run(&dir.path().join("missing.json"), &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_suite_lists_suites() {
    let o = bin().args(["acceptance", "nonsense"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    for suite in ["drift", "kesten", "pingpong", "determinism", "all"] {
        assert!(err.contains(suite), "{err}");
    }
}

#[test]
fn single_acceptance_suite_runs() {
    let o = bin().args(["acceptance", "constants", "--threads", "1"]).output().unwrap();
    assert!(o.status.success());
    let out = String::from_utf8_lossy(&o.stdout);
    assert!(out.starts_with("PASS"), "{out}");
}

#[test]
fn list_models_names_every_kind() {
    let o = bin().arg("list-models").output().unwrap();
    assert!(o.status.success());
    let out = String::from_utf8_lossy(&o.stdout);
    for kind in hypwalk::cli::ExperimentKind::ALL {
        assert!(out.contains(kind.name().as_str()), "{kind:?}");
    }
    assert!(out.contains("tree") && out.contains("plane"));
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            let cfg = hypwalk::cli::ExperimentConfig::load(&path).unwrap();
            if cfg.measure.is_some() {
                cfg.measure().unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            }
            seen += 1;
        }
    }
    assert!(seen >= 9);
}
