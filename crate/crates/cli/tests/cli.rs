use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use jsonschema::JSONSchema;
use serde_json::Value;

const EPOCH: &str = "1700000000";

fn q8(args: &[&str]) -> Output {
    q8_env(args, &[])
}

fn q8_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_q8"));
    cmd.args(args)
        .env("SOURCE_DATE_EPOCH", EPOCH)
        .env_remove("Q8_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("q8 runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8")
}

fn json(args: &[&str]) -> Value {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let o = q8(&all);
    assert!(
        o.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    serde_json::from_slice(&o.stdout).expect("valid json")
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn schema(name: &str) -> JSONSchema {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("schemas")
        .join(format!("{name}.schema.json"));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    JSONSchema::compile(&doc).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn assert_valid(name: &str, doc: &Value) {
    for (schema_name, part) in [("envelope", doc), (name, &doc["payload"])] {
        let compiled = schema(schema_name);
        let errors: Vec<String> = match compiled.validate(part) {
            Ok(()) => Vec::new(),
            Err(e) => e.map(|e| e.to_string()).collect(),
        };
        assert!(
            errors.is_empty(),
            "{name} against {schema_name}: {errors:?}"
        );
    }
}

#[test]
fn group_verify_relations_hold() {
    let doc = json(&["group", "verify"]);
    let rel = doc["payload"]["relations"].as_array().unwrap();
    assert!(!rel.is_empty());
    assert!(rel.iter().all(|r| r["holds"] == true));
    assert_eq!(doc["payload"]["eq1_audit"].as_array().unwrap().len(), 16);
}

#[test]
fn classify_stable_region() {
    let doc = json(&["classify", "--u", "-1", "--eps", "0.1", "--q", "-1"]);
    assert_eq!(doc["payload"]["class"], "AsymptoticallyStable");
    assert_eq!(doc["config"]["u"], -1.0);
    assert_eq!(doc["timestamp"], "2023-11-14T22:13:20Z");
}

#[test]
fn every_payload_matches_its_schema() {
    let cases: Vec<(&str, Vec<&str>)> = vec![
        ("group-verify", vec!["group", "verify"]),
        (
            "network-simulate",
            vec!["network", "simulate", "--t-end", "1", "--samples", "5"],
        ),
        ("network-audit", vec!["network", "audit"]),
        (
            "hopf-classify",
            vec![
                "hopf", "classify", "--an", "1,0", "--b", "-1,0", "--c", "0.5,0",
            ],
        ),
        ("hopf-isotropy", vec!["hopf", "isotropy"]),
        ("torus-catalog", vec!["torus", "catalog"]),
        (
            "torus-field",
            vec![
                "torus", "field", "--theta", "1,2,3", "--u", "1", "--eps", "0.1", "--q", "0",
            ],
        ),
        (
            "reduced-eigs",
            vec!["reduced", "eigs", "--u", "1", "--eps", "0.1", "--q", "0"],
        ),
        (
            "reduced-connect",
            vec![
                "reduced", "connect", "--u", "1", "--eps", "0.1", "--q", "-0.15",
            ],
        ),
        (
            "classify",
            vec![
                "classify",
                "--u",
                "1",
                "--eps",
                "0.1",
                "--q",
                "-0.15",
                "--probe",
                "1e-3,100,3",
            ],
        ),
        (
            "classify",
            vec!["classify", "--u", "-1", "--eps", "0.1", "--q", "-0.5"],
        ),
        (
            "sweep",
            vec![
                "sweep",
                "--u-range",
                "-1:1:3",
                "--q-range",
                "-1:1:2",
                "--eps",
                "0.1",
            ],
        ),
        ("discrepancies", vec!["discrepancies"]),
    ];
    for (name, args) in cases {
        assert_valid(name, &json(&args));
    }
}

#[test]
fn unknown_flag_prints_usage() {
    let o = q8(&["classify", "--u", "1", "--eps", "0.1", "--q", "0", "--nope"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
}

#[test]
fn missing_subcommand_is_a_usage_error() {
    assert_eq!(q8(&[]).status.code(), Some(1));
    assert_eq!(q8(&["--help"]).status.code(), Some(0));
}

#[test]
fn empty_range_is_rejected() {
    let o = q8(&[
        "sweep",
        "--u-range",
        "0:1:0",
        "--q-range",
        "0:1:2",
        "--eps",
        "0.1",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn straddling_sweep() {
    let o = q8(&[
        "sweep",
        "--u-range",
        "-1:1:3",
        "--q-range",
        "-0.5:0.5:3",
        "--eps",
        "0.1",
        "--no-shoot",
        "--format",
        "csv",
    ]);
    assert!(o.status.success());
    let rows = csv_rows(&stdout(&o));
    assert_eq!(
        rows[0],
        [
            "u",
            "epsilon",
            "q",
            "class",
            "rho_km",
            "rho_paper_printed",
            "rho_paper_abs",
            "connected",
            "notes"
        ]
    );
    assert_eq!(rows.len(), 10);
    for r in &rows[1..] {
        if r[0].parse::<f64>().unwrap() > 0.0 {
            assert_eq!(r[3], "CompletelyUnstable");
        }
    }
}

#[test]
fn stable_region_sweep() {
    let out = scratch("stable.csv");
    let o = q8(&[
        "sweep",
        "--u-range",
        "-2:-1:3",
        "--q-range",
        "-3:-2:3",
        "--eps",
        "0.1",
        "--no-shoot",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let rows = csv_rows(&std::fs::read_to_string(&out).unwrap());
    assert_eq!(rows.len(), 10);
    assert!(rows[1..].iter().all(|r| r[3] == "AsymptoticallyStable"));
}

#[test]
fn identical_output_across_worker_counts() {
    let sweep = [
        "sweep",
        "--u-range",
        "-1:1:4",
        "--q-range",
        "-1:0.5:3",
        "--eps",
        "0.1",
        "--format",
        "json",
    ];
    let probe = [
        "classify",
        "--u",
        "1",
        "--eps",
        "0.1",
        "--q",
        "-0.15",
        "--probe",
        "1e-2,200,5",
        "--format",
        "json",
    ];
    for args in [&sweep[..], &probe[..]] {
        let one = q8_env(args, &[("Q8_THREADS", "1")]);
        let four = q8_env(args, &[("Q8_THREADS", "4")]);
        let again = q8_env(args, &[("Q8_THREADS", "4")]);
        assert!(one.status.success());
        assert_eq!(one.stdout, four.stdout);
        assert_eq!(four.stdout, again.stdout);
    }
}

#[test]
fn bad_thread_count() {
    let o = q8_env(&["group", "verify"], &[("Q8_THREADS", "zero")]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn config_file_with_flag_override() {
    let cfg = scratch("classify.json");
    std::fs::write(&cfg, r#"{"u": -1, "eps": 0.1, "q": -1, "format": "json"}"#).unwrap();
    let c = cfg.to_str().unwrap();
    let doc: Value = serde_json::from_slice(&q8(&["classify", "--config", c]).stdout).unwrap();
    assert_eq!(doc["payload"]["class"], "AsymptoticallyStable");
    let o = q8(&["--config", c, "classify", "--q", "-0.5", "--format", "text"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("class: EssentiallyAsymptoticallyStable"));
}

#[test]
fn config_rejects_unknown_keys() {
    let cfg = scratch("bad.json");
    std::fs::write(&cfg, r#"{"u": -1, "eps": 0.1, "q": -1, "seed": 3}"#).unwrap();
    let o = q8(&["classify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("seed"));
}

#[test]
fn finite_time_blow_up_exits_2() {
    let x0 = scratch("x0.json");
    std::fs::write(&x0, serde_json::to_string(&[5.0; 16]).unwrap()).unwrap();
    let o = q8(&[
        "network",
        "simulate",
        "--f",
        "identity",
        "--g",
        "mixed",
        "--h",
        "mixed",
        "--eps",
        "1",
        "--t-end",
        "100",
        "--x0",
        x0.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("underflow"));
}

#[test]
fn simulate_emits_trajectory_csv() {
    let o = q8(&[
        "network",
        "simulate",
        "--t-end",
        "2",
        "--samples",
        "3",
        "--x0",
        "random:4",
        "--format",
        "csv",
    ]);
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0].len(), 17);
    assert_eq!((rows[0][0].as_str(), rows[0][16].as_str()), ("t", "x16"));
    assert_eq!(rows[3][0], "2");
}

#[test]
fn field_forms_agree() {
    let base = [
        "torus",
        "field",
        "--theta",
        "0.3,-1.2,2.5",
        "--u",
        "0.7",
        "--eps",
        "0.2",
        "--q",
        "-0.4",
    ];
    let value = |form: &str| {
        let mut args = base.to_vec();
        args.extend(["--form", form]);
        json(&args)["payload"]["derivative"].clone()
    };
    let (a, b) = (value("eq11"), value("eq13"));
    for k in 0..3 {
        assert!((a[k].as_f64().unwrap() - b[k].as_f64().unwrap()).abs() < 1e-12);
    }
}

#[test]
fn connection_arcs_export() {
    let arcs = scratch("arcs.csv");
    let o = q8(&[
        "reduced",
        "connect",
        "--u",
        "1",
        "--eps",
        "0.1",
        "--q",
        "-0.15",
        "--arcs-out",
        arcs.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("all legs connected: true"));
    let text = std::fs::read_to_string(&arcs).unwrap();
    assert!(text.starts_with("leg,shot,t,theta1,theta2,theta3\n"));
}

#[test]
fn probe_without_cycle_is_reported() {
    let doc = json(&[
        "classify",
        "--u",
        "-1",
        "--eps",
        "0.1",
        "--q",
        "-1",
        "--probe",
        "1e-3,100,1",
    ]);
    assert_eq!(doc["payload"]["cycle_detected"], false);
    assert!(doc["payload"]["probe"]["error"]
        .as_str()
        .unwrap()
        .contains("no cycle"));
}

#[test]
fn discrepancy_report_is_stable() {
    let a = q8(&["discrepancies", "--format", "json"]);
    let b = q8(&["discrepancies", "--format", "json"]);
    assert_eq!(a.stdout, b.stdout);
    let doc: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert!(!doc["payload"]["entries"].as_array().unwrap().is_empty());
}
