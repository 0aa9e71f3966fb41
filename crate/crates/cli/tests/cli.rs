//! End-to-end tests of the `iwasawa` binary: examples, exit codes, input
//! formats, atomic output, schema conformance, and determinism.

use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn repo() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn fixture(name: &str) -> String {
    repo().join("fixtures").join(name).to_string_lossy().into_owned()
}

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

impl Run {
    fn json(&self) -> Value {
        serde_json::from_str(&self.stdout).unwrap_or_else(|e| panic!("bad JSON ({e}): {}", self.stdout))
    }
}

fn run_env(args: &[&str], env: &[(&str, &Path)]) -> Run {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_iwasawa"));
    cmd.args(args).env_remove("IWASAWA_CONFIG");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("binary runs");
    Run {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn run(args: &[&str]) -> Run {
    run_env(args, &[])
}

fn report_schema() -> jsonschema::JSONSchema {
    let text = std::fs::read_to_string(repo().join("schema/report.schema.json")).unwrap();
    let schema: Value = serde_json::from_str(&text).unwrap();
    jsonschema::JSONSchema::compile(&schema).expect("schema compiles")
}

fn assert_valid(schema: &jsonschema::JSONSchema, v: &Value, what: &str) {
    if let Err(errors) = schema.validate(v) {
        let msgs: Vec<String> = errors.map(|e| format!("{e} at {}", e.instance_path)).collect();
        panic!("{what} does not match the report schema: {msgs:?}");
    }
}

#[test]
fn predict_split_cyclotomic_trivial_ideal() {
    let r = run(&["predict", "--setting", "cm_split_cyc", "--ranks", "1,5", "--p", "5", "--rank-kind", "Z"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = r.json();
    assert_eq!(v["growth"], serde_json::json!([1, 1]));
    assert_eq!(v["char_ideal"], "1");
    assert_eq!(v["status"], "proven-shape");
}

#[test]
fn predict_bdp_example() {
    let r = run(&["predict", "--setting", "heegner_bdp", "--ranks", "3,7", "--p", "5"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = r.json();
    assert_eq!(v["growth"], serde_json::json!([3, 1]));
    assert_eq!(v["char_ideal"], "Φ_0^2");
    assert_eq!(v["object"], "X_f^BDP(E/F^ac)");
}

#[test]
fn predict_rejects_indivisible_jumps() {
    let r = run(&["predict", "--setting", "cm_split_cyc", "--ranks", "0,3", "--p", "5"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("level 1: jump 3 not divisible by 4"), "{}", r.stderr);
}

#[test]
fn predict_bdp_hypothesis_failure_exits_3() {
    let r = run(&["predict", "--setting", "heegner_bdp", "--ranks", "1,1", "--p", "5"]);
    assert_eq!(r.code, 3, "{}", r.stderr);
}

#[test]
fn predict_from_json_input_and_text_format() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.json");
    std::fs::write(
        &input,
        r#"{"p": 5, "setting": "cm_split_anticyc", "root_number": "-1", "rank_kind": "Z", "ranks": [3, 3]}"#,
    )
    .unwrap();
    let r = run(&["predict", "--input", input.to_str().unwrap(), "--format", "text"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.contains("Φ_0^4"), "{}", r.stdout);
}

#[test]
fn predict_question_report() {
    let r = run(&["predict", "--setting", "heegner_fine", "--ranks", "3", "--p", "5", "--question"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = r.json();
    assert_eq!(v["question"], 6);
    assert_eq!(v["CONJECTURAL"]["char_ideal"], "Φ_0^{1..2}");
}

#[test]
fn predict_reads_csv_tables() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("ranks.csv");
    std::fs::write(&csv, "level,rank\n0,2\n1,6\n2,26\n").unwrap();
    let r = run(&["predict", "--setting", "cm_split_anticyc_root_plus", "--csv", csv.to_str().unwrap(), "--p", "5"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.json()["growth"], serde_json::json!([2, 1, 1]));

    std::fs::write(&csv, "lvl,rank\n0,2\n").unwrap();
    assert_eq!(run(&["predict", "--setting", "cm_split_cyc", "--csv", csv.to_str().unwrap()]).code, 2);
}

#[test]
fn classify_fixtures() {
    let r = run(&["classify", "--file", &fixture("phi1.json")]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.json()["type"]["cyclo_multiplicities"], serde_json::json!({"1": 1}));

    let r = run(&["classify", "--file", &fixture("warning1.json")]);
    let v = r.json();
    assert_eq!(v["type"]["residual_lambda"], 1);
    assert_eq!(v["type"]["g_functor_vanishes"], "no");

    let r = run(&["classify", "--file", &fixture("free2.json")]);
    assert_eq!(r.json()["type"]["free_rank"], 2);

    let r = run(&["classify", "--file", &fixture("op_phi1.json"), "--n-max", "2"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.json()["type"]["cyclo_multiplicities"], serde_json::json!({"1": 1}));
}

#[test]
fn classify_with_the_expanded_engine() {
    let r = run(&["classify", "--file", &fixture("phi1_plus_mu.json"), "--engine", "expanded", "--n-max", "2"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = r.json();
    assert_eq!(v["type"]["mu"], 1);
    assert_eq!(v["type"]["cyclo_multiplicities"], serde_json::json!({"1": 1}));
}

#[test]
fn verify_checks() {
    let r = run(&["verify", "--file", &fixture("warning1.json")]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = r.json();
    assert_eq!(v["verdict"], "undetermined");
    assert!(v["skipped"].is_string());

    let r = run(&["verify", "--file", &fixture("phi1_twice.json"), "--check", "tech"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.json()["verdict"], "pass");

    let r = run(&["verify", "--file", &fixture("free_plus_phi1.json"), "--check", "prop-g0"]);
    assert_eq!(r.json()["verdict"], "pass");

    let r = run(&["verify", "--file", &fixture("mu2.json"), "--check", "prop-g0"]);
    assert_eq!(r.json()["verdict"], "undetermined");

    let r = run(&["verify", "--file", &fixture("phi1.json"), "--check", "generator-change", "--unit", "6"]);
    assert_eq!(r.json()["verdict"], "pass");
}

#[test]
fn oracle_with_zero_instances() {
    let r = run(&["oracle", "--p", "5", "--instances", "0", "--n-max", "3", "--seed", "42"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = r.json();
    assert_eq!(v["passed"], 0);
    assert_eq!(v["outcomes"], serde_json::json!([]));
}

#[test]
fn exit_codes_are_reachable() {
    // 1: a diagnostic that finds a failure.
    assert_eq!(run(&["parity", "--f", "1,1,1,1"]).code, 1);
    // 2: unreadable or inconsistent input.
    assert_eq!(run(&["classify", "--file", &fixture("malformed.json")]).code, 2);
    assert_eq!(run(&["classify", "--file", &fixture("wrong_shape.json")]).code, 2);
    assert_eq!(run(&["classify", "--file", "/nonexistent/x.json"]).code, 2);
    assert_eq!(run(&["predict", "--setting", "nope", "--ranks", "1"]).code, 2);
    assert_eq!(run(&["bogus-command"]).code, 2);
    // 3: hypothesis failures.
    assert_eq!(run(&["verify", "--file", &fixture("free_plus_phi1.json"), "--check", "tech"]).code, 3);
    assert_eq!(run(&["bdp-bound", "--e", "0"]).code, 3);
    // 4: level budget exceeded.
    let r = run(&["classify", "--file", &fixture("phi1.json"), "--n-max", "9"]);
    assert_eq!(r.code, 4, "{}", r.stderr);
}

#[test]
fn config_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("session.toml");
    std::fs::write(&cfg, "degree_budget = 100\nn_max = 3\n").unwrap();
    let r = run_env(&["classify", "--file", &fixture("phi1.json")], &[("IWASAWA_CONFIG", &cfg)]);
    assert_eq!(r.code, 4, "{}", r.stderr);

    std::fs::write(&cfg, "format = \"text\"\np = 7\n").unwrap();
    let r = run_env(&["local-mw", "--g", "1", "--d", "1", "--n", "1"], &[("IWASAWA_CONFIG", &cfg)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.contains("total rank 7"), "{}", r.stdout);

    std::fs::write(&cfg, "unknown_key = 1\n").unwrap();
    assert_eq!(run_env(&["bdp-bound", "--e", "1"], &[("IWASAWA_CONFIG", &cfg)]).code, 2);
    std::fs::write(&cfg, "p = 3\n").unwrap();
    assert_eq!(run_env(&["local-mw", "--g", "1", "--d", "1", "--n", "1"], &[("IWASAWA_CONFIG", &cfg)]).code, 2);
}

#[test]
fn out_writes_the_report_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("nested-report.json");
    let r = run(&["bdp-bound", "--e", "1,2,3,4", "--out", out.to_str().unwrap()]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["bounds"][3]["bound"], "3/2");
    // No temporary files are left next to the report.
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn reports_match_the_published_schema() {
    let schema = report_schema();
    let invocations: Vec<Vec<String>> = [
        vec!["predict", "--setting", "heegner_fine", "--ranks", "3,7,47", "--p", "5"],
        vec!["predict", "--setting", "cm_inert_cyc", "--ranks", "2,6", "--p", "5", "--question"],
        vec!["mw-tate", "--ranks", "2,6,26", "--p", "5"],
        vec!["local-mw", "--g", "1", "--d", "1", "--n", "3"],
        vec!["bdp-bound", "--e", "1,2,3,4"],
        vec!["parity", "--f", "2,0,1,0,1"],
        vec!["oracle", "--p", "7", "--instances", "3", "--seed", "5"],
    ]
    .into_iter()
    .map(|v| v.into_iter().map(String::from).collect())
    .chain(
        [
            ("classify", "warning1.json", None),
            ("verify", "phi1_twice.json", Some("tech")),
            ("verify", "free_plus_phi1.json", Some("prop-g0")),
            ("verify", "warning1.json", Some("tech")),
            ("verify", "phi1.json", Some("generator-change")),
        ]
        .into_iter()
        .map(|(cmd, f, check)| {
            let mut v = vec![cmd.to_string(), "--file".into(), fixture(f)];
            if let Some(c) = check {
                v.extend(["--check".to_string(), c.to_string()]);
            }
            v
        }),
    )
    .collect();
    for args in invocations {
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        let r = run(&refs);
        assert!(r.code == 0 || r.code == 1, "{args:?}: {}", r.stderr);
        assert_valid(&schema, &r.json(), &args.join(" "));
    }
}

#[test]
fn input_files_match_their_schemas() {
    let compile = |name: &str| {
        let v: Value = serde_json::from_str(&std::fs::read_to_string(repo().join("schema").join(name)).unwrap()).unwrap();
        jsonschema::JSONSchema::compile(&v).unwrap()
    };
    let presentation = compile("presentation.schema.json");
    for f in ["phi1.json", "warning1.json", "op_phi1.json", "free2.json", "omega1.json"] {
        let v: Value = serde_json::from_str(&std::fs::read_to_string(fixture(f)).unwrap()).unwrap();
        assert!(presentation.is_valid(&v), "{f}");
    }
    let predict = compile("predict_input.schema.json");
    let golden: Value =
        serde_json::from_str(&std::fs::read_to_string(fixture("predict_golden.json")).unwrap()).unwrap();
    for case in golden["cases"].as_array().unwrap() {
        assert!(predict.is_valid(&case["input"]), "{}", case["name"]);
    }
}

#[test]
fn identical_runs_are_byte_identical() {
    let args = ["oracle", "--p", "5", "--instances", "6", "--n-max", "3", "--seed", "1234"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.code, 0, "{}", a.stderr);
    assert_eq!(a.stdout, b.stdout);
    let v = ["verify", "--file", &fixture("phi1_plus_mu.json"), "--check", "prop-g0"];
    assert_eq!(run(&v).stdout, run(&v).stdout);
}
