//! End-to-end tests of the `polytree` binary: every subcommand, the exit
//! code contract, determinism, and the learn → fit → re-learn round trip.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_polytree"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn assert_code(out: &Output, expected: i32) {
    assert_eq!(
        out.status.code(),
        Some(expected),
        "stdout:\n{}\nstderr:\n{}",
        stdout_of(out),
        stderr_of(out)
    );
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&read(path)).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Deterministic OR-gate collider: A and C independent coins, B = A OR C.
const OR_GATE: &str = r#"{
  "variables": [
    {"name": "A", "cardinality": 2},
    {"name": "B", "cardinality": 2},
    {"name": "C", "cardinality": 2}
  ],
  "parents": {"B": ["A", "C"]},
  "cpts": {
    "A": [0.5, 0.5],
    "B": [1.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0],
    "C": [0.5, 0.5]
  }
}"#;

/// Noisy chain A -> B -> C; no collider, so no edge is orientable.
const CHAIN: &str = r#"{
  "variables": [
    {"name": "A", "cardinality": 2},
    {"name": "B", "cardinality": 2},
    {"name": "C", "cardinality": 2}
  ],
  "parents": {"B": ["A"], "C": ["B"]},
  "cpts": {
    "A": [0.5, 0.5],
    "B": [0.9, 0.1, 0.2, 0.8],
    "C": [0.85, 0.15, 0.25, 0.75]
  }
}"#;

/// Deterministic copy chain X = Y = Z: every candidate pair weighs 1 bit.
const COPY3: &str = r#"{
  "variables": [
    {"name": "X", "cardinality": 2},
    {"name": "Y", "cardinality": 2},
    {"name": "Z", "cardinality": 2}
  ],
  "parents": {"Y": ["X"], "Z": ["Y"]},
  "cpts": {
    "X": [0.5, 0.5],
    "Y": [1.0, 0.0, 0.0, 1.0],
    "Z": [1.0, 0.0, 0.0, 1.0]
  }
}"#;

/// Explicit joint table of B = A XOR C with uniform parents.
const XOR_JPDF: &str = r#"{
  "variables": [
    {"name": "A", "cardinality": 2},
    {"name": "B", "cardinality": 2},
    {"name": "C", "cardinality": 2}
  ],
  "probs": [0.25, 0.0, 0.0, 0.25, 0.0, 0.25, 0.25, 0.0]
}"#;

const SINGLE: &str = r#"{
  "variables": [{"name": "S", "cardinality": 2}],
  "cpts": {"S": [0.5, 0.5]}
}"#;

#[test]
fn sample_is_deterministic_and_sized() {
    let dir = tempfile::tempdir().unwrap();
    let model = write(dir.path(), "or.json", OR_GATE);
    let d1 = dir.path().join("d1.csv");
    let d2 = dir.path().join("d2.csv");
    for out in [&d1, &d2] {
        let res = run(&[
            "sample", "--model", p(&model), "-n", "50", "--seed", "7", "-o", p(out),
        ]);
        assert_code(&res, 0);
    }
    let text = read(&d1);
    assert_eq!(text, read(&d2), "same seed, same bytes");
    assert_eq!(text.lines().count(), 51, "header plus 50 rows");
    assert_eq!(text.lines().next(), Some("A,B,C"));
}

#[test]
fn sample_rejects_zero_rows_as_usage() {
    let dir = tempfile::tempdir().unwrap();
    let model = write(dir.path(), "or.json", OR_GATE);
    let out = dir.path().join("d.csv");
    let res = run(&[
        "sample", "--model", p(&model), "-n", "0", "--seed", "1", "-o", p(&out),
    ]);
    assert_code(&res, 1);
    assert!(!out.exists());
}

#[test]
fn sample_names_the_variable_with_a_missing_cpt() {
    let dir = tempfile::tempdir().unwrap();
    let broken = write(
        dir.path(),
        "broken.json",
        r#"{
          "variables": [
            {"name": "A", "cardinality": 2},
            {"name": "B", "cardinality": 2}
          ],
          "parents": {"B": ["A"]},
          "cpts": {"A": [0.5, 0.5]}
        }"#,
    );
    let out = dir.path().join("d.csv");
    let res = run(&[
        "sample", "--model", p(&broken), "-n", "5", "-o", p(&out),
    ]);
    assert_code(&res, 1);
    assert!(stderr_of(&res).contains("\"B\""));
}

#[test]
fn learn_exact_collider_directs_both_edges_inward() {
    let dir = tempfile::tempdir().unwrap();
    let model = write(dir.path(), "or.json", OR_GATE);
    let result = dir.path().join("result.json");
    let dot = dir.path().join("result.dot");
    let res = run(&[
        "learn", "--model", p(&model), "--oracle", "exact", "--epsilon", "1e-9",
        "-o", p(&result), "--dot", p(&dot),
    ]);
    assert_code(&res, 0);

    let r = json(&result);
    assert_eq!(r["variables"], serde_json::json!(["A", "B", "C"]));
    assert_eq!(r["skeleton"], serde_json::json!([[0, 1], [1, 2]]));
    assert_eq!(r["edges"][0]["state"], "directed");
    assert_eq!(r["edges"][0]["from"], 0);
    assert_eq!(r["edges"][1]["state"], "directed");
    assert_eq!(r["edges"][1]["from"], 2);
    assert_eq!(r["basins"], serde_json::json!([[[0, 1], [2, 1]]]));
    assert_eq!(r["warnings"].as_array().unwrap().len(), 0);
    assert!(r.get("model").is_none(), "no --fit, no model");

    let dot_text = read(&dot);
    assert!(dot_text.contains("subgraph cluster_0"));
    assert!(dot_text.contains("\"A\" -> \"B\";"));
    assert!(dot_text.contains("\"C\" -> \"B\";"));
    assert!(!dot_text.contains("dashed"));
}

#[test]
fn learn_chain_reports_edges_needing_external_semantics() {
    let dir = tempfile::tempdir().unwrap();
    let model = write(dir.path(), "chain.json", CHAIN);
    let result = dir.path().join("result.json");
    let dot = dir.path().join("result.dot");
    let res = run(&[
        "learn", "--model", p(&model), "-o", p(&result), "--dot", p(&dot),
    ]);
    assert_code(&res, 0);

    let r = json(&result);
    for edge in r["edges"].as_array().unwrap() {
        assert_eq!(edge["state"], "undetermined");
    }
    assert_eq!(r["basins"].as_array().unwrap().len(), 0);
    let warnings = r["warnings"].as_array().unwrap();
    assert!(warnings.iter().any(|w| {
        let w = w.as_str().unwrap();
        w.contains("external semantics") && w.contains("A-B") && w.contains("B-C")
    }));

    let dot_text = read(&dot);
    assert!(!dot_text.contains("subgraph"));
    assert_eq!(dot_text.matches("[dir=none, style=dashed];").count(), 2);
}

#[test]
fn learn_tied_weights_name_all_candidate_edges() {
    let dir = tempfile::tempdir().unwrap();
    let model = write(dir.path(), "copy3.json", COPY3);
    let result = dir.path().join("result.json");
    let res = run(&["learn", "--model", p(&model), "-o", p(&result)]);
    assert_code(&res, 0);

    let r = json(&result);
    let warnings = r["warnings"].as_array().unwrap();
    assert!(warnings.iter().any(|w| {
        let w = w.as_str().unwrap();
        w.starts_with("weight tie")
            && w.contains("X-Y")
            && w.contains("X-Z")
            && w.contains("Y-Z")
    }));
}

#[test]
fn learn_requires_at_least_two_variables() {
    let dir = tempfile::tempdir().unwrap();
    let model = write(dir.path(), "single.json", SINGLE);
    let result = dir.path().join("result.json");
    let res = run(&["learn", "--model", p(&model), "-o", p(&result)]);
    assert_code(&res, 1);
    assert!(stderr_of(&res).contains("two variables"));
}

#[test]
fn learn_rejects_oracle_source_mismatches() {
    let dir = tempfile::tempdir().unwrap();
    let model = write(dir.path(), "or.json", OR_GATE);
    let data = dir.path().join("d.csv");
    assert_code(
        &run(&["sample", "--model", p(&model), "-n", "100", "-o", p(&data)]),
        0,
    );
    let result = dir.path().join("result.json");

    let res = run(&[
        "learn", "--data", p(&data), "--oracle", "exact", "-o", p(&result),
    ]);
    assert_code(&res, 2);

    let res = run(&[
        "learn", "--model", p(&model), "--oracle", "gtest", "-o", p(&result),
    ]);
    assert_code(&res, 2);

    // Parameters tied to a different oracle are usage errors.
    let res = run(&[
        "learn", "--model", p(&model), "--oracle", "exact", "--alpha", "0.05",
        "-o", p(&result),
    ]);
    assert_code(&res, 1);
}

#[test]
fn learn_from_samples_matches_the_generator() {
    let dir = tempfile::tempdir().unwrap();
    let model = write(dir.path(), "or.json", OR_GATE);
    let data = dir.path().join("d.csv");
    assert_code(
        &run(&[
            "sample", "--model", p(&model), "-n", "8000", "--seed", "11", "-o", p(&data),
        ]),
        0,
    );
    let r1 = dir.path().join("r1.json");
    let r2 = dir.path().join("r2.json");
    for out in [&r1, &r2] {
        let res = run(&[
            "learn", "--data", p(&data), "--oracle", "gtest", "--alpha", "0.01",
            "-o", p(out),
        ]);
        assert_code(&res, 0);
    }
    assert_eq!(read(&r1), read(&r2), "learning is deterministic");

    let r = json(&r1);
    assert_eq!(r["skeleton"], serde_json::json!([[0, 1], [1, 2]]));
    assert_eq!(r["edges"][0]["state"], "directed");
    assert_eq!(r["edges"][0]["from"], 0);
    assert_eq!(r["edges"][1]["state"], "directed");
    assert_eq!(r["edges"][1]["from"], 2);
}

#[test]
fn learn_fit_round_trips_in_exact_mode() {
    let dir = tempfile::tempdir().unwrap();
    let model = write(dir.path(), "chain.json", CHAIN);
    let fitted = dir.path().join("fitted.json");
    let r1 = dir.path().join("r1.json");
    let r2 = dir.path().join("r2.json");

    let res = run(&[
        "learn", "--model", p(&model), "--fit", "--model-out", p(&fitted), "-o", p(&r1),
    ]);
    assert_code(&res, 0);
    let res = run(&["learn", "--model", p(&fitted), "-o", p(&r2)]);
    assert_code(&res, 0);

    let (a, b) = (json(&r1), json(&r2));
    assert_eq!(a["skeleton"], b["skeleton"], "re-ingested fit reproduces the skeleton");
    assert_eq!(a["edges"], b["edges"], "re-ingested fit reproduces the directions");

    // The embedded model matches the standalone --model-out file.
    let embedded = serde_json::to_string(&a["model"]).unwrap();
    let standalone: serde_json::Value = serde_json::from_str(&read(&fitted)).unwrap();
    assert_eq!(
        serde_json::from_str::<serde_json::Value>(&embedded).unwrap(),
        standalone
    );
}

#[test]
fn learn_is_byte_identical_across_reruns() {
    let dir = tempfile::tempdir().unwrap();
    let model = write(dir.path(), "or.json", OR_GATE);
    let r1 = dir.path().join("r1.json");
    let r2 = dir.path().join("r2.json");
    for out in [&r1, &r2] {
        let res = run(&["learn", "--model", p(&model), "--fit", "-o", p(out)]);
        assert_code(&res, 0);
    }
    assert_eq!(read(&r1), read(&r2));
}

#[test]
fn learn_applies_orientation_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let model = write(dir.path(), "chain.json", CHAIN);
    let result = dir.path().join("result.json");

    // Default completion roots the chain at its lowest index: A -> B -> C.
    let res = run(&["learn", "--model", p(&model), "--fit", "-o", p(&result)]);
    assert_code(&res, 0);
    let r = json(&result);
    assert_eq!(r["model"]["parents"]["B"], serde_json::json!(["A"]));
    assert_eq!(r["model"]["parents"]["C"], serde_json::json!(["B"]));

    // Overriding B -> A turns the completion into a fork rooted at B.
    let res = run(&[
        "learn", "--model", p(&model), "--fit", "--orient", "B:A", "-o", p(&result),
    ]);
    assert_code(&res, 0);
    let r = json(&result);
    assert_eq!(r["model"]["parents"]["A"], serde_json::json!(["B"]));
    assert_eq!(r["model"]["parents"]["C"], serde_json::json!(["B"]));

    // Overriding an edge the skeleton does not contain is a data error.
    let res = run(&[
        "learn", "--model", p(&model), "--fit", "--orient", "A:C", "-o", p(&result),
    ]);
    assert_code(&res, 2);

    // Naming an unknown variable is a usage error.
    let res = run(&[
        "learn", "--model", p(&model), "--fit", "--orient", "Q:B", "-o", p(&result),
    ]);
    assert_code(&res, 1);
}

#[test]
fn fit_smoothing_applies_only_to_samples() {
    let dir = tempfile::tempdir().unwrap();
    let model = write(dir.path(), "or.json", OR_GATE);
    let result = dir.path().join("result.json");

    let res = run(&[
        "learn", "--model", p(&model), "--fit", "--smoothing", "0.5", "-o", p(&result),
    ]);
    assert_code(&res, 2);

    let data = dir.path().join("d.csv");
    assert_code(
        &run(&[
            "sample", "--model", p(&model), "-n", "500", "--seed", "2", "-o", p(&data),
        ]),
        0,
    );
    let res = run(&[
        "learn", "--data", p(&data), "--fit", "--smoothing", "0.5", "-o", p(&result),
    ]);
    assert_code(&res, 0);
    assert!(json(&result).get("model").is_some());
}

#[test]
fn mi_prints_six_decimal_bits() {
    let dir = tempfile::tempdir().unwrap();
    let copy = write(dir.path(), "copy3.json", COPY3);
    let or_gate = write(dir.path(), "or.json", OR_GATE);
    let xor = write(dir.path(), "xor.json", XOR_JPDF);

    let res = run(&["mi", "--model", p(&copy), "X", "Y"]);
    assert_code(&res, 0);
    assert_eq!(stdout_of(&res), "1.000000\n");

    let res = run(&["mi", "--model", p(&or_gate), "A", "C"]);
    assert_code(&res, 0);
    assert_eq!(stdout_of(&res), "0.000000\n");

    let res = run(&["mi", "--jpdf", p(&xor), "A", "C", "--given", "B"]);
    assert_code(&res, 0);
    assert_eq!(stdout_of(&res), "1.000000\n");

    let res = run(&["mi", "--model", p(&or_gate), "A", "Q"]);
    assert_code(&res, 1);
    assert!(stderr_of(&res).contains("unknown variable"));
}

#[test]
fn mi_reads_sampled_data() {
    let dir = tempfile::tempdir().unwrap();
    // Balanced deterministic copies: the empirical estimate is exactly 1 bit.
    let data = write(
        dir.path(),
        "d.csv",
        "X,Y,Z\n0,0,0\n1,1,1\n0,0,0\n1,1,1\n",
    );
    let res = run(&["mi", "--data", p(&data), "X", "Z"]);
    assert_code(&res, 0);
    assert_eq!(stdout_of(&res), "1.000000\n");

    let res = run(&["mi", "--data", p(&data), "X", "Z", "--given", "Y"]);
    assert_code(&res, 0);
    assert_eq!(stdout_of(&res), "0.000000\n");
}

#[test]
fn eval_scores_a_perfect_exact_run() {
    let dir = tempfile::tempdir().unwrap();
    let model = write(dir.path(), "or.json", OR_GATE);
    let result = dir.path().join("result.json");
    let report = dir.path().join("report.json");
    assert_code(&run(&["learn", "--model", p(&model), "-o", p(&result)]), 0);
    let res = run(&[
        "eval", "--result", p(&result), "--truth", p(&model), "-o", p(&report),
    ]);
    assert_code(&res, 0);

    let rep = json(&report);
    assert_eq!(rep["skeleton_f1"], 1.0);
    assert_eq!(rep["directed_accuracy"], 1.0);
    assert_eq!(rep["undetermined_set_exact"], true);
    assert_eq!(rep["truth_basin_edge_count"], 2);
}

#[test]
fn eval_rejects_renamed_truth_variables() {
    let dir = tempfile::tempdir().unwrap();
    let model = write(dir.path(), "or.json", OR_GATE);
    let renamed = write(dir.path(), "renamed.json", &OR_GATE.replace("\"A\"", "\"Q\""));
    let result = dir.path().join("result.json");
    assert_code(&run(&["learn", "--model", p(&model), "-o", p(&result)]), 0);
    let res = run(&["eval", "--result", p(&result), "--truth", p(&renamed)]);
    assert_code(&res, 2);
    assert!(stderr_of(&res).contains("variable sets differ"));
}

#[test]
fn eval_survives_ten_samples() {
    let dir = tempfile::tempdir().unwrap();
    let model = write(dir.path(), "or.json", OR_GATE);
    let data = dir.path().join("d.csv");
    let result = dir.path().join("result.json");
    assert_code(
        &run(&[
            "sample", "--model", p(&model), "-n", "10", "--seed", "3", "-o", p(&data),
        ]),
        0,
    );
    assert_code(&run(&["learn", "--data", p(&data), "-o", p(&result)]), 0);
    let res = run(&["eval", "--result", p(&result), "--truth", p(&model)]);
    assert_code(&res, 0);

    let rep: serde_json::Value = serde_json::from_str(&stdout_of(&res)).unwrap();
    for key in [
        "skeleton_precision",
        "skeleton_recall",
        "skeleton_f1",
        "directed_accuracy",
    ] {
        let rate = rep[key].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&rate), "{key} = {rate}");
    }
}

#[test]
fn dot_renders_a_single_node_result() {
    let dir = tempfile::tempdir().unwrap();
    let result = write(
        dir.path(),
        "solo.json",
        r#"{
          "variables": ["solo"],
          "weights": [],
          "skeleton": [],
          "edges": [],
          "basins": [],
          "warnings": []
        }"#,
    );
    let res = run(&["dot", "--result", p(&result)]);
    assert_code(&res, 0);
    let text = stdout_of(&res);
    assert!(text.starts_with("digraph polytree {"));
    assert!(text.contains("\"solo\";"));
    assert_eq!(text.matches('{').count(), text.matches('}').count());
}

#[test]
fn dot_rejects_malformed_results() {
    let dir = tempfile::tempdir().unwrap();
    let truncated = write(dir.path(), "bad.json", "{ \"variables\": [\"A\"]");
    let res = run(&["dot", "--result", p(&truncated)]);
    assert_code(&res, 1);

    let out_of_range = write(
        dir.path(),
        "range.json",
        r#"{
          "variables": ["A", "B"],
          "weights": [],
          "skeleton": [[0, 5]],
          "edges": [{"u": 0, "v": 5, "state": "undetermined"}],
          "basins": [],
          "warnings": []
        }"#,
    );
    let res = run(&["dot", "--result", p(&out_of_range)]);
    assert_code(&res, 1);
    assert!(stderr_of(&res).contains("result JSON"));
}

#[test]
fn usage_mistakes_exit_one_and_help_exits_zero() {
    let res = run(&["frobnicate"]);
    assert_code(&res, 1);

    let res = run(&[]);
    assert_code(&res, 1);

    let res = run(&["--help"]);
    assert_code(&res, 0);
    assert!(stdout_of(&res).contains("Usage"));

    let res = run(&["learn", "-o", "r.json"]);
    assert_code(&res, 1);

    let dir = tempfile::tempdir().unwrap();
    let model = write(dir.path(), "or.json", OR_GATE);
    let data = write(dir.path(), "d.csv", "A,B\n0,1\n");
    let res = run(&[
        "learn", "--model", p(&model), "--data", p(&data), "-o", "r.json",
    ]);
    assert_code(&res, 1);
}
