use std::path::PathBuf;

use hardy_shift::cli::{self, format};
use hardy_shift::constructions::counterexample_space;
use hardy_shift::CoeffFn;
use serde_json::{json, Value};
use tempfile::TempDir;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("hardy-shift").chain(args.iter().copied());
    let code = cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write(dir: &TempDir, name: &str, v: &Value) -> String {
    let p: PathBuf = dir.path().join(name);
    std::fs::write(&p, serde_json::to_string(v).unwrap()).unwrap();
    p.display().to_string()
}

#[test]
fn scenario_all_json_has_twelve_passing_reports() {
    let (code, out, err) = run(&["--no-timing", "scenario", "all", "--json"]);
    assert_eq!(code, 0, "{err}");
    let reports: Vec<Value> = serde_json::from_str(&out).unwrap();
    assert_eq!(reports.len(), 12);
    for r in &reports {
        assert_eq!(r["passed"], json!(true), "{r}");
        for key in ["scenario_id", "metrics", "parameters", "runtime_ms"] {
            assert!(r.get(key).is_some());
        }
    }
}

#[test]
fn reports_are_byte_identical_across_runs() {
    for id in ["duality", "section4", "wandering_bound"] {
        let a = run(&["--no-timing", "--seed", "7", "scenario", id, "--json"]);
        let b = run(&["--no-timing", "--seed", "7", "scenario", id, "--json"]);
        assert_eq!(a, b);
        assert_eq!(a.0, 0);
    }
}

#[test]
fn decompose_counterexample_reports_not_nearly_invariant() {
    let dir = TempDir::new().unwrap();
    let space = write(&dir, "space.json", &format::space_to_value(&counterexample_space(2, 8).unwrap()));
    let defect = write(&dir, "defect.json", &json!({"m": 2, "ambient_deg": 8, "functions": []}));
    let f = write(&dir, "f.json", &format::function_to_value(&CoeffFn::monomial(2, 2, 0)));
    let (code, _, err) = run(&["decompose", "--space", &space, "--defect", &defect, "--function", &f]);
    assert_eq!(code, 1);
    assert!(err.contains("NOT-NEARLY-INVARIANT"), "{err}");
}

#[test]
fn decompose_and_certify_hand_example() {
    let dir = TempDir::new().unwrap();
    let s = 0.5f64.sqrt();
    let space = write(
        &dir,
        "space.json",
        &json!({"m": 1, "ambient_deg": 3, "functions": [{"m": 1, "coeffs": [[[s, 0]], [[s, 0]]]}]}),
    );
    let defect = write(&dir, "defect.json", &json!({"m": 1, "ambient_deg": 3, "functions": []}));
    let f = write(&dir, "f.json", &json!({"m": 1, "coeffs": [[[1, 0]], [[1, 0]]]}));
    let (code, out, err) = run(&["decompose", "--space", &space, "--defect", &defect, "--function", &f]);
    assert_eq!(code, 0, "{err}");
    let res: Value = serde_json::from_str(&out).unwrap();
    assert!(res["norm_gap"].as_f64().unwrap() < 1e-12);
    assert_eq!(res["converged"], json!(true));

    let (code, out, _) = run(&["certify", "--space", &space, "--p", "0"]);
    assert_eq!(code, 0);
    let cert: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(cert["defect_dim"], json!(0));
    // S moves (1+z)/√2 out of span{(1+z)/√2}.
    let (code, out, _) = run(&["certify", "--space", &space, "--op", "S", "--p", "0"]);
    assert_eq!(code, 1);
    let cert: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(cert["defect_dim"], json!(1));
}

#[test]
fn model_space_prints_monomial_basis() {
    let dir = TempDir::new().unwrap();
    let theta = write(
        &dir,
        "theta.json",
        &json!({"kind": "diag", "deg": 3, "entries": [{"kind": "monomial", "k": 2}, {"kind": "monomial", "k": 3}]}),
    );
    let (code, out, err) = run(&["model-space", "--theta", &theta, "--order", "6"]);
    assert_eq!(code, 0, "{err}");
    let doc: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(doc["functions"].as_array().unwrap().len(), 5);
    let k = format::parse_space_spec(&out, 1e-10).unwrap();
    assert_eq!(k.dim(), 5);
}

#[test]
fn usage_and_parse_errors_exit_2() {
    assert_eq!(run(&["scenario", "nope"]).0, 2);
    assert_eq!(run(&["frobnicate"]).0, 2);
    assert_eq!(run(&["scenario", "beurling", "--param", "bogus=1"]).0, 2);
    assert_eq!(run(&["certify", "--space", "/definitely/missing.json"]).0, 2);
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"m\": 1,\n \"ambient_deg\": }").unwrap();
    let (code, _, err) = run(&["certify", "--space", bad.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn markdown_mode_renders_table() {
    let (code, out, _) = run(&["--no-timing", "scenario", "counterexample", "--markdown"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("| scenario | claim |"));
    assert!(out.contains("| counterexample |"));
}

#[test]
fn invalid_scenario_parameters_exit_2() {
    // Wandering rank is 2 but only one exponent is given.
    assert_eq!(run(&["scenario", "prop_F0K_almost", "--param", "theta=2"]).0, 2);
    // Counterexample with N = 1 cannot be built.
    assert_eq!(run(&["scenario", "counterexample", "--param", "N=1"]).0, 2);
}
