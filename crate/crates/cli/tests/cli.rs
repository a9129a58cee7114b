use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use linpole_core::exactlin::LinearForm;
use linpole_core::germ::RationalGerm;
use linpole_core::polynomial::{Monomial, Polynomial};
use linpole_core::rational::int;
use linpole_core::{parse_germ, render_germ};
use proptest::prelude::*;
use serde_json::Value;

fn linpole(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_linpole")).args(args).output().expect("spawn linpole")
}

fn linpole_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_linpole"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn linpole");
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap().trim().to_string()
}

/// Runs with `--format json` and validates against the named schema.
fn json(schema: &str, args: &[&str]) -> Value {
    let mut full = vec!["--format", "json"];
    full.extend_from_slice(args);
    let v: Value = serde_json::from_str(&stdout(&linpole(&full))).unwrap();
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(format!("{schema}.json"));
    let s: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&s).unwrap();
    let errors: Vec<String> = validator.iter_errors(&v).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{schema}: {errors:?} in {v}");
    v
}

const DEP_EXAMPLE: &str = "1/(z1*(z1+z2)) + 1/(z2*(z1+z2)) - 2/(z1*(z1+2*z2)) - 1/(z2*(z1+2*z2)) + 1/z3";

#[test]
fn decompose_holomorphic_part() {
    let v = json("decomposition", &["decompose", "z2/(z1+z2)"]);
    assert_eq!(v["holomorphic"], "1/2");
    assert_eq!(v["terms"].as_array().unwrap().len(), 1);
    assert!(stdout(&linpole(&["decompose", "z2/(z1+z2)"])).ends_with("holomorphic: 1/2"));
    assert_eq!(json("holomorphic", &["pi-plus", "z2/(z1+z2)"])["holomorphic"], "1/2");
}

#[test]
fn iterated_evaluator_example() {
    let v = json("eval", &["eval", "--evaluator", "iter", "((z1-z2)/(z1+z2))^2"]);
    assert_eq!(v["value"], "1");
    assert_eq!(v["error_bound"], "0");
    assert_eq!(v["evaluator"], "iter");
    assert_eq!(stdout(&linpole(&["eval", "--evaluator", "iter", "((z1-z2)/(z1+z2))^2"])), "1");
    assert_eq!(json("eval", &["eval", "--evaluator", "ms", "((z1-z2)/(z1+z2))^2"])["value"], "0");
}

#[test]
fn dependence_example() {
    let v = json("dep", &["dep", DEP_EXAMPLE]);
    assert_eq!(v["basis"], serde_json::json!(["z3"]));
    assert_eq!(stdout(&linpole(&["dep", DEP_EXAMPLE])), "span[z3]");
}

#[test]
fn zeta_evaluator_reports_error_bound() {
    let v = json("eval", &["--precision", "20", "eval", "--evaluator", "zeta", "f[2;1]"]);
    let value: f64 = v["value"].as_str().unwrap().parse().unwrap();
    assert!((value - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-15);
    let bound: f64 = v["error_bound"].as_str().unwrap().parse().unwrap();
    assert!(bound > 0.0 && bound < 1e-20);
}

#[test]
fn exit_codes() {
    assert_eq!(linpole(&["decompose", "1/(1+z1)"]).status.code(), Some(2));
    assert_eq!(linpole(&["decompose", "1/(z1"]).status.code(), Some(2));
    assert_eq!(linpole(&["mul", "1/z1", "1/(z1+z2)"]).status.code(), Some(1));
    assert_eq!(linpole(&["eval", "--evaluator", "zeta", "f[1,1;1,1]"]).status.code(), Some(1));
    assert_eq!(linpole(&["--perm-cap", "1", "eval", "--evaluator", "iter", "1/(z1+z2)"]).status.code(), Some(1));
    assert_eq!(linpole(&["flatten", "/nonexistent/forest.json"]).status.code(), Some(1));
}

#[test]
fn stdin_input() {
    assert_eq!(stdout(&linpole_stdin(&["dep", "-"], DEP_EXAMPLE)), "span[z3]");
    let forest = r#"{"nodes": [{"set": [1, 2], "children": [{"set": [1]}]}]}"#;
    let v: Value = serde_json::from_str(&stdout(&linpole_stdin(&["--format", "json", "flatten", "-"], forest))).unwrap();
    assert_eq!(v["terms"][0]["coeff"], "1");
}

#[test]
fn germ_operations() {
    assert_eq!(json("orth", &["orth", "1/z1", "1/z2"])["orthogonal"], true);
    assert_eq!(json("orth", &["orth", "1/z1", "1/(z1+z2)"])["orthogonal"], false);
    let raw = json("germ", &["mul", "--locality", "raw", "1/z1", "1/(z1+z2)"]);
    assert_eq!(parse_germ(raw["germ"].as_str().unwrap()).unwrap(), parse_germ("1/(z1*(z1+z2))").unwrap());
    let p = json("decomposition", &["residue", "--kind", "p", "1/(z1^2*z2) + 1/z1"]);
    assert_eq!(p["terms"].as_array().unwrap().len(), 1);
    assert_eq!(p["terms"][0]["p_order"], 3);
    let d = json("decomposition", &["residue", "--kind", "d", "1/z1^3 + 1/(z1*z2)"]);
    assert_eq!(d["terms"][0]["supporting_space"].as_array().unwrap().len(), 2);
}

#[test]
fn word_operations() {
    let v = json("word_polynomial", &["shuffle", "x0x1", "x0x2"]);
    let terms: Vec<(String, String)> = v["terms"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| (t["word"].as_str().unwrap().to_string(), t["coeff"].as_str().unwrap().to_string()))
        .collect();
    assert_eq!(terms.len(), 4);
    assert!(terms.contains(&("x0x0x1x2".into(), "2".into())));
    assert!(terms.contains(&("x0x1x0x2".into(), "1".into())));
    let f = json("lyndon_factor", &["lyndon", "factor", "--local", "x2x0x1"]);
    assert_eq!(f["factors"], serde_json::json!(["x2", "x0x1"]));
    assert_eq!(json("lyndon_factor", &["lyndon", "factor", "x0x0"])["factors"], serde_json::json!(["x0", "x0"]));
    json("lyndon_rewrite", &["lyndon", "rewrite", "x1x0"]);
    let g = json("lyndon_generators", &["lyndon", "generators", "--letters", "1,2", "--max-len", "2"]);
    assert_eq!(g["generators"], serde_json::json!(["x1", "x2", "x0x1", "x0x2", "x1x2"]));
}

#[test]
fn fraction_operations() {
    let g = json("germ", &["phi", "x0x1x2"]);
    assert_eq!(parse_germ(g["germ"].as_str().unwrap()).unwrap(), parse_germ("1/(z2*(z1+z2)^2)").unwrap());
    assert_eq!(json("word", &["unphi", "f[1,2;2,1]"])["word"], "x0x1x2");
    let e = json("fraction_combo", &["expand", "f[1;1]", "f[1;2]"]);
    assert_eq!(e["terms"].as_array().unwrap().len(), 2);
    assert_eq!(linpole(&["unphi", "f[1,1;1,1]"]).status.code(), Some(1));
}

#[test]
fn galois_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("t.json");
    let combos = ["f[2;1]*f[2;2]", "f[1,2;1,2] - 3*f[1;1]"];
    let mut args = vec!["--precision", "20", "galois", "derive"];
    args.extend(combos);
    let v = json("transform", &args);
    std::fs::write(&t, v.to_string()).unwrap();
    let t = t.to_str().unwrap();

    let applied = json("combination", &["galois", "apply", "--transform", t, "f[1;1]"]);
    assert_eq!(applied["combination"], "(1)*f[1; 1]");
    let inv = json("transform", &["--precision", "20", "galois", "invert", t]);
    let inv_path = dir.path().join("inv.json");
    std::fs::write(&inv_path, inv.to_string()).unwrap();
    let id = json("transform", &["galois", "compose", t, inv_path.to_str().unwrap()]);
    for s in id["shifts"].as_array().unwrap() {
        let x: f64 = s["value"].as_str().unwrap().parse().unwrap();
        assert!(x.abs() < 1e-15, "{s}");
    }

    let mut args = vec!["--precision", "20", "galois", "check", "--transform", t];
    args.extend(combos);
    let report = json("factorization", &args);
    assert_eq!(report["passed"], 2);
    let mut args = vec!["galois", "check", "--evaluator", "ms"];
    args.extend(combos);
    assert_eq!(json("factorization", &args)["failed"], 0);
}

#[test]
fn gram_file_changes_orthogonality() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("gram.json");
    std::fs::write(&g, r#"{"gram": [["2", "1"], ["1", "1"]]}"#).unwrap();
    let g = g.to_str().unwrap();
    assert_eq!(json("orth", &["orth", "1/z1", "1/z2"])["orthogonal"], true);
    assert_eq!(json("orth", &["--gram", g, "orth", "1/z1", "1/z2"])["orthogonal"], false);
    assert_eq!(json("orth", &["--gram", g, "orth", "1/z1", "1/(z1-2*z2)"])["orthogonal"], true);
    std::fs::write(dir.path().join("bad.json"), r#"{"gram": [["1", "2"], ["2", "1"]]}"#).unwrap();
    let bad = dir.path().join("bad.json");
    assert_eq!(linpole(&["--gram", bad.to_str().unwrap(), "dep", "1/z1"]).status.code(), Some(1));
}

#[test]
fn text_and_json_agree() {
    for (germ, kind) in [("z2/(z1+z2)", "ms"), ("1/(z1*(z1+z2))", "iter"), ("(z1-z2)^2/(z1+z2)^2", "iter")] {
        let text = stdout(&linpole(&["eval", "--evaluator", kind, germ]));
        assert_eq!(json("eval", &["eval", "--evaluator", kind, germ])["value"], text);
    }
    let text = stdout(&linpole(&["pi-plus", "z1^2/(z1+z2) + 3"]));
    assert_eq!(json("holomorphic", &["pi-plus", "z1^2/(z1+z2) + 3"])["holomorphic"], text);
    let text = stdout(&linpole(&["unphi", "f[3;4]"]));
    assert_eq!(json("word", &["unphi", "f[3;4]"])["word"], text);
}

#[test]
fn input_schemas_accept_examples() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas");
    for (schema, doc) in [
        ("forest", r#"{"nodes": [{"set": [1, 2], "exp": 2, "children": [{"set": [1]}]}, {"set": [3]}]}"#),
        ("gram", r#"{"gram": [["2", "1/2"], ["1/2", "1"]]}"#),
    ] {
        let s: Value = serde_json::from_str(&std::fs::read_to_string(dir.join(format!("{schema}.json"))).unwrap()).unwrap();
        assert!(jsonschema::is_valid(&s, &serde_json::from_str(doc).unwrap()), "{schema}");
    }
}

fn arb_form() -> impl Strategy<Value = LinearForm> {
    prop::collection::vec(-3i64..=3, 3)
        .prop_filter("nonzero", |c| c.iter().any(|x| *x != 0))
        .prop_map(|c| LinearForm::from_terms(c.into_iter().enumerate().map(|(i, x)| (i as u32 + 1, int(x)))))
}

fn arb_germ() -> impl Strategy<Value = RationalGerm> {
    (
        prop::collection::vec((prop::collection::vec(0u32..=2, 3), -4i64..=4, 1i64..=3), 0..=3),
        prop::collection::vec((arb_form(), 1u32..=3), 0..=3),
    )
        .prop_map(|(terms, den)| {
            let num = Polynomial::from_terms(terms.into_iter().map(|(e, p, q)| {
                (Monomial::from_pairs(e.into_iter().enumerate().map(|(i, x)| (i as u32 + 1, x))), linpole_core::rational::rat(p, q))
            }));
            RationalGerm::new(num, den).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn parse_render_round_trip(g in arb_germ()) {
        prop_assert_eq!(parse_germ(&render_germ(&g)).unwrap(), g);
    }
}
