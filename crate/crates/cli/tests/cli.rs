use std::process::Command;

use multizeta::mzv::{zeta, Composition};
use multizeta::{make_field_context, TildeSeries};

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("mzv").chain(args.iter().copied());
    let code = mzv_cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn zeta_json_matches_library() {
    let (code, out, _) = run(&["zeta", "--p", "3", "--m", "1", "--s", "2,2", "--prec", "200", "--json"]);
    assert_eq!(code, 0);
    let x = TildeSeries::from_json_str(&out).unwrap();
    let f = make_field_context(3, 1).unwrap();
    let direct = zeta(&f, &Composition::new(vec![2, 2]).unwrap(), 200).unwrap();
    assert!(x.agrees_with(&direct));
    assert_eq!(x.precision(), 200);
}

#[test]
fn output_is_byte_identical() {
    let args = ["zeta", "--p", "2", "--m", "2", "--s", "1,2", "--prec", "80", "--json"];
    assert_eq!(run(&args), run(&args));
}

#[test]
fn salvage_exit_zero() {
    let (code, out, _) = run(&["verify", "--id", "salvage", "--p", "3", "--m", "1", "--prec", "150"]);
    assert_eq!(code, 0, "{out}");
}

#[test]
fn failing_identity_exits_one_with_certificate() {
    let (code, out, _) = run(&["verify", "--id", "naive-sum-shuffle", "--p", "3", "--prec", "100"]);
    assert_eq!(code, 1);
    assert!(out.contains("u^12"), "{out}");
}

#[test]
fn side_condition_and_usage_exit_two() {
    let (code, _, err) = run(&["verify", "--id", "digit-cube", "--p", "2", "--m", "4", "--b", "6"]);
    assert_eq!(code, 2);
    assert!(err.contains("side condition"));
    let (code, _, _) = run(&["zeta", "--p", "4", "--s", "1"]);
    assert_eq!(code, 2);
    let (code, _, _) = run(&["no-such-command"]);
    assert_eq!(code, 2);
}

#[test]
fn insufficient_precision_exits_three() {
    let (code, _, err) = run(&["find-relations", "--p", "3", "--weight", "4", "--prec", "10"]);
    assert_eq!(code, 3, "{err}");
}

#[test]
fn power_sum_brute_is_one_over_t2_plus_t() {
    let (code, out, _) = run(&["power-sum", "--p", "2", "--m", "1", "--d", "1", "--s", "1", "--method", "brute", "--prec", "30", "--json"]);
    assert_eq!(code, 0);
    let x = TildeSeries::from_json_str(&out).unwrap();
    // 1/(t² + t) = u² + u³ + u⁴ + … in characteristic 2
    let exps: Vec<i64> = x.terms().map(|(e, _)| e).collect();
    assert_eq!(exps, (2..30).collect::<Vec<_>>());
}

#[test]
fn method_cross_check() {
    let (code, _, _) = run(&["power-sum", "--p", "3", "--d", "2", "--s", "4", "--method", "brute,interp", "--prec", "120"]);
    assert_eq!(code, 0);
    let (code, _, _) = run(&["power-sum", "--p", "3", "--d", "2", "--s", "2", "--method", "brute,delayed", "--w", "1", "--prec", "120"]);
    assert_eq!(code, 0);
    let (code, _, _) = run(&["zeta", "--p", "2", "--s", "3,1", "--method", "brute,interp", "--prec", "60"]);
    assert_eq!(code, 0);
}

#[test]
fn fixture_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("z.json");
    let p = path.to_str().unwrap();
    let args = ["zeta", "--p", "3", "--s", "1,2", "--prec", "90", "--fixture", p];
    let (code, out, _) = run(&args);
    assert_eq!(code, 0);
    assert!(out.contains("written"));
    let (code, out, _) = run(&args);
    assert_eq!(code, 0);
    assert!(out.contains("matches"));
    let other = ["zeta", "--p", "3", "--s", "2,1", "--prec", "90", "--fixture", p];
    let (code, out, _) = run(&other);
    assert_eq!(code, 1);
    assert!(out.contains("differs"));
}

#[test]
fn reconstruct_from_fixture_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.json");
    let f = make_field_context(5, 1).unwrap();
    let r = multizeta::RatFunc::new(
        multizeta::PolyT::one(&f),
        multizeta::PolyT::new(&f, vec![multizeta::Fq(1), multizeta::Fq(0), multizeta::Fq(2)]),
    )
    .unwrap();
    let x = TildeSeries::embed_rational(&r, 200).unwrap();
    std::fs::write(&path, serde_json::to_string(&x.to_json()).unwrap()).unwrap();
    let (code, out, _) = run(&["reconstruct", "--p", "5", "--fixture", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(out.trim(), r.to_string());
    let (code, out, _) = run(&["reconstruct", "--p", "3", "--s", "2,2", "--prec", "200"]);
    assert_eq!(code, 1);
    assert_eq!(out.trim(), "not found");
}

#[test]
fn period_matrix_json_has_z_expressions() {
    let (code, out, _) = run(&["period-matrix", "--p", "2", "--s", "1,1,2", "--prec", "40", "--json"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["pPrimeExpressions"][3][0], "Z1*Z23 + Z12*Z3 - Z123 - Z1*Z2*Z3");
    assert_eq!(v["psiPrime"].as_array().unwrap().len(), 4);
    let entry = v["normalizedEntries"]
        .as_array()
        .unwrap()
        .iter()
        .find(|e| e["row"] == 3 && e["col"] == 1)
        .unwrap();
    assert_eq!(entry["zExpression"], "Z1*Z2 - Z12");
    assert_eq!(v["checks"]["psiMatchesZ"], true);
}

#[test]
fn find_relations_json_shape() {
    let (code, out, _) = run(&["find-relations", "--p", "2", "--weight", "2", "--max-depth", "2", "--prec", "60", "--json"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["weight"], 2);
    assert_eq!(v["verifiedAtPrecision"], 120);
    assert!(!v["relations"].as_array().unwrap().is_empty());
}

#[test]
fn grid_verification_is_deterministic_across_jobs() {
    let a = run(&["verify", "--id", "sum-shuffle", "--p", "3", "--prec", "50", "--max-part", "2", "--jobs", "1"]);
    let b = run(&["verify", "--id", "sum-shuffle", "--p", "3", "--prec", "50", "--max-part", "2", "--jobs", "3"]);
    assert_eq!(a, b);
    assert_eq!(a.0, 0);
}

#[test]
fn binary_runs() {
    let out = Command::new(env!("CARGO_BIN_EXE_mzv"))
        .args(["hpoly", "--p", "2", "--s", "1"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "H_1 = 1");
    let out = Command::new(env!("CARGO_BIN_EXE_mzv"))
        .args(["verify", "--id", "digit-cube", "--p", "2", "--m", "3", "--b", "1", "--prec", "100"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}
