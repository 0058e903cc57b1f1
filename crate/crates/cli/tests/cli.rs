use std::process::{Command, Output};

use proptest::prelude::*;
use qplane::emit::{relations_from_json, relations_json};
use qplane::scalar::ParameterContext;

fn qplane(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qplane")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn identity_suite_passes() {
    let o = qplane(&["verify", "--suite", "appendixB", "--n", "4"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["schema"], "qplane/1");
    assert_eq!(v["passed"], true);
}

#[test]
fn check_rmatrix_with_numeric_points() {
    let o = qplane(&["check-rmatrix", "--n", "3", "--numeric-points", "2", "--emit", "text"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("point 2 agrees with the symbolic verdict"));
}

#[test]
fn c_override_is_a_negative_control() {
    let o = qplane(&["verify", "--suite", "confluence", "--table", "T2", "--n", "4", "--c-override", "1"]);
    assert_eq!(code(&o), 1);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["passed"], false);
}

#[test]
fn t3_confluence_passes() {
    let o = qplane(&["verify", "--suite", "confluence", "--table", "T3", "--n", "4"]);
    assert_eq!(code(&o), 0);
}

#[test]
fn derivative_through_coordinate() {
    let o = qplane(&["normal-order", "--table", "T3", "--n", "4", "pd1*x1"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "1 + r^2*x1*pd1 + (r^2 - 1)*x2*pd2 + (r^2 - 1)*x3*pd3 + (r^2 - 2 + r^-2)*x4*pd4");
}

#[test]
fn exact_assignment_after_normal_ordering() {
    let o = qplane(&["normal-order", "--set", "r=(3+4i)/5", "pd4*x4"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "1 + (-7/25+24/25*i)*x4*pd4");
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["frobnicate"][..],
        &["verify", "--suite", "nonsense"],
        &["normal-order", "(x1"],
        &["normal-order", "x9"],
        &["normal-order", "--set", "r=0.5", "x1"],
        &["normal-order", "--table", "T7", "x1"],
        &["limit", "x1"],
        &["verify", "--suite", "star", "--n", "5"],
    ] {
        let o = qplane(args);
        assert_eq!(code(&o), 2, "{:?}", args);
        assert!(o.stdout.is_empty(), "{:?}", args);
    }
}

#[test]
fn parse_error_reports_the_column() {
    let o = qplane(&["normal-order", "(x1"]);
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("column 4"), "{}", err);
}

#[test]
fn xx_block_latex_golden() {
    let o = qplane(&["minkowski", "--block", "XX", "--emit", "latex"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert_eq!(out, include_str!("data/xx_block.tex"));
    assert!(out.lines().any(|l| l == "X^{3} X^{2} = X^{2} X^{3}"));
    assert!(out.lines().any(|l| l == "X^{4} X^{1} = X^{1} X^{4} + \\left(\\frac{1}{2} r - \\frac{1}{2} r^{-1}\\right) X^{2} X^{2} + \\left(\\frac{1}{2} r - \\frac{1}{2} r^{-1}\\right) X^{3} X^{3}"));
    assert_eq!(out.lines().count(), 6);
}

#[test]
fn dxdx_block_json_round_trip() {
    let o = qplane(&["minkowski", "--block", "dXdX", "--emit", "json"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert_eq!(out, include_str!("data/dxdx_block.json"));
    let ctx = ParameterContext::minkowski();
    let rels = relations_from_json(out.trim(), &ctx).unwrap();
    assert_eq!(rels.len(), 10);
    assert_eq!(relations_json(&rels, 4), out.trim());
}

#[test]
fn text_output_reparses() {
    let o = qplane(&["minkowski", "--block", "PX", "--emit", "text"]);
    let ctx = ParameterContext::minkowski();
    let rels = qplane::expr::parse_relation_file(&stdout(&o), &ctx).unwrap();
    assert_eq!(rels.len(), 16);
}

#[test]
fn minkowski_verification_flags_only_the_wedge_denominators() {
    let o = qplane(&["minkowski", "--verify", "--emit", "json"]);
    assert_eq!(code(&o), 1);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let failed: Vec<&str> = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"] == false)
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(failed.len(), 4, "{:?}", failed);
    assert!(failed.iter().all(|n| n.starts_with("fixtures/dXdX")));
    for b in ["XX", "XdX", "PX", "PP"] {
        assert_eq!(code(&qplane(&["minkowski", "--verify", "--block", b])), 0, "{}", b);
    }
}

#[test]
fn classical_limit() {
    let o = qplane(&["limit", "--classical", "--table", "T3", "pd1*x1"]);
    assert_eq!(stdout(&o).trim(), "1 + x1*pd1");
    let o = qplane(&["limit", "--classical", "--block", "PX"]);
    let out = stdout(&o);
    assert!(out.contains("P1*X1 = -i*hbar + X1*P1"), "{}", out);
    assert!(out.contains("P2*X3 = X3*P2"), "{}", out);
}

#[test]
fn derive_prints_rules() {
    let o = qplane(&["derive", "--table", "T3", "--n", "4"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).lines().any(|l| l == "dx1*dx1 = 0"));
}

#[test]
fn output_is_deterministic() {
    let args = ["minkowski", "--emit", "json"];
    assert_eq!(qplane(&args).stdout, qplane(&args).stdout);
    let args = ["verify", "--suite", "d2", "--table", "T2", "--n", "4"];
    assert_eq!(qplane(&args).stdout, qplane(&args).stdout);
}

#[test]
fn step_budget_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_qplane"))
        .args(["normal-order", "pd1*pd2*x1*x2*x3*x4"])
        .env("QPLANE_STEP_BUDGET", "3")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8(o.stderr).unwrap().contains("budget"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn exit_code_is_0_or_2_for_any_expression(s in "[x1-5pd*+()^ r-]{0,10}") {
        let o = qplane(&["normal-order", &s]);
        let c = code(&o);
        prop_assert!(c == 0 || c == 2, "{} -> {}", s, c);
        prop_assert_eq!(c == 0, !o.stdout.is_empty());
    }
}
