//! Frozen values of the drift conditions for `f = 1 + x²`, `h = (1 + t)x`,
//! `g = x·e^{t/5} + 1`, `γ = tx/10`, `v = tx³` on `x ∈ [1, 2]`, so that
//! `H = ((1 + x²)/2)^{1+t}`. Reference values from an independent symbolic
//! evaluation.

use nlsint::conditions::{compute_h, residual_fg_hd, residual_gamma_hd, residual_v_hd_field, CoefficientSet};
use nlsint::expr::{parse, Expr};
use nlsint::grid::GridSpec;

fn set() -> (CoefficientSet, GridSpec) {
    let p = |s: &str| parse(s).unwrap();
    let c = CoefficientSet::new(p("1 + x^2"), p("x*exp(t/5) + 1"), p("t*x/10"), p("t*x^3")).with_h(p("(1 + t)*x"));
    (c, GridSpec::new(1.0, 2.0, 11, 0.4, 0.8, 2).unwrap())
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn potential_condition_matches_reference() {
    let (c, grid) = set();
    let r = residual_v_hd_field(&c, &grid).unwrap();
    assert!(rel(r.get(3, 0), 45910.479043240509) < 1e-9, "{}", r.get(3, 0));
    assert!(rel(r.get(7, 1), 4548215.691967173) < 1e-9, "{}", r.get(7, 1));
}

#[test]
fn weight_matches_reference() {
    let (c, grid) = set();
    let h = compute_h(&c, &grid).unwrap();
    assert!(rel(h.get(3, 0), 1.5142974745961981) < 1e-12);
    assert!(rel(h.get(7, 1), 3.311732805917194) < 1e-12);
    assert_eq!(h.get(0, 0), 1.0);
}

#[test]
fn gamma_and_fg_match_reference() {
    let (c, grid) = set();
    let gamma = residual_gamma_hd(&c, &parse("exp(t)").unwrap(), &grid, 1e-8).unwrap();
    assert!(rel(gamma.max_abs, 0.7488272992864685) < 1e-10);
    assert_eq!(gamma.max_at, [2.0, 0.8]);
    let fg = residual_fg_hd(&c, &parse("1 + t").unwrap(), &grid, 1e-8).unwrap();
    assert!(rel(fg.max_abs, 46.646549123284274) < 1e-12);
    assert!(!fg.pass && !gamma.pass);
}

#[test]
fn zero_drift_has_unit_weight() {
    let (c, grid) = set();
    let c = CoefficientSet { h: Some(Expr::Num(0.0)), ..c };
    assert!(compute_h(&c, &grid).unwrap().data.iter().all(|&w| w == 1.0));
}
