use nlsint::catalog::catalog;
use nlsint::expr::{parse, Expr, Params};
use nlsint::laxcheck::{akns_case1, compat_residuals, reduced_dispersion, LaxFunctions, NAMES};
use proptest::prelude::*;

fn bump(e: &Expr, by: &str) -> Expr {
    (e.clone() + parse(by).unwrap()).simplify()
}

#[test]
fn zero_spectral_parameter() {
    let l = akns_case1(0.0);
    for e in [&l.g6, &l.g10] {
        assert!(e.re.eval(0.3, 0.2, &Params::new()).unwrap() == 0.0 && e.im.eval(0.3, 0.2, &Params::new()).unwrap() == 0.0);
    }
    let s = catalog("case1", &Params::new()).unwrap();
    let r = compat_residuals(&l, &s.coefficients, &s.grid, 1e-12).unwrap();
    assert_eq!(r.iter().map(|r| r.condition.as_str()).collect::<Vec<_>>(), NAMES);
    assert_eq!(r[7].max_abs, 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// `−g_x/2 + g10·p1 + g6·p2` is the dispersion constraint minus half the
    /// x-derivative of the nonlinearity constraint.
    #[test]
    fn reduced_dispersion_is_bounded_by_its_parents(a in -0.5f64..0.5, b in -0.5f64..0.5, w in 0.5f64..2.0) {
        let s = catalog("case1", &Params::new()).unwrap();
        let mut l: LaxFunctions = akns_case1(1.0);
        l.g6.re = bump(&l.g6.re, &format!("{a}*sin({w}*x)"));
        l.p1.re = bump(&l.p1.re, &format!("{b}*x"));
        let r = compat_residuals(&l, &s.coefficients, &s.grid, 1e-10).unwrap();
        let red = reduced_dispersion(&l, &s.coefficients, &s.grid, 1e-10).unwrap();
        prop_assert!(red.max_abs <= r[7].max_abs + 0.5 * b.abs() + 1e-12, "{} {} {}", red.max_abs, r[7].max_abs, b);
        if a == 0.0 && b == 0.0 {
            prop_assert!(red.max_abs <= 1e-12);
        }
    }
}

#[test]
fn unperturbed_reduced_dispersion_vanishes() {
    let s = catalog("case1", &Params::new()).unwrap();
    let r = reduced_dispersion(&akns_case1(1.0), &s.coefficients, &s.grid, 1e-10).unwrap();
    assert!(r.pass && r.max_abs <= 1e-12);
}
