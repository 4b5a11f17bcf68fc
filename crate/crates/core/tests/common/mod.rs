#![allow(dead_code)]

use nlsint::expr::{parse, Expr};
use rand::Rng;

/// Random smooth expression in `x`, `t`, bounded on `|x|, |t| ≤ 3`.
pub fn random_expr<R: Rng>(rng: &mut R, depth: usize) -> String {
    if depth == 0 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..3) {
            0 => "x".into(),
            1 => "t".into(),
            _ => format!("{:.2}", rng.gen_range(-2.0..2.0)),
        };
    }
    let a = random_expr(rng, depth - 1);
    match rng.gen_range(0..14) {
        0 => format!("({a} + {})", random_expr(rng, depth - 1)),
        1 => format!("({a} - {})", random_expr(rng, depth - 1)),
        2 => format!("({a})*({})", random_expr(rng, depth - 1)),
        3 => format!("({a})/(2 + sin({}))", random_expr(rng, depth - 1)),
        4 => format!("sin({a})"),
        5 => format!("cos({a})"),
        6 => format!("exp(0.3*sin({a}))"),
        7 => format!("sqrt(1 + ({a})^2)"),
        8 => format!("log(2 + cos({a}))"),
        9 => format!("tanh({a})"),
        10 => format!("sn({a}, -1)"),
        11 => format!("cn({a}, -1)"),
        12 => format!("dn({a}, -1)"),
        _ => format!("({a})^2"),
    }
}

pub fn e(s: &str) -> Expr {
    parse(s).unwrap_or_else(|err| panic!("{s}: {err}"))
}

/// Positive smooth seed `g` on `x ∈ [1, 2]`: polynomial times exponential.
pub fn random_seed_g<R: Rng>(rng: &mut R) -> String {
    let a0 = rng.gen_range(0.5..2.0);
    let a1 = rng.gen_range(0.0..1.0);
    let a2 = rng.gen_range(0.0..0.5);
    let b = rng.gen_range(-0.5..0.5);
    let c = rng.gen_range(-0.5..0.5);
    format!("({a0:.3} + {a1:.3}*x + {a2:.3}*x^2)*exp({b:.3}*x + {c:.3}*t)")
}

/// Positive smooth function of `t`.
pub fn random_time_fn<R: Rng>(rng: &mut R) -> String {
    let k = rng.gen_range(0.5..2.0);
    let a = rng.gen_range(-0.5..0.5);
    let w = rng.gen_range(0.0..0.3);
    format!("{k:.3}*exp({a:.3}*t + {w:.3}*sin(t))")
}
