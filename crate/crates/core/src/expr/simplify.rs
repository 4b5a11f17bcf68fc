//! Conservative simplification: constant folding, 0/1 identities, flattening,
//! and collection of numeric coefficients/exponents on identical terms.
//!
//! Output is canonical: only `Num`, `X`, `T`, `Param`, `Add` (≥ 2 terms),
//! `Mul` (≥ 2 factors, at most one leading `Num`), `Pow` and `Call` nodes.

use super::eval::{apply_binary, apply_unary, power};
use super::{Expr, Func};
use std::cmp::Ordering;

impl Expr {
    pub fn simplify(&self) -> Expr {
        match self {
            Expr::Num(_) | Expr::X | Expr::T | Expr::Param(_) => self.clone(),
            Expr::Neg(a) => make_mul(vec![Expr::Num(-1.0), a.simplify()]),
            Expr::Sub(a, b) => {
                let nb = make_mul(vec![Expr::Num(-1.0), b.simplify()]);
                make_add(vec![a.simplify(), nb])
            }
            Expr::Div(a, b) => {
                let inv = make_pow(b.simplify(), Expr::Num(-1.0));
                make_mul(vec![a.simplify(), inv])
            }
            Expr::Add(v) => make_add(v.iter().map(Expr::simplify).collect()),
            Expr::Mul(v) => make_mul(v.iter().map(Expr::simplify).collect()),
            Expr::Pow(a, b) => make_pow(a.simplify(), b.simplify()),
            Expr::Call(f, args) => make_call(*f, args.iter().map(Expr::simplify).collect()),
        }
    }
}

fn num_if_finite(v: f64) -> Option<Expr> {
    v.is_finite().then_some(Expr::Num(v))
}

/// Split a canonical term into numeric coefficient and the rest.
fn split_coefficient(e: Expr) -> (f64, Option<Expr>) {
    match e {
        Expr::Num(c) => (c, None),
        Expr::Mul(mut f) if matches!(f.first(), Some(Expr::Num(_))) => {
            let c = f.remove(0).as_num().unwrap();
            let rest = if f.len() == 1 { f.pop().unwrap() } else { Expr::Mul(f) };
            (c, Some(rest))
        }
        other => (1.0, Some(other)),
    }
}

fn with_coefficient(c: f64, rest: Expr) -> Expr {
    if c == 1.0 {
        return rest;
    }
    match rest {
        Expr::Mul(mut f) => {
            f.insert(0, Expr::Num(c));
            Expr::Mul(f)
        }
        other => Expr::Mul(vec![Expr::Num(c), other]),
    }
}

pub(super) fn make_add(terms: Vec<Expr>) -> Expr {
    let mut flat = Vec::with_capacity(terms.len());
    for t in terms {
        match t {
            Expr::Add(inner) => flat.extend(inner),
            other => flat.push(other),
        }
    }
    let mut constant = 0.0;
    let mut collected: Vec<(Expr, f64)> = Vec::new();
    for t in flat {
        let (c, rest) = split_coefficient(t);
        match rest {
            None => constant += c,
            Some(rest) => match collected.iter_mut().find(|(r, _)| *r == rest) {
                Some((_, acc)) => *acc += c,
                None => collected.push((rest, c)),
            },
        }
    }
    let mut out: Vec<Expr> = collected
        .into_iter()
        .filter(|(_, c)| *c != 0.0)
        .map(|(r, c)| with_coefficient(c, r))
        .collect();
    if constant != 0.0 {
        out.push(Expr::Num(constant));
    }
    match out.len() {
        0 => Expr::Num(0.0),
        1 => out.pop().unwrap(),
        _ => Expr::Add(out),
    }
}

fn rank(e: &Expr) -> u8 {
    let base = match e {
        Expr::Pow(b, _) => b.as_ref(),
        other => other,
    };
    match base {
        Expr::Num(_) => 0,
        Expr::Param(_) => 1,
        Expr::X => 2,
        Expr::T => 3,
        Expr::Call(..) => 4,
        Expr::Add(_) => 5,
        _ => 6,
    }
}

fn factor_order(a: &Expr, b: &Expr) -> Ordering {
    rank(a).cmp(&rank(b)).then_with(|| {
        let key = |e: &Expr| match e {
            Expr::Pow(b, _) => b.to_string(),
            other => other.to_string(),
        };
        key(a).cmp(&key(b)).then_with(|| a.to_string().cmp(&b.to_string()))
    })
}

pub(super) fn make_mul(factors: Vec<Expr>) -> Expr {
    let mut flat = Vec::with_capacity(factors.len());
    for f in factors {
        match f {
            Expr::Mul(inner) => flat.extend(inner),
            other => flat.push(other),
        }
    }
    let mut coefficient = 1.0;
    // (base, numeric exponent) pairs; symbolic powers are kept whole
    let mut bases: Vec<(Expr, f64)> = Vec::new();
    let mut others: Vec<Expr> = Vec::new();
    let mut exp_args: Vec<Expr> = Vec::new();
    for f in flat {
        match f {
            Expr::Num(c) => coefficient *= c,
            Expr::Call(Func::Exp, mut a) => exp_args.push(a.pop().unwrap()),
            Expr::Pow(b, k) if k.as_num().is_some() => {
                let k = k.as_num().unwrap();
                match bases.iter_mut().find(|(e, _)| *e == *b) {
                    Some((_, acc)) => *acc += k,
                    None => bases.push((*b, k)),
                }
            }
            other => match bases.iter_mut().find(|(e, _)| *e == other) {
                Some((_, acc)) => *acc += 1.0,
                None => bases.push((other, 1.0)),
            },
        }
    }
    if coefficient == 0.0 {
        return Expr::Num(0.0);
    }
    let mut out: Vec<Expr> = Vec::new();
    for (b, k) in bases {
        if k == 0.0 {
            continue;
        }
        let p = make_pow(b, Expr::Num(k));
        match p {
            Expr::Num(c) => coefficient *= c,
            Expr::Mul(inner) => {
                for f in inner {
                    match f {
                        Expr::Num(c) => coefficient *= c,
                        other => out.push(other),
                    }
                }
            }
            other => out.push(other),
        }
    }
    out.append(&mut others);
    if !exp_args.is_empty() {
        let arg = if exp_args.len() == 1 { exp_args.pop().unwrap() } else { make_add(exp_args) };
        match make_call(Func::Exp, vec![arg]) {
            Expr::Num(c) => coefficient *= c,
            e => out.push(e),
        }
    }
    if !coefficient.is_finite() {
        // leave the overflow visible rather than storing a non-finite constant
        coefficient = if coefficient.is_nan() { 0.0 } else { coefficient.signum() * f64::MAX };
    }
    if coefficient == 0.0 {
        return Expr::Num(0.0);
    }
    out.sort_by(factor_order);
    if out.is_empty() {
        return Expr::Num(coefficient);
    }
    if coefficient != 1.0 {
        out.insert(0, Expr::Num(coefficient));
    }
    if out.len() == 1 {
        out.pop().unwrap()
    } else {
        Expr::Mul(out)
    }
}

fn is_integer(k: f64) -> bool {
    k == k.trunc() && k.abs() < 1e15
}

pub(super) fn make_pow(base: Expr, exponent: Expr) -> Expr {
    if let Some(k) = exponent.as_num() {
        if k == 0.0 {
            return Expr::Num(1.0);
        }
        if k == 1.0 {
            return base;
        }
    }
    match (&base, exponent.as_num()) {
        (Expr::Num(b), Some(k)) => {
            if let Some(v) = num_if_finite(power(*b, k)) {
                if !(b.abs() == 0.0 && k < 0.0) {
                    return v;
                }
            }
        }
        (Expr::Num(b), None) if *b == 1.0 => return Expr::Num(1.0),
        (Expr::Pow(inner, k0), Some(k)) if is_integer(k) => {
            let e = make_mul(vec![(**k0).clone(), Expr::Num(k)]);
            return make_pow((**inner).clone(), e);
        }
        (Expr::Mul(factors), Some(k)) if is_integer(k) => {
            return make_mul(factors.iter().map(|f| make_pow(f.clone(), Expr::Num(k))).collect());
        }
        (Expr::Call(Func::Exp, args), Some(k)) => {
            let arg = make_mul(vec![Expr::Num(k), args[0].clone()]);
            return make_call(Func::Exp, vec![arg]);
        }
        _ => {}
    }
    Expr::Pow(Box::new(base), Box::new(exponent))
}

pub(super) fn make_call(f: Func, args: Vec<Expr>) -> Expr {
    let nums: Option<Vec<f64>> = args.iter().map(Expr::as_num).collect();
    if let Some(v) = nums {
        let folded = if f.arity() == 2 {
            Some(apply_binary(f, v[0], v[1]))
        } else {
            apply_unary(f, v[0]).ok()
        };
        if let Some(e) = folded.and_then(num_if_finite) {
            return e;
        }
    }
    Expr::Call(f, args)
}

#[cfg(test)]
mod tests {
    use crate::expr::{parse, Expr, Params};

    fn s(src: &str) -> String {
        parse(src).unwrap().simplify().to_string()
    }

    #[test]
    fn zero_and_one_identities() {
        assert_eq!(s("0*x + 1*t"), "t");
        assert_eq!(s("x^0"), "1");
        assert_eq!(s("x^1 + 0"), "x");
        assert_eq!(s("(x + t)/1"), "x + t");
        assert_eq!(s("1^x"), "1");
    }

    #[test]
    fn folds_constants() {
        assert_eq!(s("2*3 + sqrt(16)"), "10");
        assert_eq!(s("-(2)"), "-2");
        assert_eq!(s("sn(0, -1)"), "0");
        // not foldable: stays symbolic instead of storing NaN
        assert_eq!(s("log(-1)"), "log(-1)");
        assert_eq!(s("0^(-1)"), "0^(-1)");
    }

    #[test]
    fn flattens_and_collects() {
        assert_eq!(s("(x + t) + (x + 1)"), "2*x + t + 1");
        assert_eq!(s("x*(x*t)"), "x^2*t");
        assert_eq!(s("t*x*2"), "2*x*t");
        assert_eq!(s("x - x"), "0");
        assert_eq!(s("a*a"), "a^2");
        assert_eq!(s("exp(a*t)*exp(-a*t)"), "1");
        assert_eq!(s("exp(2*a*t)/exp(a*t)^2"), "1");
        assert_eq!(s("(x^n)^(-2)"), "x^(-2*n)");
    }

    #[test]
    fn preserves_values() {
        let p: Params = [("a".to_string(), 0.7)].into_iter().collect();
        for src in [
            "(x - t)^3/(1 + x^2) - a*x*(t + 1)",
            "-x^2*exp(a*t)/exp(2*a*t) + sech(x)*tanh(x)",
            "sn(x*a, -1)^2 + cn(x*a, -1)^2 - x/(2*x)",
        ] {
            let e = parse(src).unwrap();
            let r = e.simplify();
            for (x, t) in [(0.3, 0.1), (-1.2, 2.0), (2.5, -0.7)] {
                let (a, b) = (e.eval(x, t, &p).unwrap(), r.eval(x, t, &p).unwrap());
                assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{src}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn idempotent() {
        for src in ["x^2*t + 3*x - t/x", "a^2*exp(a*t)", "sn(t*x^2/sqrt(8), -1)/sqrt(x)"] {
            let once = parse(src).unwrap().simplify();
            assert_eq!(once.simplify(), once);
        }
    }

    #[test]
    fn canonical_nodes_only() {
        fn check(e: &Expr) {
            match e {
                Expr::Neg(_) | Expr::Sub(..) | Expr::Div(..) => panic!("non-canonical {e:?}"),
                Expr::Add(v) | Expr::Mul(v) => {
                    assert!(v.len() >= 2);
                    v.iter().for_each(check)
                }
                Expr::Call(_, v) => v.iter().for_each(check),
                Expr::Pow(a, b) => {
                    check(a);
                    check(b)
                }
                _ => {}
            }
        }
        check(&parse("-(x - t)/(a - -b) + -x^(-n)").unwrap().simplify());
    }
}
