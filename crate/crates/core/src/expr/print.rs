//! Text rendering that the parser reads back.

use super::Expr;
use std::fmt;

const PREC_SUM: u8 = 1;
const PREC_PRODUCT: u8 = 2;
const PREC_UNARY: u8 = 3;
const PREC_POWER: u8 = 4;
const PREC_ATOM: u8 = 5;

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Num(v) if *v < 0.0 => PREC_UNARY,
        Expr::Num(_) | Expr::X | Expr::T | Expr::Param(_) | Expr::Call(..) => PREC_ATOM,
        Expr::Neg(_) => PREC_UNARY,
        Expr::Pow(..) => PREC_POWER,
        Expr::Mul(v) => match v.as_slice() {
            [Expr::Num(c), ..] if *c < 0.0 => PREC_UNARY,
            _ => PREC_PRODUCT,
        },
        Expr::Div(..) => PREC_PRODUCT,
        Expr::Add(_) | Expr::Sub(..) => PREC_SUM,
    }
}

pub(crate) fn format_num(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else if (1e-4..1e15).contains(&v.abs()) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn write_wrapped(out: &mut String, e: &Expr, min_prec: u8) {
    if precedence(e) < min_prec {
        out.push('(');
        write_expr(out, e);
        out.push(')');
    } else {
        write_expr(out, e);
    }
}

fn negative_power(e: &Expr) -> Option<(&Expr, f64)> {
    match e {
        Expr::Pow(b, k) => match k.as_num() {
            Some(k) if k < 0.0 => Some((b, -k)),
            _ => None,
        },
        _ => None,
    }
}

fn write_product(out: &mut String, factors: &[Expr]) {
    let (mut numer, denom): (Vec<&Expr>, Vec<&Expr>) =
        factors.iter().partition(|f| negative_power(f).is_none());
    let mut lead_minus = false;
    if let Some(Expr::Num(c)) = numer.first() {
        if *c == -1.0 && (numer.len() > 1 || !denom.is_empty()) {
            lead_minus = true;
            numer.remove(0);
        }
    }
    let mut body = String::new();
    if numer.is_empty() {
        body.push('1');
    }
    for (i, f) in numer.iter().enumerate() {
        if i > 0 {
            body.push('*');
        }
        // a leading negative constant may stay bare; later ones need parentheses
        let min = if i == 0 { PREC_UNARY } else { PREC_PRODUCT + 1 };
        write_wrapped(&mut body, f, min);
    }
    if !denom.is_empty() {
        body.push('/');
        let mut d = String::new();
        for (i, f) in denom.iter().enumerate() {
            if i > 0 {
                d.push('*');
            }
            let (base, k) = negative_power(f).unwrap();
            if k == 1.0 {
                write_wrapped(&mut d, base, PREC_ATOM);
            } else {
                write_wrapped(&mut d, base, PREC_ATOM);
                d.push('^');
                d.push_str(&format_num(k));
            }
        }
        if denom.len() > 1 {
            body.push('(');
            body.push_str(&d);
            body.push(')');
        } else {
            body.push_str(&d);
        }
    }
    if lead_minus {
        // `-x^2` would parse as `(-x)^2`
        let starts_with_power = matches!(numer.first(), Some(Expr::Pow(..))) || numer.is_empty();
        if starts_with_power {
            out.push_str("-1*");
        } else {
            out.push('-');
        }
    }
    out.push_str(&body);
}

fn write_expr(out: &mut String, e: &Expr) {
    match e {
        Expr::Num(v) => out.push_str(&format_num(*v)),
        Expr::X => out.push('x'),
        Expr::T => out.push('t'),
        Expr::Param(p) => out.push_str(p),
        Expr::Neg(a) => {
            out.push('-');
            write_wrapped(out, a, PREC_ATOM);
        }
        Expr::Add(terms) => {
            for (i, term) in terms.iter().enumerate() {
                if i == 0 {
                    write_wrapped(out, term, PREC_SUM);
                    continue;
                }
                match term {
                    Expr::Num(v) if *v < 0.0 => {
                        out.push_str(" - ");
                        out.push_str(&format_num(-v));
                    }
                    Expr::Mul(f) if matches!(f.first(), Some(Expr::Num(c)) if *c < 0.0) => {
                        out.push_str(" - ");
                        let mut rest = f.clone();
                        let c = rest[0].as_num().unwrap();
                        if c == -1.0 {
                            rest.remove(0);
                        } else {
                            rest[0] = Expr::Num(-c);
                        }
                        let positive = if rest.len() == 1 { rest.pop().unwrap() } else { Expr::Mul(rest) };
                        write_wrapped(out, &positive, PREC_PRODUCT);
                    }
                    _ => {
                        out.push_str(" + ");
                        write_wrapped(out, term, PREC_PRODUCT.min(precedence(term)).max(PREC_SUM + 1));
                    }
                }
            }
        }
        Expr::Sub(a, b) => {
            write_wrapped(out, a, PREC_SUM);
            out.push_str(" - ");
            write_wrapped(out, b, PREC_PRODUCT);
        }
        Expr::Mul(factors) => write_product(out, factors),
        Expr::Div(a, b) => {
            write_wrapped(out, a, PREC_PRODUCT);
            out.push('/');
            write_wrapped(out, b, PREC_POWER);
        }
        Expr::Pow(b, k) => {
            write_wrapped(out, b, PREC_ATOM);
            out.push('^');
            write_wrapped(out, k, PREC_ATOM);
        }
        Expr::Call(f, args) => {
            out.push_str(f.name());
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(out, a);
            }
            out.push(')');
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_expr(&mut s, self);
        f.write_str(&s)
    }
}
