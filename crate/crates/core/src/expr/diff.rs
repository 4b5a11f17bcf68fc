//! Exact symbolic differentiation.

use super::simplify::{make_add, make_call, make_mul, make_pow};
use super::{Expr, Func, Var};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiffError {
    #[error("derivative order {0} not supported (1..=4)")]
    UnsupportedOrder(usize),
    #[error("elliptic modulus `{0}` depends on the differentiation variable")]
    ModulusDependsOnVariable(String),
}

impl Expr {
    /// First derivative, simplified.
    pub fn derivative(&self, var: Var) -> Result<Expr, DiffError> {
        Ok(d(&self.simplify(), var)?.simplify())
    }
}

/// `order`-th derivative with respect to `var`.
pub fn diff(e: &Expr, var: Var, order: usize) -> Result<Expr, DiffError> {
    if !(1..=4).contains(&order) {
        return Err(DiffError::UnsupportedOrder(order));
    }
    let mut out = e.simplify();
    for _ in 0..order {
        out = d(&out, var)?.simplify();
    }
    Ok(out)
}

fn neg(e: Expr) -> Expr {
    make_mul(vec![Expr::Num(-1.0), e])
}

fn d(e: &Expr, var: Var) -> Result<Expr, DiffError> {
    if !e.depends_on(var) {
        return Ok(Expr::Num(0.0));
    }
    Ok(match e {
        Expr::X | Expr::T => Expr::Num(1.0),
        Expr::Num(_) | Expr::Param(_) => Expr::Num(0.0),
        Expr::Neg(a) => neg(d(a, var)?),
        Expr::Sub(a, b) => make_add(vec![d(a, var)?, neg(d(b, var)?)]),
        Expr::Add(terms) => make_add(terms.iter().map(|t| d(t, var)).collect::<Result<_, _>>()?),
        Expr::Mul(factors) => {
            let mut terms = Vec::new();
            for (i, f) in factors.iter().enumerate() {
                if !f.depends_on(var) {
                    continue;
                }
                let mut p = factors.clone();
                p[i] = d(f, var)?;
                terms.push(make_mul(p));
            }
            make_add(terms)
        }
        Expr::Div(a, b) => {
            // (a'b - ab')/b^2
            let num = make_add(vec![
                make_mul(vec![d(a, var)?, (**b).clone()]),
                neg(make_mul(vec![(**a).clone(), d(b, var)?])),
            ]);
            make_mul(vec![num, make_pow((**b).clone(), Expr::Num(-2.0))])
        }
        Expr::Pow(b, k) => {
            let (b, k) = (&**b, &**k);
            if !k.depends_on(var) {
                let km1 = make_add(vec![k.clone(), Expr::Num(-1.0)]);
                make_mul(vec![k.clone(), make_pow(b.clone(), km1), d(b, var)?])
            } else {
                // b^k·(k'·log b + k·b'/b)
                let log_b = make_call(Func::Log, vec![b.clone()]);
                let inner = make_add(vec![
                    make_mul(vec![d(k, var)?, log_b]),
                    make_mul(vec![k.clone(), d(b, var)?, make_pow(b.clone(), Expr::Num(-1.0))]),
                ]);
                make_mul(vec![e.clone(), inner])
            }
        }
        Expr::Call(f, args) => {
            let u = &args[0];
            let du = d(u, var)?;
            let call = |g: Func| make_call(g, args.clone());
            let outer = match f {
                Func::Exp => e.clone(),
                Func::Log => make_pow(u.clone(), Expr::Num(-1.0)),
                Func::Sqrt => make_mul(vec![Expr::Num(0.5), make_pow(e.clone(), Expr::Num(-1.0))]),
                Func::Sin => make_call(Func::Cos, vec![u.clone()]),
                Func::Cos => neg(make_call(Func::Sin, vec![u.clone()])),
                Func::Tan => make_add(vec![Expr::Num(1.0), make_pow(e.clone(), Expr::Num(2.0))]),
                Func::Sinh => make_call(Func::Cosh, vec![u.clone()]),
                Func::Cosh => make_call(Func::Sinh, vec![u.clone()]),
                Func::Tanh => make_pow(make_call(Func::Sech, vec![u.clone()]), Expr::Num(2.0)),
                Func::Sech => neg(make_mul(vec![e.clone(), make_call(Func::Tanh, vec![u.clone()])])),
                Func::Sn | Func::Cn | Func::Dn => {
                    let m = &args[1];
                    if m.depends_on(var) {
                        return Err(DiffError::ModulusDependsOnVariable(m.to_string()));
                    }
                    match f {
                        Func::Sn => make_mul(vec![call(Func::Cn), call(Func::Dn)]),
                        Func::Cn => neg(make_mul(vec![call(Func::Sn), call(Func::Dn)])),
                        _ => neg(make_mul(vec![m.clone(), call(Func::Sn), call(Func::Cn)])),
                    }
                }
            };
            make_mul(vec![outer, du])
        }
    })
}
