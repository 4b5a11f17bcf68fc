//! Point evaluation.

use super::{Expr, Func, Params};
use crate::elliptic;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unbound parameter `{0}`")]
    UnboundParameter(String),
    #[error("{what} in `{subexpr}` at x={x}, t={t}")]
    Domain { what: String, subexpr: String, x: f64, t: f64 },
}

fn domain(what: &str, e: &Expr, x: f64, t: f64) -> EvalError {
    EvalError::Domain { what: what.to_string(), subexpr: e.to_string(), x, t }
}

pub(crate) fn apply_unary(f: Func, a: f64) -> Result<f64, &'static str> {
    Ok(match f {
        Func::Exp => a.exp(),
        Func::Log => {
            if a <= 0.0 {
                return Err("log of non-positive value");
            }
            a.ln()
        }
        Func::Sqrt => {
            if a < 0.0 {
                return Err("sqrt of negative value");
            }
            a.sqrt()
        }
        Func::Sin => a.sin(),
        Func::Cos => a.cos(),
        Func::Tan => a.tan(),
        Func::Sinh => a.sinh(),
        Func::Cosh => a.cosh(),
        Func::Tanh => a.tanh(),
        Func::Sech => 1.0 / a.cosh(),
        Func::Sn | Func::Cn | Func::Dn => unreachable!("binary builtin"),
    })
}

pub(crate) fn apply_binary(f: Func, u: f64, m: f64) -> f64 {
    let (s, c, d) = elliptic::jacobi(u, m);
    match f {
        Func::Sn => s,
        Func::Cn => c,
        Func::Dn => d,
        _ => unreachable!("unary builtin"),
    }
}

pub(crate) fn power(b: f64, k: f64) -> f64 {
    if k == k.trunc() && k.abs() < 1024.0 {
        b.powi(k as i32)
    } else {
        b.powf(k)
    }
}

fn finite(v: f64, e: &Expr, x: f64, t: f64) -> Result<f64, EvalError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(domain("non-finite value", e, x, t))
    }
}

impl Expr {
    /// Evaluate at `(x, t)`.
    pub fn eval(&self, x: f64, t: f64, params: &Params) -> Result<f64, EvalError> {
        let v = match self {
            Expr::Num(v) => *v,
            Expr::X => x,
            Expr::T => t,
            Expr::Param(p) => {
                *params.get(p).ok_or_else(|| EvalError::UnboundParameter(p.clone()))?
            }
            Expr::Neg(a) => -a.eval(x, t, params)?,
            Expr::Add(v) => {
                let mut s = 0.0;
                for e in v {
                    s += e.eval(x, t, params)?;
                }
                s
            }
            Expr::Mul(v) => {
                let mut s = 1.0;
                for e in v {
                    s *= e.eval(x, t, params)?;
                }
                s
            }
            Expr::Sub(a, b) => a.eval(x, t, params)? - b.eval(x, t, params)?,
            Expr::Div(a, b) => {
                let n = a.eval(x, t, params)?;
                let d = b.eval(x, t, params)?;
                if d == 0.0 {
                    return Err(domain("division by zero", self, x, t));
                }
                n / d
            }
            Expr::Pow(a, b) => {
                let base = a.eval(x, t, params)?;
                let k = b.eval(x, t, params)?;
                let v = power(base, k);
                if v.is_nan() {
                    return Err(domain("power of negative base", self, x, t));
                }
                if base == 0.0 && k < 0.0 {
                    return Err(domain("division by zero", self, x, t));
                }
                v
            }
            Expr::Call(f, args) => {
                if f.arity() == 2 {
                    let u = args[0].eval(x, t, params)?;
                    let m = args[1].eval(x, t, params)?;
                    apply_binary(*f, u, m)
                } else {
                    let a = args[0].eval(x, t, params)?;
                    apply_unary(*f, a).map_err(|w| domain(w, self, x, t))?
                }
            }
        };
        finite(v, self, x, t)
    }

    /// Compile into a stack program with parameters resolved.
    pub fn compile(&self, params: &Params) -> Result<Program, EvalError> {
        let mut ops = Vec::with_capacity(self.size());
        emit(self, params, &mut ops)?;
        Ok(Program { ops, source: self.clone(), params: params.clone() })
    }
}

#[derive(Clone, Copy, Debug)]
enum Op {
    Const(f64),
    X,
    T,
    Neg,
    Add(u32),
    Mul(u32),
    Sub,
    Div,
    Pow,
    PowI(i32),
    Unary(Func),
    Binary(Func),
}

fn emit(e: &Expr, params: &Params, ops: &mut Vec<Op>) -> Result<(), EvalError> {
    match e {
        Expr::Num(v) => ops.push(Op::Const(*v)),
        Expr::X => ops.push(Op::X),
        Expr::T => ops.push(Op::T),
        Expr::Param(p) => {
            let v = params.get(p).ok_or_else(|| EvalError::UnboundParameter(p.clone()))?;
            ops.push(Op::Const(*v));
        }
        Expr::Neg(a) => {
            emit(a, params, ops)?;
            ops.push(Op::Neg);
        }
        Expr::Add(v) => {
            v.iter().try_for_each(|a| emit(a, params, ops))?;
            ops.push(Op::Add(v.len() as u32));
        }
        Expr::Mul(v) => {
            v.iter().try_for_each(|a| emit(a, params, ops))?;
            ops.push(Op::Mul(v.len() as u32));
        }
        Expr::Sub(a, b) => {
            emit(a, params, ops)?;
            emit(b, params, ops)?;
            ops.push(Op::Sub);
        }
        Expr::Div(a, b) => {
            emit(a, params, ops)?;
            emit(b, params, ops)?;
            ops.push(Op::Div);
        }
        Expr::Pow(a, b) => {
            emit(a, params, ops)?;
            match b.as_num() {
                Some(k) if k == k.trunc() && k.abs() < 1024.0 => ops.push(Op::PowI(k as i32)),
                _ => {
                    emit(b, params, ops)?;
                    ops.push(Op::Pow);
                }
            }
        }
        Expr::Call(f, args) => {
            args.iter().try_for_each(|a| emit(a, params, ops))?;
            ops.push(if f.arity() == 2 { Op::Binary(*f) } else { Op::Unary(*f) });
        }
    }
    Ok(())
}

/// A compiled expression. Evaluation is a flat loop over a value stack; on a
/// domain failure the tree evaluator is rerun to name the offending
/// subexpression.
#[derive(Clone, Debug)]
pub struct Program {
    ops: Vec<Op>,
    source: Expr,
    params: Params,
}

impl Program {
    pub fn source(&self) -> &Expr {
        &self.source
    }

    /// True when the program is a single constant.
    pub fn as_constant(&self) -> Option<f64> {
        match self.ops.as_slice() {
            [Op::Const(v)] => Some(*v),
            _ => None,
        }
    }

    pub fn eval(&self, x: f64, t: f64) -> Result<f64, EvalError> {
        let mut stack = Vec::with_capacity(16);
        self.eval_with(&mut stack, x, t)
    }

    pub fn eval_with(&self, stack: &mut Vec<f64>, x: f64, t: f64) -> Result<f64, EvalError> {
        stack.clear();
        let mut ok = true;
        for op in &self.ops {
            match *op {
                Op::Const(v) => stack.push(v),
                Op::X => stack.push(x),
                Op::T => stack.push(t),
                Op::Neg => {
                    let a = stack.last_mut().unwrap();
                    *a = -*a;
                }
                Op::Add(n) => {
                    let at = stack.len() - n as usize;
                    let s: f64 = stack[at..].iter().sum();
                    stack.truncate(at);
                    stack.push(s);
                }
                Op::Mul(n) => {
                    let at = stack.len() - n as usize;
                    let s: f64 = stack[at..].iter().product();
                    stack.truncate(at);
                    stack.push(s);
                }
                Op::Sub => {
                    let b = stack.pop().unwrap();
                    let a = stack.last_mut().unwrap();
                    *a -= b;
                }
                Op::Div => {
                    let b = stack.pop().unwrap();
                    ok &= b != 0.0;
                    let a = stack.last_mut().unwrap();
                    *a /= b;
                }
                Op::Pow => {
                    let k = stack.pop().unwrap();
                    let a = stack.last_mut().unwrap();
                    ok &= !(*a == 0.0 && k < 0.0);
                    *a = power(*a, k);
                }
                Op::PowI(k) => {
                    let a = stack.last_mut().unwrap();
                    ok &= !(*a == 0.0 && k < 0);
                    *a = a.powi(k);
                }
                Op::Unary(f) => {
                    let a = stack.last_mut().unwrap();
                    match f {
                        Func::Log => ok &= *a > 0.0,
                        Func::Sqrt => ok &= *a >= 0.0,
                        _ => {}
                    }
                    *a = apply_unary(f, *a).unwrap_or(f64::NAN);
                }
                Op::Binary(f) => {
                    let m = stack.pop().unwrap();
                    let a = stack.last_mut().unwrap();
                    *a = apply_binary(f, *a, m);
                }
            }
        }
        let v = stack[0];
        if ok && v.is_finite() {
            Ok(v)
        } else {
            // Reproduce through the tree walk for a precise diagnostic. A
            // non-finite intermediate that the tree walk tolerates (it checks
            // every node) cannot occur, so this always yields an error.
            match self.source.eval(x, t, &self.params) {
                Err(e) => Err(e),
                Ok(_) => Err(domain("non-finite value", &self.source, x, t)),
            }
        }
    }
}
