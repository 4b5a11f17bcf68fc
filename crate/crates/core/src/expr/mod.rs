//! Symbolic expressions in the two independent variables `x` and `t`.
//!
//! Expressions are immutable trees. The parser produces binary nodes exactly
//! as written; [`Expr::simplify`] rewrites them into a canonical n-ary form
//! (sums, products and powers only) that the differentiator works on.

mod diff;
mod eval;
mod parse;
mod print;
mod simplify;

use std::collections::BTreeMap;
use std::fmt;

pub use diff::{diff, DiffError};
pub use eval::{EvalError, Program};
pub use parse::{parse, ParseError};

/// Named scalar parameters (`alpha`, `n`, ...). Ordered so that anything
/// derived from a parameter map is deterministic.
pub type Params = BTreeMap<String, f64>;

/// Differentiation variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Var {
    X,
    T,
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::X => f.write_str("x"),
            Var::T => f.write_str("t"),
        }
    }
}

/// Builtin functions. `sn`, `cn`, `dn` take `(u, m)`; everything else is unary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Func {
    Exp,
    Log,
    Sqrt,
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Tanh,
    Sech,
    Sn,
    Cn,
    Dn,
}

impl Func {
    pub const ALL: [Func; 13] = [
        Func::Exp,
        Func::Log,
        Func::Sqrt,
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Sinh,
        Func::Cosh,
        Func::Tanh,
        Func::Sech,
        Func::Sn,
        Func::Cn,
        Func::Dn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
            Func::Sech => "sech",
            Func::Sn => "sn",
            Func::Cn => "cn",
            Func::Dn => "dn",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.iter().copied().find(|f| f.name() == name)
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Sn | Func::Cn | Func::Dn => 2,
            _ => 1,
        }
    }
}

/// Expression tree.
///
/// `Add` and `Mul` are n-ary; the parser always emits them with two children.
/// Constants are finite.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    X,
    T,
    Param(String),
    Neg(Box<Expr>),
    Add(Vec<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Vec<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

impl Expr {
    /// Numeric constant. Panics on a non-finite value.
    pub fn num(v: f64) -> Expr {
        assert!(v.is_finite(), "non-finite constant {v}");
        Expr::Num(v)
    }

    pub fn param(name: &str) -> Expr {
        Expr::Param(name.to_string())
    }

    pub fn var(v: Var) -> Expr {
        match v {
            Var::X => Expr::X,
            Var::T => Expr::T,
        }
    }

    pub fn pow(self, exponent: Expr) -> Expr {
        Expr::Pow(Box::new(self), Box::new(exponent))
    }

    pub fn powi(self, k: i32) -> Expr {
        self.pow(Expr::Num(k as f64))
    }

    pub fn call(f: Func, args: Vec<Expr>) -> Expr {
        debug_assert_eq!(f.arity(), args.len());
        Expr::Call(f, args)
    }

    pub fn exp(self) -> Expr {
        Expr::call(Func::Exp, vec![self])
    }

    pub fn log(self) -> Expr {
        Expr::call(Func::Log, vec![self])
    }

    pub fn sqrt(self) -> Expr {
        Expr::call(Func::Sqrt, vec![self])
    }

    pub fn as_num(&self) -> Option<f64> {
        match self {
            Expr::Num(v) => Some(*v),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_num() == Some(0.0)
    }

    /// Structural dependence on a variable.
    pub fn depends_on(&self, var: Var) -> bool {
        match self {
            Expr::Num(_) | Expr::Param(_) => false,
            Expr::X => var == Var::X,
            Expr::T => var == Var::T,
            Expr::Neg(a) => a.depends_on(var),
            Expr::Add(v) | Expr::Mul(v) | Expr::Call(_, v) => v.iter().any(|e| e.depends_on(var)),
            Expr::Sub(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.depends_on(var) || b.depends_on(var)
            }
        }
    }

    /// Names of all parameters referenced.
    pub fn params(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_params(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_params(&self, out: &mut Vec<String>) {
        match self {
            Expr::Param(p) => out.push(p.clone()),
            Expr::Num(_) | Expr::X | Expr::T => {}
            Expr::Neg(a) => a.collect_params(out),
            Expr::Add(v) | Expr::Mul(v) | Expr::Call(_, v) => {
                v.iter().for_each(|e| e.collect_params(out))
            }
            Expr::Sub(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.collect_params(out);
                b.collect_params(out);
            }
        }
    }

    /// Replace parameters that appear in `params` by their numeric value.
    pub fn bind(&self, params: &Params) -> Expr {
        match self {
            Expr::Param(p) => match params.get(p) {
                Some(v) => Expr::Num(*v),
                None => self.clone(),
            },
            Expr::Num(_) | Expr::X | Expr::T => self.clone(),
            Expr::Neg(a) => Expr::Neg(Box::new(a.bind(params))),
            Expr::Add(v) => Expr::Add(v.iter().map(|e| e.bind(params)).collect()),
            Expr::Mul(v) => Expr::Mul(v.iter().map(|e| e.bind(params)).collect()),
            Expr::Call(f, v) => Expr::Call(*f, v.iter().map(|e| e.bind(params)).collect()),
            Expr::Sub(a, b) => Expr::Sub(Box::new(a.bind(params)), Box::new(b.bind(params))),
            Expr::Div(a, b) => Expr::Div(Box::new(a.bind(params)), Box::new(b.bind(params))),
            Expr::Pow(a, b) => Expr::Pow(Box::new(a.bind(params)), Box::new(b.bind(params))),
        }
    }

    /// Substitute `replacement` for every occurrence of `var`.
    pub fn substitute(&self, var: Var, replacement: &Expr) -> Expr {
        match self {
            Expr::X if var == Var::X => replacement.clone(),
            Expr::T if var == Var::T => replacement.clone(),
            Expr::Num(_) | Expr::X | Expr::T | Expr::Param(_) => self.clone(),
            Expr::Neg(a) => Expr::Neg(Box::new(a.substitute(var, replacement))),
            Expr::Add(v) => Expr::Add(v.iter().map(|e| e.substitute(var, replacement)).collect()),
            Expr::Mul(v) => Expr::Mul(v.iter().map(|e| e.substitute(var, replacement)).collect()),
            Expr::Call(f, v) => {
                Expr::Call(*f, v.iter().map(|e| e.substitute(var, replacement)).collect())
            }
            Expr::Sub(a, b) => Expr::Sub(
                Box::new(a.substitute(var, replacement)),
                Box::new(b.substitute(var, replacement)),
            ),
            Expr::Div(a, b) => Expr::Div(
                Box::new(a.substitute(var, replacement)),
                Box::new(b.substitute(var, replacement)),
            ),
            Expr::Pow(a, b) => Expr::Pow(
                Box::new(a.substitute(var, replacement)),
                Box::new(b.substitute(var, replacement)),
            ),
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        1 + match self {
            Expr::Num(_) | Expr::X | Expr::T | Expr::Param(_) => 0,
            Expr::Neg(a) => a.size(),
            Expr::Add(v) | Expr::Mul(v) | Expr::Call(_, v) => v.iter().map(Expr::size).sum(),
            Expr::Sub(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => a.size() + b.size(),
        }
    }
}

impl From<f64> for Expr {
    fn from(v: f64) -> Expr {
        Expr::num(v)
    }
}

impl std::str::FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Expr, ParseError> {
        parse(s)
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::Add(vec![self, rhs])
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::Sub(Box::new(self), Box::new(rhs))
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::Mul(vec![self, rhs])
    }
}

impl std::ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::Div(Box::new(self), Box::new(rhs))
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}

impl std::ops::Mul<Expr> for f64 {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::num(self) * rhs
    }
}

impl serde::Serialize for Expr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for Expr {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Expr, D::Error> {
        let text = String::deserialize(d)?;
        parse(&text).map_err(serde::de::Error::custom)
    }
}

/// A complex-valued expression stored as real and imaginary parts.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ComplexExpr {
    pub re: Expr,
    #[serde(default = "zero_expr")]
    pub im: Expr,
}

fn zero_expr() -> Expr {
    Expr::Num(0.0)
}

impl ComplexExpr {
    pub fn new(re: Expr, im: Expr) -> Self {
        ComplexExpr { re, im }
    }

    pub fn real(re: Expr) -> Self {
        ComplexExpr { re, im: Expr::Num(0.0) }
    }

    /// `modulus · e^{i·phase}`.
    pub fn polar(modulus: Expr, phase: Expr) -> Self {
        ComplexExpr {
            re: (modulus.clone() * Expr::call(Func::Cos, vec![phase.clone()])).simplify(),
            im: (modulus * Expr::call(Func::Sin, vec![phase])).simplify(),
        }
    }

    pub fn zero() -> Self {
        ComplexExpr::real(Expr::Num(0.0))
    }

    pub fn derivative(&self, var: Var) -> Result<ComplexExpr, DiffError> {
        Ok(ComplexExpr { re: self.re.derivative(var)?, im: self.im.derivative(var)? })
    }

    pub fn bind(&self, params: &Params) -> ComplexExpr {
        ComplexExpr { re: self.re.bind(params), im: self.im.bind(params) }
    }
}
