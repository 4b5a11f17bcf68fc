//! Compatibility of the reduced Lax pair `U_t − V_x + [U, V] = 0`.
//!
//! Only the eight free auxiliary functions are stored. The dependent ones
//! (`f4 = i·p1`, `f6 = −i·p2`, `g7 = −f·p1`, `g11 = −f·p2`,
//! `g4 = −g16 = −i·f·p1·p2`, the rest zero) are implied.

use crate::conditions::CoefficientSet;
use crate::error::Result;
use crate::expr::{ComplexExpr, Expr, Var};
use crate::grid::{ComplexField, GridSpec, RealField};
use crate::report::ResidualReport;
use crate::sample::{sample, sample_complex, sample_diff};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaxFunctions {
    pub f1: ComplexExpr,
    pub f7: ComplexExpr,
    pub g1: ComplexExpr,
    pub g13: ComplexExpr,
    pub g6: ComplexExpr,
    pub g10: ComplexExpr,
    pub p1: ComplexExpr,
    pub p2: ComplexExpr,
    pub lambda: f64,
}

/// Residual names, in evaluation order.
pub const NAMES: [&str; 8] = [
    "diag_11",
    "diag_22",
    "nonlinearity",
    "coupling_12",
    "coupling_21",
    "potential_12",
    "potential_21",
    "dispersion",
];

fn i_times(a: f64) -> ComplexExpr {
    ComplexExpr::new(Expr::Num(0.0), Expr::Num(a))
}

/// Constant-coefficient instance for `f = g = 1`, `γ = v = 0`.
pub fn akns_case1(lambda: f64) -> LaxFunctions {
    let (p1, p2) = (1.0, -0.5);
    LaxFunctions {
        f1: i_times(-lambda),
        f7: i_times(lambda),
        g1: i_times(-2.0 * lambda * lambda),
        g13: i_times(2.0 * lambda * lambda),
        g6: i_times(2.0 * lambda * p1),
        g10: i_times(-2.0 * lambda * p2),
        p1: ComplexExpr::real(Expr::Num(p1)),
        p2: ComplexExpr::real(Expr::Num(p2)),
        lambda,
    }
}

impl LaxFunctions {
    pub fn zero() -> LaxFunctions {
        let z = ComplexExpr::zero();
        LaxFunctions {
            f1: z.clone(),
            f7: z.clone(),
            g1: z.clone(),
            g13: z.clone(),
            g6: z.clone(),
            g10: z.clone(),
            p1: z.clone(),
            p2: z,
            lambda: 0.0,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("lax functions serialize")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<LaxFunctions> {
        Ok(serde_json::from_value(v.clone())?)
    }
}

struct Sampled {
    v: ComplexField,
    d: ComplexField,
}

fn both(e: &ComplexExpr, var: Var, c: &CoefficientSet, grid: &GridSpec) -> Result<Sampled> {
    let d = ComplexExpr::new(
        crate::expr::diff(&e.re, var, 1)?,
        crate::expr::diff(&e.im, var, 1)?,
    );
    Ok(Sampled { v: sample_complex(e, &c.params, grid)?, d: sample_complex(&d, &c.params, grid)? })
}

/// Per-point terms of each constraint; the residual is their sum.
fn terms(l: &LaxFunctions, c: &CoefficientSet, grid: &GridSpec) -> Result<Vec<Vec<ComplexField>>> {
    let params = &c.params;
    let real = |f: &RealField| f.map(|v| Complex64::new(v, 0.0));
    let f = real(&sample(&c.f, params, grid)?);
    let f_x = real(&sample_diff(&c.f, Var::X, 1, params, grid)?);
    let g = real(&sample(&c.g, params, grid)?);
    let gamma = real(&sample(&c.gamma, params, grid)?);
    let v = real(&c.v.sample(params, grid)?[0]);
    let f1 = both(&l.f1, Var::T, c, grid)?;
    let f7 = both(&l.f7, Var::T, c, grid)?;
    let g1 = both(&l.g1, Var::X, c, grid)?;
    let g13 = both(&l.g13, Var::X, c, grid)?;
    let g6 = both(&l.g6, Var::X, c, grid)?;
    let g10 = both(&l.g10, Var::X, c, grid)?;
    let p1 = both(&l.p1, Var::X, c, grid)?;
    let p2 = both(&l.p2, Var::X, c, grid)?;
    let p1_t = sample_complex(&l.p1.derivative(Var::T)?, params, grid)?;
    let p2_t = sample_complex(&l.p2.derivative(Var::T)?, params, grid)?;

    let i = Complex64::i();
    let n = grid.len();
    let mut out: Vec<Vec<Vec<Complex64>>> = vec![
        vec![vec![]; 2],
        vec![vec![]; 2],
        vec![vec![]; 2],
        vec![vec![]; 4],
        vec![vec![]; 4],
        vec![vec![]; 4],
        vec![vec![]; 4],
        vec![vec![]; 5],
    ];
    for k in 0..n {
        let (f, fx, g, gm, v) = (f.data[k], f_x.data[k], g.data[k], gamma.data[k], v.data[k]);
        let (p1v, p1x, p2v, p2x) = (p1.v.data[k], p1.d.data[k], p2.v.data[k], p2.d.data[k]);
        let (g6v, g6x, g10v, g10x) = (g6.v.data[k], g6.d.data[k], g10.v.data[k], g10.d.data[k]);
        let df = f1.v.data[k] - f7.v.data[k];
        let dg = g1.v.data[k] - g13.v.data[k];
        let rows: [&[Complex64]; 8] = [
            &[f1.d.data[k], -g1.d.data[k]],
            &[f7.d.data[k], -g13.d.data[k]],
            &[2.0 * f * p1v * p2v, g],
            &[fx * p1v, -f * p1v * df, f * p1x, -g6v],
            &[fx * p2v, f * p2v * df, f * p2x, -g10v],
            &[g6v * df, -i * p1v * (dg - i * v + gm), -g6x, i * p1_t.data[k]],
            &[g10v * df, i * p2v * (dg - i * v - gm), g10x, i * p2_t.data[k]],
            &[fx * p1v * p2v, f * p1x * p2v, f * p1v * p2x, g10v * p1v, g6v * p2v],
        ];
        for (o, r) in out.iter_mut().zip(rows) {
            for (slot, t) in o.iter_mut().zip(r) {
                slot.push(*t);
            }
        }
    }
    out.into_iter()
        .map(|eq| eq.into_iter().map(|d| Ok(ComplexField::new(*grid, d)?)).collect())
        .collect()
}

fn report(name: &str, terms: &[ComplexField], tol: f64) -> ResidualReport {
    let grid = terms[0].grid;
    let mut r = RealField::filled(grid, 0.0);
    let mut s = RealField::filled(grid, 0.0);
    for k in 0..grid.len() {
        r.data[k] = terms.iter().map(|t| t.data[k]).sum::<Complex64>().norm();
        s.data[k] = terms.iter().fold(0.0_f64, |m, t| m.max(t.data[k].norm()));
    }
    ResidualReport::from_samples(name, &r, Some(&s), tol)
}

/// The eight compatibility residuals, complex moduli, in the order of [`NAMES`].
pub fn compat_residuals(l: &LaxFunctions, c: &CoefficientSet, grid: &GridSpec, tol: f64) -> Result<Vec<ResidualReport>> {
    let t = terms(l, c, grid)?;
    Ok(NAMES.iter().zip(&t).map(|(name, eq)| report(name, eq, tol)).collect())
}

/// `−g_x/2 + g10·p1 + g6·p2`, which vanishes when the nonlinearity and
/// dispersion constraints do.
pub fn reduced_dispersion(l: &LaxFunctions, c: &CoefficientSet, grid: &GridSpec, tol: f64) -> Result<ResidualReport> {
    let gx = sample_diff(&c.g, Var::X, 1, &c.params, grid)?;
    let p1 = sample_complex(&l.p1, &c.params, grid)?;
    let p2 = sample_complex(&l.p2, &c.params, grid)?;
    let g6 = sample_complex(&l.g6, &c.params, grid)?;
    let g10 = sample_complex(&l.g10, &c.params, grid)?;
    let mut cols = vec![vec![]; 3];
    for k in 0..grid.len() {
        cols[0].push(Complex64::new(-0.5 * gx.data[k], 0.0));
        cols[1].push(g10.data[k] * p1.data[k]);
        cols[2].push(g6.data[k] * p2.data[k]);
    }
    let terms: Vec<ComplexField> = cols.into_iter().map(|d| ComplexField::new(*grid, d)).collect::<std::result::Result<_, _>>()?;
    Ok(report("reduced_dispersion", &terms, tol))
}

/// `f·g²` must not depend on `x`: max over each slice of its deviation from the slice mean.
pub fn fg_invariance(c: &CoefficientSet, grid: &GridSpec, tol: f64) -> Result<ResidualReport> {
    let f = sample(&c.f, &c.params, grid)?;
    let g = sample(&c.g, &c.params, grid)?;
    let prod = f.zip_map(&g, |f, g| f * g * g);
    let mut r = RealField::filled(*grid, 0.0);
    for j in 0..grid.n_t {
        let row = prod.row(j);
        let mean = row.iter().sum::<f64>() / row.len() as f64;
        for (o, p) in r.row_mut(j).iter_mut().zip(row) {
            *o = p - mean;
        }
    }
    Ok(ResidualReport::from_samples("fg_invariance", &r, Some(&prod), tol))
}
