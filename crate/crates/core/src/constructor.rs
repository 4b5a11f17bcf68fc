//! Building integrable coefficient sets from a seed nonlinearity `g` and the
//! free functions of time.

use crate::conditions::{potential_source, CoefficientSet, Potential};
use crate::error::{Error, Result};
use crate::expr::{Expr, Params, Var};
use crate::grid::{cumint, GridSpec, RealField};
use crate::sample::{require_nonzero, require_time_only, sample};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Free functions of time. `k1i` is carried along but never enters the
/// numeric path.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeFunctions {
    pub c1: Expr,
    pub c2: Expr,
    pub c3: Expr,
    pub c4: Expr,
    pub k1i: Expr,
}

impl Default for FreeFunctions {
    fn default() -> Self {
        FreeFunctions {
            c1: Expr::Num(1.0),
            c2: Expr::Num(1.0),
            c3: Expr::Num(0.0),
            c4: Expr::Num(0.0),
            k1i: Expr::Num(0.0),
        }
    }
}

impl FreeFunctions {
    pub fn validate(&self) -> Result<()> {
        for (name, e) in [("c1", &self.c1), ("c2", &self.c2), ("c3", &self.c3), ("c4", &self.c4), ("k1i", &self.k1i)] {
            require_time_only(name, e)?;
        }
        Ok(())
    }
}

/// `f = c1/g²`.
pub fn build_f(g: &Expr, c1: &Expr) -> Expr {
    (c1.clone() * g.clone().powi(-2)).simplify()
}

/// `γ = g_t/g − ċ2/(2c2)`.
pub fn build_gamma(g: &Expr, c2: &Expr) -> Result<Expr> {
    let gt = g.derivative(Var::T)?;
    let c2t = c2.derivative(Var::T)?;
    Ok((gt / g.clone() - Expr::Num(0.5) * c2t / c2.clone()).simplify())
}

/// A potential obtained by quadrature.
#[derive(Debug, Clone, PartialEq)]
pub struct BuiltPotential {
    pub v: RealField,
    pub v_x: RealField,
    /// Closed form when the samples are recognized as a sum of monomials
    /// with constant coefficients.
    pub closed_form: Option<Expr>,
}

impl BuiltPotential {
    pub fn potential(&self) -> Potential {
        Potential::Sampled { v: self.v.clone(), v_x: Some(self.v_x.clone()) }
    }
}

/// Solve the potential condition for `v` on every time slice.
///
/// With `S` the `v`-free part, `(v_x/g)_x = −S/(2f³g⁵)`; then
/// `v_x = g·(∫ −S/(2f³g⁵) dx + c4/g(x_min))` and `v = ∫ v_x dx + c3`,
/// both integrals starting at `x_min`.
pub fn build_v(c: &CoefficientSet, free: &FreeFunctions, grid: &GridSpec) -> Result<BuiltPotential> {
    free.validate()?;
    if c.h.as_ref().is_some_and(|h| !h.simplify().is_zero()) {
        return Err(Error::Precondition("build_v handles h = 0 only".into()));
    }
    let [s, f, g] = potential_source(c, grid)?;
    require_nonzero("f", &f)?;
    require_nonzero("g", &g)?;
    let c3 = sample(&free.c3, &c.params, grid)?;
    let c4 = sample(&free.c4, &c.params, grid)?;
    let h = grid.dx();
    let n = grid.n_x;
    let mut v = RealField::filled(*grid, 0.0);
    let mut v_x = RealField::filled(*grid, 0.0);
    for j in 0..grid.n_t {
        let (fr, gr, sr) = (f.row(j), g.row(j), s.row(j));
        let rhs: Vec<f64> = (0..n).map(|i| -sr[i] / (2.0 * fr[i].powi(3) * gr[i].powi(5))).collect();
        let w = cumint(&rhs, h);
        let k4 = c4.get(0, j) / gr[0];
        let vx: Vec<f64> = (0..n).map(|i| gr[i] * (w[i] + k4)).collect();
        let vv = cumint(&vx, h);
        let c3j = c3.get(0, j);
        for i in 0..n {
            v.data[grid.index(i, j)] = vv[i] + c3j;
            v_x.data[grid.index(i, j)] = vx[i];
        }
    }
    v.check_finite()?;
    let closed_form = recognize(&v);
    Ok(BuiltPotential { v, v_x, closed_form })
}

/// Full pipeline: `f`, `γ` in closed form, `v` by quadrature (replaced by
/// its closed form when one is recognized).
pub fn construct(g: &Expr, free: &FreeFunctions, params: &Params, grid: &GridSpec) -> Result<(CoefficientSet, BuiltPotential)> {
    free.validate()?;
    let gs = sample(g, params, grid)?;
    require_nonzero("g", &gs)?;
    let f = build_f(g, &free.c1);
    let gamma = build_gamma(g, &free.c2)?;
    let mut c = CoefficientSet::new(f, g.clone(), gamma, Expr::Num(0.0)).with_params(params.clone());
    let built = build_v(&c, free, grid)?;
    c.v = built.potential();
    Ok((c, built))
}

/// `v = v2(t)·x² + c3·x + c4` for time-only `f`, `g`, `γ`.
pub fn build_v_timeonly(f: &Expr, g: &Expr, gamma: &Expr, free: &FreeFunctions) -> Result<Expr> {
    let v2 = timeonly_v2(f, g, gamma)?;
    Ok((v2 * Expr::X.powi(2) + free.c3.clone() * Expr::X + free.c4.clone()).simplify())
}

/// The `x²` coefficient for time-only coefficients.
pub fn timeonly_v2(f: &Expr, g: &Expr, gamma: &Expr) -> Result<Expr> {
    require_time_only("f", f)?;
    require_time_only("g", g)?;
    require_time_only("gamma", gamma)?;
    let d = |e: &Expr| e.derivative(Var::T);
    let (fd, gd, gad) = (d(f)?, d(g)?, d(gamma)?);
    let (fdd, gdd) = (d(&fd)?, d(&gd)?);
    let (f, g, ga) = (f.clone(), g.clone(), gamma.clone());
    let two = || Expr::Num(2.0);
    let numer = Expr::Num(-1.0) * g.clone().powi(2) * fd.clone().powi(2)
        + f.clone() * g.clone() * (g.clone() * fdd + fd.clone() * (two() * g.clone() * ga.clone() - gd.clone()))
        + f.clone().powi(2)
            * (two() * gd.clone().powi(2) - g.clone() * (gdd + Expr::Num(4.0) * ga.clone() * gd)
                + two() * g.clone().powi(2) * (gad + two() * ga.powi(2)));
    let denom = Expr::Num(4.0) * f.powi(3) * g.powi(2);
    Ok((numer / denom).simplify())
}

/// Monomial exponents tried by [`recognize`].
const EXPONENTS: std::ops::RangeInclusive<i32> = -6..=6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub power: i32,
    pub coefficient: f64,
}

/// Sparse fit `y ≈ Σ c_k x^k` by backward elimination; `None` when no
/// combination reproduces the samples to `1e-9` of their magnitude.
pub fn fit_monomials(xs: &[f64], ys: &[f64]) -> Option<Vec<Monomial>> {
    let scale = ys.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return Some(Vec::new());
    }
    let tol = 1e-9 * scale;
    let has_zero = xs.iter().any(|x| x.abs() < 1e-12);
    let mut active: Vec<i32> = EXPONENTS.filter(|k| *k >= 0 || !has_zero).collect();
    let mut best = solve(xs, ys, &active)?;
    if best.1 > tol {
        return None;
    }
    while active.len() > 1 {
        let mut candidate: Option<(usize, (Vec<f64>, f64))> = None;
        for drop in 0..active.len() {
            let trial: Vec<i32> = active.iter().enumerate().filter(|(i, _)| *i != drop).map(|(_, k)| *k).collect();
            if let Some(fit) = solve(xs, ys, &trial) {
                if candidate.as_ref().is_none_or(|(_, c)| fit.1 < c.1) {
                    candidate = Some((drop, fit));
                }
            }
        }
        match candidate {
            Some((drop, fit)) if fit.1 <= tol => {
                active.remove(drop);
                best = fit;
            }
            _ => break,
        }
    }
    let out: Vec<Monomial> = active
        .iter()
        .zip(best.0)
        .filter(|(_, c)| c.abs() > 1e-12 * scale)
        .map(|(k, c)| Monomial { power: *k, coefficient: c })
        .collect();
    Some(out)
}

/// Least squares with column scaling; returns coefficients and max residual.
fn solve(xs: &[f64], ys: &[f64], powers: &[i32]) -> Option<(Vec<f64>, f64)> {
    let (n, m) = (xs.len(), powers.len());
    let mut a = DMatrix::<f64>::zeros(n, m);
    let mut norms = vec![0.0; m];
    for (c, k) in powers.iter().enumerate() {
        for (r, x) in xs.iter().enumerate() {
            a[(r, c)] = x.powi(*k);
        }
        norms[c] = a.column(c).norm();
        if norms[c] == 0.0 || !norms[c].is_finite() {
            return None;
        }
        a.column_mut(c).scale_mut(1.0 / norms[c]);
    }
    let b = DVector::from_column_slice(ys);
    let sol = a.clone().svd(true, true).solve(&b, 1e-14).ok()?;
    let res = (&a * &sol - &b).amax();
    let coef = sol.iter().zip(&norms).map(|(s, nrm)| s / nrm).collect();
    Some((coef, res))
}

fn round_sig(v: f64) -> f64 {
    if v == 0.0 {
        return 0.0;
    }
    let mag = 10f64.powi(9 - v.abs().log10().floor() as i32);
    (v * mag).round() / mag
}

/// Closed form of a sampled field whose slices share one monomial fit.
pub fn recognize(v: &RealField) -> Option<Expr> {
    let g = v.grid;
    let xs = g.xs();
    let slices = [0, g.n_t / 2, g.n_t - 1];
    let first = fit_monomials(&xs, v.row(0))?;
    for &j in &slices[1..] {
        let other = fit_monomials(&xs, v.row(j))?;
        if other.len() != first.len() {
            return None;
        }
        for (a, b) in first.iter().zip(&other) {
            if a.power != b.power || (a.coefficient - b.coefficient).abs() > 1e-8 * a.coefficient.abs().max(1.0) {
                return None;
            }
        }
    }
    let terms: Vec<Expr> = first
        .iter()
        .map(|m| Expr::Num(round_sig(m.coefficient)) * Expr::X.powi(m.power))
        .collect();
    Some(if terms.is_empty() { Expr::Num(0.0) } else { Expr::Add(terms).simplify() })
}
