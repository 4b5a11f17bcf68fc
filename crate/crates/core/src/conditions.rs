//! Pointwise residuals of the integrability conditions.
//!
//! Every condition is assembled as a list of monomials so that the report can
//! carry the magnitude of the largest single term as its normalization.

use crate::error::{Error, Result};
use crate::expr::{Expr, Params, Var};
use crate::grid::{fd_x, GridSpec, RealField};
use crate::report::ResidualReport;
use crate::sample::{cumint_expr, require_nonzero, require_time_only, sample, sample_jet};

/// The potential either as an expression or as grid samples (with an
/// optional exact first derivative from the construction).
#[derive(Debug, Clone, PartialEq)]
pub enum Potential {
    Analytic(Expr),
    Sampled { v: RealField, v_x: Option<RealField> },
}

impl Potential {
    /// `(v, v_x, v_xx)` on the grid.
    pub fn sample(&self, params: &Params, grid: &GridSpec) -> Result<[RealField; 3]> {
        match self {
            Potential::Analytic(e) => {
                let j = sample_jet(e, Var::X, 2, params, grid)?;
                let [v, vx, vxx]: [RealField; 3] = j.try_into().unwrap();
                Ok([v, vx, vxx])
            }
            Potential::Sampled { v, v_x } => {
                if v.grid != *grid {
                    return Err(Error::Precondition("sampled potential lives on a different grid".into()));
                }
                if grid.n_x < 6 {
                    return Err(Error::Precondition("sampled potential needs n_x >= 6".into()));
                }
                match v_x {
                    Some(vx) => {
                        if vx.grid != *grid {
                            return Err(Error::Precondition("sampled v_x lives on a different grid".into()));
                        }
                        Ok([v.clone(), vx.clone(), fd_x(vx, 1)])
                    }
                    None => Ok([v.clone(), fd_x(v, 1), fd_x(v, 2)]),
                }
            }
        }
    }

    pub fn as_expr(&self) -> Option<&Expr> {
        match self {
            Potential::Analytic(e) => Some(e),
            Potential::Sampled { .. } => None,
        }
    }
}

/// Coefficients of the equation `fΨ_xx + hΨ_x + g|Ψ|²Ψ + vΨ + iγΨ + iΨ_t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSet {
    pub f: Expr,
    pub g: Expr,
    pub gamma: Expr,
    pub v: Potential,
    pub h: Option<Expr>,
    pub params: Params,
}

impl CoefficientSet {
    pub fn new(f: Expr, g: Expr, gamma: Expr, v: Expr) -> Self {
        CoefficientSet { f, g, gamma, v: Potential::Analytic(v), h: None, params: Params::new() }
    }

    pub fn with_h(mut self, h: Expr) -> Self {
        self.h = Some(h);
        self
    }

    pub fn with_params(mut self, params: Params) -> Self {
        self.params = params;
        self
    }

    /// True when `h` is absent or identically zero.
    pub fn is_flat(&self) -> bool {
        self.h.as_ref().is_none_or(|h| h.simplify().is_zero())
    }
}

/// Time-only quadratic potential `v0 + v1·x + v2·x²`.
#[derive(Debug, Clone, PartialEq)]
pub struct PainleveQuadratic {
    pub v0: Expr,
    pub v1: Expr,
    pub v2: Expr,
}

impl PainleveQuadratic {
    pub fn new(v0: Expr, v1: Expr, v2: Expr) -> Result<Self> {
        require_time_only("v0", &v0)?;
        require_time_only("v1", &v1)?;
        require_time_only("v2", &v2)?;
        Ok(PainleveQuadratic { v0, v1, v2 })
    }

    pub fn to_expr(&self) -> Expr {
        (self.v0.clone() + self.v1.clone() * Expr::X + self.v2.clone() * Expr::X.powi(2)).simplify()
    }
}

/// Sum the terms at every grid point; track the largest term.
fn assemble<const N: usize>(
    name: &str,
    grid: &GridSpec,
    tol: f64,
    terms: impl Fn(usize) -> [f64; N],
) -> ResidualReport {
    let mut r = RealField::filled(*grid, 0.0);
    let mut s = RealField::filled(*grid, 0.0);
    for k in 0..grid.len() {
        let t = terms(k);
        let mut sum = 0.0;
        let mut big: f64 = 0.0;
        for v in t {
            sum += v;
            big = big.max(v.abs());
        }
        r.data[k] = sum;
        s.data[k] = big;
    }
    ResidualReport::from_samples(name, &r, Some(&s), tol)
}

/// `f·g² − c1`.
pub fn residual_fg(c: &CoefficientSet, c1: &Expr, grid: &GridSpec, tol: f64) -> Result<ResidualReport> {
    require_time_only("c1", c1)?;
    let f = sample(&c.f, &c.params, grid)?;
    let g = sample(&c.g, &c.params, grid)?;
    require_nonzero("g", &g)?;
    let c1 = sample(c1, &c.params, grid)?;
    Ok(assemble("fg", grid, tol, |k| [f.data[k] * g.data[k] * g.data[k], -c1.data[k]]))
}

/// `γ − g_t/g + ċ2/(2c2)`.
pub fn residual_gamma(c: &CoefficientSet, c2: &Expr, grid: &GridSpec, tol: f64) -> Result<ResidualReport> {
    gamma_terms("gamma", c, c2, None, grid, tol)
}

fn gamma_terms(
    name: &str,
    c: &CoefficientSet,
    c2: &Expr,
    ht_over_h: Option<&RealField>,
    grid: &GridSpec,
    tol: f64,
) -> Result<ResidualReport> {
    require_time_only("c2", c2)?;
    let g = sample_jet(&c.g, Var::T, 1, &c.params, grid)?;
    require_nonzero("g", &g[0])?;
    let c2 = sample_jet(c2, Var::T, 1, &c.params, grid)?;
    require_nonzero("c2", &c2[0])?;
    let gamma = sample(&c.gamma, &c.params, grid)?;
    Ok(assemble(name, grid, tol, |k| {
        [
            gamma.data[k],
            -g[1].data[k] / g[0].data[k],
            0.5 * c2[1].data[k] / c2[0].data[k],
            ht_over_h.map_or(0.0, |r| 0.25 * r.data[k]),
        ]
    }))
}

/// Derivatives of `f`, `g`, `γ`, `v` entering the potential condition.
struct Jets {
    f: Vec<RealField>,
    g_t: Vec<RealField>,
    g_x: Vec<RealField>,
    gamma: Vec<RealField>,
    v: [RealField; 3],
}

fn jets(c: &CoefficientSet, grid: &GridSpec) -> Result<Jets> {
    let f = sample_jet(&c.f, Var::T, 2, &c.params, grid)?;
    require_nonzero("f", &f[0])?;
    let g_t = sample_jet(&c.g, Var::T, 2, &c.params, grid)?;
    require_nonzero("g", &g_t[0])?;
    let g_x = sample_jet(&c.g, Var::X, 4, &c.params, grid)?;
    let gamma = sample_jet(&c.gamma, Var::T, 1, &c.params, grid)?;
    let v = c.v.sample(&c.params, grid)?;
    Ok(Jets { f, g_t, g_x, gamma, v })
}

fn flat_terms(j: &Jets, k: usize) -> [f64; 16] {
    let (f, ft, ftt) = (j.f[0].data[k], j.f[1].data[k], j.f[2].data[k]);
    let (g, gt, gtt) = (j.g_t[0].data[k], j.g_t[1].data[k], j.g_t[2].data[k]);
    let (gx, gxx, gxxx, gxxxx) = (j.g_x[1].data[k], j.g_x[2].data[k], j.g_x[3].data[k], j.g_x[4].data[k]);
    let (ga, gat) = (j.gamma[0].data[k], j.gamma[1].data[k]);
    let (vx, vxx) = (j.v[1].data[k], j.v[2].data[k]);
    let (f2, f3, f4) = (f * f, f * f * f, f * f * f * f);
    let (g2, g3, g4) = (g * g, g * g * g, g * g * g * g);
    [
        2.0 * f3 * g4 * vxx,
        -2.0 * f3 * g3 * gx * vx,
        f * g3 * ft * gt,
        -2.0 * f * g4 * ft * ga,
        -f * g4 * ftt,
        ft * ft * g4,
        4.0 * f2 * g3 * gt * ga,
        f2 * g3 * gtt,
        -2.0 * f2 * g2 * gt * gt,
        -2.0 * f2 * g4 * gat,
        -4.0 * f2 * g4 * ga * ga,
        36.0 * f4 * gx.powi(4),
        -48.0 * f4 * g * gxx * gx * gx,
        10.0 * f4 * g2 * gxxx * gx,
        6.0 * f4 * g2 * gxx * gxx,
        -f4 * g3 * gxxxx,
    ]
}

/// Left side of the potential condition (no drift term).
pub fn residual_v(c: &CoefficientSet, grid: &GridSpec, tol: f64) -> Result<ResidualReport> {
    let j = jets(c, grid)?;
    Ok(assemble("v", grid, tol, |k| flat_terms(&j, k)))
}

/// The `v`-free part `S` of the potential condition, so that the condition
/// reads `2f³g³(g·v_xx − g_x·v_x) + S = 0`. Also returns `f` and `g`.
pub(crate) fn potential_source(c: &CoefficientSet, grid: &GridSpec) -> Result<[RealField; 3]> {
    let mut c = c.clone();
    c.v = Potential::Analytic(Expr::Num(0.0));
    let j = jets(&c, grid)?;
    let mut s = RealField::filled(*grid, 0.0);
    for k in 0..grid.len() {
        s.data[k] = flat_terms(&j, k)[2..].iter().sum();
    }
    Ok([s, j.f[0].clone(), j.g_t[0].clone()])
}

/// `4f³g²v2 + fg(ḟġ + fg̈) + g²(ḟ² − ff̈) − 2f²ġ²` for time-only inputs.
pub fn residual_painleve(f: &Expr, g: &Expr, v2: &Expr, params: &Params, grid: &GridSpec, tol: f64) -> Result<ResidualReport> {
    require_time_only("f", f)?;
    require_time_only("g", g)?;
    require_time_only("v2", v2)?;
    let f = sample_jet(f, Var::T, 2, params, grid)?;
    let g = sample_jet(g, Var::T, 2, params, grid)?;
    let v2 = sample(v2, params, grid)?;
    Ok(assemble("painleve", grid, tol, |k| {
        let (f, ft, ftt) = (f[0].data[k], f[1].data[k], f[2].data[k]);
        let (g, gt, gtt) = (g[0].data[k], g[1].data[k], g[2].data[k]);
        [
            4.0 * f * f * f * g * g * v2.data[k],
            f * g * ft * gt,
            f * f * g * gtt,
            g * g * ft * ft,
            -g * g * f * ftt,
            -2.0 * f * f * gt * gt,
        ]
    }))
}

/// Drift weight `H = exp(∫ 2h/f dx)` with `H(x_min, t) = 1`, together with
/// the exact ratios `H_x/H`, `H_xx/H`, `H_xxx/H` and `H_t/H`; the integrals of
/// `η = 2h/f` use Gauss–Legendre cells on the analytic `η`.
pub struct DriftWeight {
    pub h: RealField,
    pub ratios: [RealField; 3],
    pub ht_over_h: RealField,
}

fn eta(c: &CoefficientSet) -> Expr {
    let h = c.h.clone().unwrap_or(Expr::Num(0.0));
    (Expr::Num(2.0) * h / c.f.clone()).simplify()
}

pub fn drift_weight(c: &CoefficientSet, grid: &GridSpec) -> Result<DriftWeight> {
    let f = sample(&c.f, &c.params, grid)?;
    require_nonzero("f", &f)?;
    let eta = eta(c);
    let e = sample_jet(&eta, Var::X, 2, &c.params, grid)?;
    let log_h = cumint_expr(&eta, &c.params, grid)?;
    let mut h = log_h.map(f64::exp);
    if let Some(k) = h.data.iter().position(|v| !v.is_finite() || *v == 0.0) {
        return Err(Error::Singular {
            what: "H overflows".into(),
            x: grid.x(k % grid.n_x),
            t: grid.t(k / grid.n_x),
        });
    }
    h.grid = *grid;
    let r1 = e[0].clone();
    let r2 = e[1].zip_map(&e[0], |ex, e0| ex + e0 * e0);
    let mut r3 = e[2].clone();
    for k in 0..r3.data.len() {
        let (e0, e1) = (e[0].data[k], e[1].data[k]);
        r3.data[k] += 3.0 * e0 * e1 + e0 * e0 * e0;
    }
    let ht_over_h = cumint_expr(&eta.derivative(Var::T)?, &c.params, grid)?;
    Ok(DriftWeight { h, ratios: [r1, r2, r3], ht_over_h })
}

/// `H` alone.
pub fn compute_h(c: &CoefficientSet, grid: &GridSpec) -> Result<RealField> {
    if c.h.is_none() {
        return Err(Error::Precondition("compute_h needs a drift coefficient h".into()));
    }
    Ok(drift_weight(c, grid)?.h)
}

/// `f·g² − c1·H`.
pub fn residual_fg_hd(c: &CoefficientSet, c1: &Expr, grid: &GridSpec, tol: f64) -> Result<ResidualReport> {
    require_time_only("c1", c1)?;
    let w = drift_weight(c, grid)?;
    let f = sample(&c.f, &c.params, grid)?;
    let g = sample(&c.g, &c.params, grid)?;
    require_nonzero("g", &g)?;
    let c1 = sample(c1, &c.params, grid)?;
    Ok(assemble("fg_hd", grid, tol, |k| [f.data[k] * g.data[k] * g.data[k], -c1.data[k] * w.h.data[k]]))
}

/// `γ − g_t/g + ċ2/(2c2) + H_t/(4H)`.
pub fn residual_gamma_hd(c: &CoefficientSet, c2: &Expr, grid: &GridSpec, tol: f64) -> Result<ResidualReport> {
    let w = drift_weight(c, grid)?;
    gamma_terms("gamma_hd", c, c2, Some(&w.ht_over_h), grid, tol)
}

/// Potential condition with drift, exactly as printed (an overall factor 4
/// relative to [`residual_v`] when `h ≡ 0`).
pub fn residual_v_hd(c: &CoefficientSet, grid: &GridSpec, tol: f64) -> Result<ResidualReport> {
    let j = jets(c, grid)?;
    let w = drift_weight(c, grid)?;
    Ok(assemble("v_hd", grid, tol, |k| hd_terms(&j, &w, k)))
}

/// Signed pointwise value of the potential condition.
pub fn residual_v_field(c: &CoefficientSet, grid: &GridSpec) -> Result<RealField> {
    let j = jets(c, grid)?;
    Ok(sum_field(grid, |k| flat_terms(&j, k)))
}

/// Signed pointwise value of the potential condition with drift.
pub fn residual_v_hd_field(c: &CoefficientSet, grid: &GridSpec) -> Result<RealField> {
    let j = jets(c, grid)?;
    let w = drift_weight(c, grid)?;
    Ok(sum_field(grid, |k| hd_terms(&j, &w, k)))
}

fn sum_field<const N: usize>(grid: &GridSpec, terms: impl Fn(usize) -> [f64; N]) -> RealField {
    let mut r = RealField::filled(*grid, 0.0);
    for k in 0..grid.len() {
        r.data[k] = terms(k).iter().sum();
    }
    r
}

fn hd_terms(j: &Jets, w: &DriftWeight, k: usize) -> [f64; 26] {
    let (f, ft, ftt) = (j.f[0].data[k], j.f[1].data[k], j.f[2].data[k]);
    let (g, gt, gtt) = (j.g_t[0].data[k], j.g_t[1].data[k], j.g_t[2].data[k]);
    let (gx, gxx, gxxx, gxxxx) = (j.g_x[1].data[k], j.g_x[2].data[k], j.g_x[3].data[k], j.g_x[4].data[k]);
    let (ga, gat) = (j.gamma[0].data[k], j.gamma[1].data[k]);
    let (vx, vxx) = (j.v[1].data[k], j.v[2].data[k]);
    let (r1, r2, r3) = (w.ratios[0].data[k], w.ratios[1].data[k], w.ratios[2].data[k]);
    let hh = w.h.data[k] * w.h.data[k];
    let (f2, f3, f4) = (f * f, f * f * f, f * f * f * f);
    let (g2, g3, g4) = (g * g, g * g * g, g * g * g * g);
    [
        -8.0 * f * g4 * ft * ga * hh,
        4.0 * f * g3 * ft * gt * hh,
        -4.0 * f * g4 * ftt * hh,
        4.0 * ft * ft * g4 * hh,
        4.0 * f3 * g4 * vx * r1 * hh,
        -8.0 * f3 * g3 * gx * vx * hh,
        8.0 * f3 * g4 * vxx * hh,
        -3.0 * f4 * g3 * gxx * r1 * r1 * hh,
        6.0 * f4 * g2 * gx * gx * r1 * r1 * hh,
        -f4 * g3 * gx * r1 * r2 * hh,
        -96.0 * f4 * g * gx * gx * gx * r1 * hh,
        20.0 * f4 * g2 * gx * gx * r2 * hh,
        -2.0 * f4 * g3 * gx * r3 * hh,
        84.0 * f4 * g2 * gx * gxx * r1 * hh,
        -8.0 * f4 * g3 * gxx * r2 * hh,
        -12.0 * f4 * g3 * gxxx * r1 * hh,
        144.0 * f4 * gx.powi(4) * hh,
        -192.0 * f4 * g * gxx * gx * gx * hh,
        40.0 * f4 * g2 * gxxx * gx * hh,
        24.0 * f4 * g2 * gxx * gxx * hh,
        -4.0 * f4 * g3 * gxxxx * hh,
        16.0 * f2 * g3 * gt * ga * hh,
        4.0 * f2 * g3 * gtt * hh,
        -8.0 * f2 * g2 * gt * gt * hh,
        -8.0 * f2 * g4 * gat * hh,
        -16.0 * f2 * g4 * ga * ga * hh,
    ]
}

/// Residuals appropriate for the set: flat conditions when `h ≡ 0`, the
/// drift versions otherwise; the time-only check is added when `f`, `g`,
/// `γ = 0` and a quadratic analytic `v` depend on `t` only.
pub fn check_all(c: &CoefficientSet, c1: &Expr, c2: &Expr, grid: &GridSpec, tol: f64, v_tol: f64) -> Result<Vec<ResidualReport>> {
    let mut out = Vec::new();
    if c.is_flat() {
        out.push(residual_fg(c, c1, grid, tol)?);
        out.push(residual_gamma(c, c2, grid, tol)?);
        out.push(residual_v(c, grid, v_tol)?);
    } else {
        out.push(residual_fg_hd(c, c1, grid, tol)?);
        out.push(residual_gamma_hd(c, c2, grid, tol)?);
        out.push(residual_v_hd(c, grid, v_tol)?);
    }
    if let Some(v2) = time_only_quadratic(c) {
        out.push(residual_painleve(&c.f, &c.g, &v2, &c.params, grid, tol)?);
    }
    Ok(out)
}

/// `v2` when the set is time-only with `γ ≡ 0` and `v` quadratic in `x`.
fn time_only_quadratic(c: &CoefficientSet) -> Option<Expr> {
    let t_only = |e: &Expr| !e.simplify().depends_on(Var::X);
    if !(c.is_flat() && t_only(&c.f) && t_only(&c.g) && c.gamma.simplify().is_zero()) {
        return None;
    }
    let v = c.v.as_expr()?;
    let v3 = crate::expr::diff(v, Var::X, 3).ok()?;
    if !v3.is_zero() {
        return None;
    }
    let v2 = (Expr::Num(0.5) * crate::expr::diff(v, Var::X, 2).ok()?).simplify();
    t_only(&v2).then_some(v2)
}
