//! Similarity transformation `Ψ = e^{β+iθ} Q(X)` onto `εQ_XX + δ|Q|²Q = 0`.
//!
//! All `x`-integrals start at `x_min`; the resulting shifts of `X` and `θ`
//! are absorbed by `c1(t)` and `c_θ(t)`.

use crate::error::{Error, Result};
use crate::expr::{ComplexExpr, Expr, Params, Var};
use crate::grid::{cumint, fd_t, fd_x, ComplexField, GridSpec, RealField};
use crate::report::ResidualReport;
use crate::sample::{require_nonzero, require_time_only, sample, sample_jet};
use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct GaugeSpec {
    pub beta: Expr,
    pub gamma: Expr,
    pub c1: Expr,
    pub c2: Expr,
    pub c_theta: Expr,
    pub c_f: Expr,
    pub epsilon: f64,
    pub delta: f64,
    pub c8: f64,
    pub params: Params,
}

impl GaugeSpec {
    /// `β = 0`, `γ = 0`, `X = x − x_min`, `θ = 0`.
    pub fn identity() -> GaugeSpec {
        GaugeSpec {
            beta: Expr::Num(0.0),
            gamma: Expr::Num(0.0),
            c1: Expr::Num(0.0),
            c2: Expr::Num(1.0),
            c_theta: Expr::Num(0.0),
            c_f: Expr::Num(1.0),
            epsilon: 1.0,
            delta: 1.0,
            c8: 1.0,
            params: Params::new(),
        }
    }

    pub fn validate(&self, grid: &GridSpec) -> Result<()> {
        if self.epsilon == 0.0 || self.delta == 0.0 {
            return Err(Error::Precondition("epsilon and delta must be nonzero".into()));
        }
        for (name, e) in [("c1", &self.c1), ("c2", &self.c2), ("c_theta", &self.c_theta), ("c_f", &self.c_f)] {
            require_time_only(name, e)?;
        }
        let c2 = sample(&self.c2, &self.params, grid)?;
        require_nonzero("c2", &c2)?;
        let first = c2.data[0].signum();
        if c2.data.iter().any(|v| v.signum() != first) {
            return Err(Error::Precondition("c2 changes sign on the grid".into()));
        }
        Ok(())
    }
}

/// Fields shared by the gauge formulas on one grid.
struct Core {
    beta: [RealField; 3],
    beta_t: RealField,
    /// `e^{−2β}`
    e: RealField,
    /// `∫ e^{−2β} dx`, `∫ ∂_t e^{−2β} dx`
    int_e: RealField,
    int_e_t: RealField,
    c1: [RealField; 3],
    c2: [RealField; 3],
    /// `A = ∫ e^{−2β}(ċ2 − 2c2β_t) dx + ċ1`, its integrand `I` and `A_t`.
    a: RealField,
    i: RealField,
    a_t: RealField,
}

fn rowwise(grid: &GridSpec, src: &RealField) -> RealField {
    let mut out = RealField::filled(*grid, 0.0);
    for j in 0..grid.n_t {
        out.row_mut(j).copy_from_slice(&cumint(src.row(j), grid.dx()));
    }
    out
}

fn core(gs: &GaugeSpec, grid: &GridSpec) -> Result<Core> {
    gs.validate(grid)?;
    let p = &gs.params;
    let beta = sample_jet(&gs.beta, Var::X, 2, p, grid)?;
    let beta_t_e = gs.beta.derivative(Var::T)?;
    let beta_t = sample(&beta_t_e, p, grid)?;
    let beta_tt = sample(&beta_t_e.derivative(Var::T)?, p, grid)?;
    let c1 = sample_jet(&gs.c1, Var::T, 2, p, grid)?;
    let c2 = sample_jet(&gs.c2, Var::T, 2, p, grid)?;
    let e = beta[0].map(|b| (-2.0 * b).exp());
    if let Some(k) = e.data.iter().position(|v| !v.is_finite() || *v == 0.0) {
        return Err(Error::Singular { what: "exp(-2β) overflows".into(), x: grid.x(k % grid.n_x), t: grid.t(k / grid.n_x) });
    }
    let e_t = e.zip_map(&beta_t, |e, bt| -2.0 * bt * e);
    let int_e = rowwise(grid, &e);
    let int_e_t = rowwise(grid, &e_t);
    let mut i = RealField::filled(*grid, 0.0);
    let mut i_t = RealField::filled(*grid, 0.0);
    for k in 0..grid.len() {
        let (ek, bt, btt) = (e.data[k], beta_t.data[k], beta_tt.data[k]);
        let (c2v, c2d, c2dd) = (c2[0].data[k], c2[1].data[k], c2[2].data[k]);
        i.data[k] = ek * (c2d - 2.0 * c2v * bt);
        i_t.data[k] = -2.0 * bt * i.data[k] + ek * (c2dd - 2.0 * c2d * bt - 2.0 * c2v * btt);
    }
    let mut a = rowwise(grid, &i);
    let mut a_t = rowwise(grid, &i_t);
    for k in 0..grid.len() {
        a.data[k] += c1[1].data[k];
        a_t.data[k] += c1[2].data[k];
    }
    let [c1a, c1b, c1c]: [RealField; 3] = c1.try_into().unwrap();
    let [c2a, c2b, c2c]: [RealField; 3] = c2.try_into().unwrap();
    let [b0, b1, b2]: [RealField; 3] = beta.try_into().unwrap();
    Ok(Core { beta: [b0, b1, b2], beta_t, e, int_e, int_e_t, c1: [c1a, c1b, c1c], c2: [c2a, c2b, c2c], a, i, a_t })
}

/// `X = c1 + c2·∫ e^{−2β} dx`.
pub fn compute_x(gs: &GaugeSpec, grid: &GridSpec) -> Result<RealField> {
    let c = core(gs, grid)?;
    Ok(x_from(&c))
}

fn x_from(c: &Core) -> RealField {
    let mut x = c.int_e.clone();
    for k in 0..x.data.len() {
        x.data[k] = c.c1[0].data[k] + c.c2[0].data[k] * c.int_e.data[k];
    }
    x
}

/// `g = (δ/ε)·c2²·e^{−6β}·f`.
pub fn compute_g(gs: &GaugeSpec, f: &Expr, grid: &GridSpec) -> Result<RealField> {
    gs.validate(grid)?;
    let beta = sample(&gs.beta, &gs.params, grid)?;
    let c2 = sample(&gs.c2, &gs.params, grid)?;
    let f = sample(f, &gs.params, grid)?;
    let mut g = f.clone();
    for k in 0..g.data.len() {
        g.data[k] = gs.delta / gs.epsilon * c2.data[k].powi(2) * (-6.0 * beta.data[k]).exp() * f.data[k];
    }
    Ok(g)
}

/// The closed form of `g` for an analytic `f`.
pub fn g_expr(gs: &GaugeSpec, f: &Expr) -> Expr {
    (Expr::Num(gs.delta / gs.epsilon) * gs.c2.clone().powi(2) * (Expr::Num(-6.0) * gs.beta.clone()).exp() * f.clone()).simplify()
}

/// `f = c_f·exp(∫ [4β_x + e^{−2β}(ċ2 − 4c2β_t − 2c2γ)/A] dx)`.
pub fn compute_f(gs: &GaugeSpec, grid: &GridSpec) -> Result<RealField> {
    let c = core(gs, grid)?;
    let gamma = sample(&gs.gamma, &gs.params, grid)?;
    let c_f = sample(&gs.c_f, &gs.params, grid)?;
    let mut integrand = RealField::filled(*grid, 0.0);
    for j in 0..grid.n_t {
        let row = c.a.row(j);
        let s0 = row[0].signum();
        if let Some(i) = row.iter().position(|v| *v == 0.0 || v.signum() != s0) {
            return Err(Error::Singular {
                what: "singular gauge: the inner integral vanishes".into(),
                x: grid.x(i),
                t: grid.t(j),
            });
        }
    }
    for k in 0..grid.len() {
        let (c2v, c2d) = (c.c2[0].data[k], c.c2[1].data[k]);
        integrand.data[k] = 4.0 * c.beta[1].data[k]
            + c.e.data[k] * (c2d - 4.0 * c2v * c.beta_t.data[k] - 2.0 * c2v * gamma.data[k]) / c.a.data[k];
    }
    let log_f = rowwise(grid, &integrand);
    let mut f = log_f.zip_map(&c_f, |l, cf| cf * l.exp());
    f.grid = *grid;
    f.check_finite()?;
    Ok(f)
}

/// `f` and its first derivatives, analytic when possible.
struct FJet {
    f: RealField,
    f_x: RealField,
    f_t: RealField,
}

fn f_jet(gs: &GaugeSpec, f: Option<&Expr>, grid: &GridSpec) -> Result<FJet> {
    match f {
        Some(e) => {
            let fx = sample_jet(e, Var::X, 1, &gs.params, grid)?;
            let f_t = sample(&e.derivative(Var::T)?, &gs.params, grid)?;
            let [f, f_x]: [RealField; 2] = fx.try_into().unwrap();
            require_nonzero("f", &f)?;
            Ok(FJet { f, f_x, f_t })
        }
        None => {
            if grid.n_x < 6 || grid.n_t < 6 {
                return Err(Error::Precondition("a quadrature-valued f needs n_x, n_t >= 6".into()));
            }
            let f = compute_f(gs, grid)?;
            require_nonzero("f", &f)?;
            Ok(FJet { f_x: fd_x(&f, 1), f_t: fd_t(&f, 1), f })
        }
    }
}

/// `θ` with `θ_x`, `θ_xx`, `θ_t`.
pub struct Phase {
    pub theta: RealField,
    pub theta_x: RealField,
    pub theta_xx: RealField,
    pub theta_t: RealField,
}

fn phase(gs: &GaugeSpec, c: &Core, fj: &FJet, grid: &GridSpec) -> Result<Phase> {
    let cth = sample_jet(&gs.c_theta, Var::T, 1, &gs.params, grid)?;
    let n = grid.len();
    let (mut tx, mut txx, mut dt_integrand) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for k in 0..n {
        let (c2v, c2d) = (c.c2[0].data[k], c.c2[1].data[k]);
        let (f, fx, ft) = (fj.f.data[k], fj.f_x.data[k], fj.f_t.data[k]);
        let kk = 1.0 / (c.e.data[k] * 2.0 * c2v * f);
        let k_x = kk * (2.0 * c.beta[1].data[k] - fx / f);
        let k_t = kk * (2.0 * c.beta_t.data[k] - c2d / c2v - ft / f);
        let a = c.a.data[k];
        tx[k] = -kk * a;
        txx[k] = -(k_x * a + kk * c.i.data[k]);
        dt_integrand[k] = -(k_t * a + kk * c.a_t.data[k]);
    }
    let theta_x = RealField::new(*grid, tx)?;
    let theta_xx = RealField::new(*grid, txx)?;
    let mut theta = rowwise(grid, &theta_x);
    let mut theta_t = rowwise(grid, &RealField::new(*grid, dt_integrand)?);
    for k in 0..n {
        theta.data[k] += cth[0].data[k];
        theta_t.data[k] += cth[1].data[k];
    }
    theta.check_finite()?;
    Ok(Phase { theta, theta_x, theta_xx, theta_t })
}

/// `θ = −∫ e^{2β}(∫ e^{−2β}(ċ2 − 2c2β_t) dx + ċ1)/(2c2 f) dx + c_θ`.
pub fn compute_theta(gs: &GaugeSpec, f: Option<&Expr>, grid: &GridSpec) -> Result<RealField> {
    let c = core(gs, grid)?;
    let fj = f_jet(gs, f, grid)?;
    Ok(phase(gs, &c, &fj, grid)?.theta)
}

/// `v = θ_t − f(β_x² − θ_x² + β_xx)`. `θ` derivatives come from
/// differentiating the quadrature formulas under the integral sign.
pub fn compute_v(gs: &GaugeSpec, f: Option<&Expr>, grid: &GridSpec) -> Result<RealField> {
    Ok(transform(gs, f, None, grid)?.v)
}

#[derive(Debug, Clone)]
pub struct TransformResult {
    pub x: RealField,
    pub theta: RealField,
    pub f: RealField,
    pub g: RealField,
    pub v: RealField,
    pub p: ComplexField,
    /// Closed forms when `f` is analytic.
    pub f_expr: Option<Expr>,
    pub g_expr: Option<Expr>,
}

/// Everything the gauge determines. `g` defaults to the compatible one; a
/// supplied `g` is used as is, so that the consistency checks test it.
pub fn transform(gs: &GaugeSpec, f: Option<&Expr>, g: Option<&Expr>, grid: &GridSpec) -> Result<TransformResult> {
    let c = core(gs, grid)?;
    let fj = f_jet(gs, f, grid)?;
    let ph = phase(gs, &c, &fj, grid)?;
    let mut v = RealField::filled(*grid, 0.0);
    for k in 0..grid.len() {
        let (bx, bxx) = (c.beta[1].data[k], c.beta[2].data[k]);
        let tx = ph.theta_x.data[k];
        v.data[k] = ph.theta_t.data[k] - fj.f.data[k] * (bx * bx - tx * tx + bxx);
    }
    let g_expr = match (g, f) {
        (Some(g), _) => Some(g.clone()),
        (None, Some(f)) => Some(g_expr(gs, f)),
        (None, None) => None,
    };
    let g = match &g_expr {
        Some(e) => sample(e, &gs.params, grid)?,
        None => {
            let mut g = fj.f.clone();
            for k in 0..g.data.len() {
                g.data[k] = gs.delta / gs.epsilon * c.c2[0].data[k].powi(2) * c.e.data[k].powi(3) * fj.f.data[k];
            }
            g
        }
    };
    let p = g.zip_map(&c.e, |g, e| Complex64::new(g / (e * gs.delta), 0.0));
    Ok(TransformResult {
        x: x_from(&c),
        theta: ph.theta,
        f: fj.f,
        g,
        v,
        p,
        f_expr: f.cloned(),
        g_expr,
    })
}

/// The five reduction equations on the grid. `X` and `θ` derivatives are
/// finite differences of their samples (in `t` only when `n_t ≥ 6`).
pub fn consistency(gs: &GaugeSpec, tr: &TransformResult, grid: &GridSpec, tol: f64) -> Result<Vec<ResidualReport>> {
    if grid.n_x < 6 {
        return Err(Error::Precondition("consistency checks need n_x >= 6".into()));
    }
    let c = core(gs, grid)?;
    let gamma = sample(&gs.gamma, &gs.params, grid)?;
    let x_x = fd_x(&tr.x, 1);
    let x_xx = fd_x(&tr.x, 2);
    let x_t = if grid.n_t >= 6 {
        fd_t(&tr.x, 1)
    } else {
        let mut xt = c.int_e.clone();
        for k in 0..xt.data.len() {
            xt.data[k] = c.c1[1].data[k] + c.c2[1].data[k] * c.int_e.data[k] + c.c2[0].data[k] * c.int_e_t.data[k];
        }
        xt
    };
    let th_x = fd_x(&tr.theta, 1);
    let th_xx = fd_x(&tr.theta, 2);
    let n = grid.len();
    let mut out = Vec::new();
    let mut push = |name: &str, terms: &dyn Fn(usize) -> Vec<f64>| {
        let mut r = RealField::filled(*grid, 0.0);
        let mut s = RealField::filled(*grid, 0.0);
        for k in 0..n {
            let t = terms(k);
            r.data[k] = t.iter().sum();
            s.data[k] = t.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        }
        out.push(ResidualReport::from_samples(name, &r, Some(&s), tol));
    };
    let e2b = |k: usize| 1.0 / c.e.data[k];
    push("p_nonlinearity", &|k| vec![e2b(k) * tr.g.data[k], -gs.delta * tr.p.data[k].re]);
    push("p_dispersion", &|k| vec![tr.f.data[k] * x_x.data[k].powi(2), -gs.epsilon * tr.p.data[k].re]);
    push("x_transport", &|k| vec![x_t.data[k], 2.0 * tr.f.data[k] * x_x.data[k] * th_x.data[k]]);
    push("x_curvature", &|k| vec![2.0 * x_x.data[k] * c.beta[1].data[k], x_xx.data[k]]);
    push("gain_balance", &|k| {
        vec![
            c.beta_t.data[k],
            gamma.data[k],
            2.0 * tr.f.data[k] * c.beta[1].data[k] * th_x.data[k],
            tr.f.data[k] * th_xx.data[k],
        ]
    });
    Ok(out)
}

/// `Ψ = e^{β+iθ}·Q(X)`; in `q` the variable `x` stands for `X`.
pub fn map_solution(gs: &GaugeSpec, q: &ComplexExpr, tr: &TransformResult, grid: &GridSpec) -> Result<ComplexField> {
    if q.re.depends_on(Var::T) || q.im.depends_on(Var::T) {
        return Err(Error::Precondition("Q must depend on X only".into()));
    }
    let beta = sample(&gs.beta, &gs.params, grid)?;
    let qre = q.re.compile(&gs.params)?;
    let qim = q.im.compile(&gs.params)?;
    let mut stack = Vec::new();
    let mut data = Vec::with_capacity(grid.len());
    for k in 0..grid.len() {
        let xx = tr.x.data[k];
        let qv = Complex64::new(qre.eval_with(&mut stack, xx, 0.0)?, qim.eval_with(&mut stack, xx, 0.0)?);
        data.push(Complex64::from_polar(beta.data[k].exp(), tr.theta.data[k]) * qv);
    }
    Ok(ComplexField::new(*grid, data)?)
}

/// `εQ_XX + δ|Q|²Q` on `n` points of `[x_lo, x_hi]` (variable `x` is `X`).
#[allow(clippy::too_many_arguments)]
pub fn check_homogeneous(q: &ComplexExpr, epsilon: f64, delta: f64, x_lo: f64, x_hi: f64, n: usize, params: &Params, tol: f64) -> Result<ResidualReport> {
    let grid = GridSpec::new(x_lo, x_hi, n, 0.0, 0.0, 1)?;
    let qxx = ComplexExpr::new(crate::expr::diff(&q.re, Var::X, 2)?, crate::expr::diff(&q.im, Var::X, 2)?);
    let (re, im) = (sample(&q.re, params, &grid)?, sample(&q.im, params, &grid)?);
    let (rxx, ixx) = (sample(&qxx.re, params, &grid)?, sample(&qxx.im, params, &grid)?);
    let mut r = RealField::filled(grid, 0.0);
    let mut s = RealField::filled(grid, 0.0);
    for k in 0..grid.len() {
        let qv = Complex64::new(re.data[k], im.data[k]);
        let a = epsilon * Complex64::new(rxx.data[k], ixx.data[k]);
        let b = delta * qv.norm_sqr() * qv;
        r.data[k] = (a + b).norm();
        s.data[k] = a.norm().max(b.norm());
    }
    Ok(ResidualReport::from_samples("homogeneous", &r, Some(&s), tol))
}

/// Per-slice least-squares quadratic fit `v ≈ a + b·x + c·x²`; returns `c`.
pub fn quadratic_coefficient(v: &RealField) -> Vec<f64> {
    let g = v.grid;
    let xs = g.xs();
    (0..g.n_t)
        .map(|j| {
            let a = nalgebra::DMatrix::from_fn(g.n_x, 3, |r, c| xs[r].powi(c as i32));
            let b = nalgebra::DVector::from_column_slice(v.row(j));
            let sol = a.svd(true, true).solve(&b, 1e-14).expect("svd solve");
            sol[2]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn e(s: &str) -> Expr {
        parse(s).unwrap()
    }

    #[test]
    fn identity_gauge() {
        let grid = GridSpec::new(-1.0, 2.0, 31, 0.0, 1.0, 3).unwrap();
        let gs = GaugeSpec::identity();
        let x = compute_x(&gs, &grid).unwrap();
        for i in 0..31 {
            assert!((x.get(i, 1) - (grid.x(i) + 1.0)).abs() < 1e-14);
        }
        let tr = transform(&gs, Some(&e("1")), None, &grid).unwrap();
        assert_eq!(tr.v.max_abs(), 0.0);
        assert_eq!(tr.theta.max_abs(), 0.0);
        let g = compute_g(&GaugeSpec { delta: 2.0, ..gs.clone() }, &e("1"), &grid).unwrap();
        assert!(g.data.iter().all(|v| *v == 2.0));
    }

    #[test]
    fn zero_c2_rejected() {
        let grid = GridSpec::new(0.0, 1.0, 11, 0.0, 1.0, 3).unwrap();
        let gs = GaugeSpec { c2: e("0"), ..GaugeSpec::identity() };
        assert!(compute_x(&gs, &grid).is_err());
    }

    #[test]
    fn constant_drift_of_c1_keeps_f_flat() {
        let grid = GridSpec::new(0.0, 1.0, 21, 0.0, 1.0, 3).unwrap();
        let gs = GaugeSpec { c1: e("0.5*t"), c_f: e("1 + t"), ..GaugeSpec::identity() };
        let f = compute_f(&gs, &grid).unwrap();
        for j in 0..3 {
            for i in 0..21 {
                assert!((f.get(i, j) - (1.0 + grid.t(j))).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn vanishing_denominator_is_an_error() {
        // A = ∫ 1 dx + ċ1 = (x + 1) − 1 changes sign inside [−1, 1]
        let grid = GridSpec::new(-1.0, 1.0, 21, 0.0, 1.0, 3).unwrap();
        let gs = GaugeSpec { c1: e("-t"), c2: e("exp(t)"), ..GaugeSpec::identity() };
        assert!(matches!(compute_f(&gs, &grid), Err(Error::Singular { .. })));
    }

    #[test]
    fn sine_is_not_homogeneous_solution() {
        let q = ComplexExpr::real(e("sin(x)"));
        let r = check_homogeneous(&q, 1.0, 1.0, -3.0, 3.0, 301, &Params::new(), 1e-9).unwrap();
        let want = (0..301)
            .map(|i| {
                let x = -3.0 + 6.0 * i as f64 / 300.0;
                (x.sin() * x.cos().powi(2)).abs()
            })
            .fold(0.0, f64::max);
        assert!((r.max_abs - want).abs() < 1e-12);
        assert!(!r.pass);
        let zero = check_homogeneous(&ComplexExpr::zero(), 1.0, 1.0, -3.0, 3.0, 11, &Params::new(), 1e-9).unwrap();
        assert_eq!(zero.max_abs, 0.0);
    }

    fn elliptic_gauge(x0: f64) -> GaugeSpec {
        GaugeSpec {
            beta: e("-0.5*log(x)"),
            c1: e(&format!("{}*t", x0 * x0 / 2.0)),
            c2: e("t"),
            c_theta: e(&format!("{}/t", -x0 * x0 / 8.0)),
            ..GaugeSpec::identity()
        }
    }

    #[test]
    fn elliptic_gauge_recovers_potential_and_solution() {
        let grid = GridSpec::new(0.7, 3.0, 401, 0.5, 2.0, 101).unwrap();
        let gs = elliptic_gauge(0.7);
        let tr = transform(&gs, Some(&e("1")), None, &grid).unwrap();
        let mut dv: f64 = 0.0;
        let mut dx: f64 = 0.0;
        for j in 0..grid.n_t {
            for i in 0..grid.n_x {
                let (x, t) = (grid.x(i), grid.t(j));
                dv = dv.max((tr.v.get(i, j) - (3.0 * x * x / (16.0 * t * t) - 0.75 / (x * x))).abs());
                dx = dx.max((tr.x.get(i, j) - t * x * x / 2.0).abs());
            }
        }
        assert!(dv < 1e-6, "{dv}");
        assert!(dx < 1e-8, "{dx}");
        let g = tr.g_expr.as_ref().unwrap();
        assert!((g.eval(1.3, 0.6, &Params::new()).unwrap() - 0.36 * 1.3f64.powi(3)).abs() < 1e-12);
        let f = compute_f(&gs, &grid).unwrap();
        assert!(f.data.iter().all(|v| (v - 1.0).abs() < 1e-8));
        for r in consistency(&gs, &tr, &grid, 1e-8).unwrap() {
            assert!(r.pass, "{} {}", r.condition, r.max_abs);
        }
        let q = ComplexExpr::real(e("-sn(x/sqrt(2), -1)"));
        let psi = map_solution(&gs, &q, &tr, &grid).unwrap();
        let mut d: f64 = 0.0;
        for j in 0..grid.n_t {
            for i in 0..grid.n_x {
                let (x, t) = (grid.x(i), grid.t(j));
                let r = Complex64::from_polar(1.0, -x * x / (8.0 * t))
                    * crate::elliptic::sn(t * x * x / 8f64.sqrt(), -1.0)
                    / x.sqrt();
                d = d.max((psi.get(i, j) + r).norm());
            }
        }
        assert!(d < 1e-8, "{d}");
        let h = check_homogeneous(&q, 1.0, 1.0, 0.0, 5.0, 201, &Params::new(), 1e-8).unwrap();
        assert!(h.pass, "{}", h.max_abs);
    }

    #[test]
    fn time_only_gauge_matches_quadratic_potential() {
        let alpha = 0.3;
        let grid = GridSpec::new(-2.0, 2.0, 201, 0.0, 1.0, 11).unwrap();
        let gs = GaugeSpec {
            beta: e(&format!("{}*t", alpha / 2.0)),
            c2: e(&format!("exp({}*t)", 2.0 * alpha)),
            ..GaugeSpec::identity()
        };
        let tr = transform(&gs, Some(&e("1")), None, &grid).unwrap();
        for c in quadratic_coefficient(&tr.v) {
            assert!((c - alpha * alpha / 4.0).abs() < 1e-8, "{c}");
        }
        let g = tr.g_expr.unwrap();
        assert!((g.eval(0.3, 0.7, &Params::new()).unwrap() - (alpha * 0.7f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn time_only_beta_with_matching_c2_gives_flat_f() {
        let grid = GridSpec::new(0.0, 1.0, 41, 0.0, 1.0, 6).unwrap();
        let gs = GaugeSpec {
            beta: e("0.2*sin(t)"),
            gamma: e("0.1"),
            c2: e("2*exp(0.8*sin(t) + 0.2*t)"),
            c1: e("t"),
            c_f: e("3"),
            ..GaugeSpec::identity()
        };
        let f = compute_f(&gs, &grid).unwrap();
        assert!(f.data.iter().all(|v| (v - 3.0).abs() < 1e-12));
    }
}
