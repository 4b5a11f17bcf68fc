//! Time propagation of `fΨ_xx + hΨ_x + g|Ψ|²Ψ + vΨ + iγΨ + iΨ_t = 0` and
//! pointwise residuals of candidate solutions.
//!
//! Propagation is Crank–Nicolson (implicit midpoint) with second-order
//! centered differences in `x`, coefficients frozen at `t_{n+1/2}`, and the
//! cubic term at the midpoint state resolved by fixed-point iteration.

use crate::conditions::Potential;
use crate::error::{Error, Result};
use crate::expr::{diff, ComplexExpr, Expr, Params, Program, Var};
use crate::grid::{fd_t, fd_x, ComplexField, GridSpec, RealField};
use crate::report::ResidualReport;
use crate::sample::{sample, sample_complex};
use crate::scenario::Scenario;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    Zero,
    Analytic,
}

impl std::str::FromStr for Boundary {
    type Err = Error;
    fn from_str(s: &str) -> Result<Boundary> {
        match s {
            "zero" => Ok(Boundary::Zero),
            "analytic" => Ok(Boundary::Analytic),
            _ => Err(Error::Precondition(format!("unknown boundary mode `{s}` (zero | analytic)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub dt: f64,
    pub boundary: Boundary,
    pub tol: f64,
    pub max_iter: usize,
    /// Keep every `save_every`-th time level.
    pub save_every: usize,
}

impl SolverConfig {
    pub fn new(dt: f64) -> SolverConfig {
        SolverConfig { dt, boundary: Boundary::Zero, tol: 1e-12, max_iter: 50, save_every: 1 }
    }

    pub fn with_boundary(mut self, b: Boundary) -> SolverConfig {
        self.boundary = b;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Precondition("dt must be positive".into()));
        }
        if self.max_iter == 0 || self.save_every == 0 {
            return Err(Error::Precondition("max_iter and save_every must be positive".into()));
        }
        Ok(())
    }
}

/// `|fΨ_xx + hΨ_x + g|Ψ|²Ψ + vΨ + iγΨ + iΨ_t|` for an analytic `Ψ`.
pub fn residual_of_candidate(scn: &Scenario, psi: &ComplexExpr, grid: &GridSpec, tol: f64) -> Result<ResidualReport> {
    let c = &scn.coefficients;
    let p = &c.params;
    let d = |e: &Expr, var, k| -> Result<Expr> { Ok(diff(e, var, k)?) };
    let psi_x = ComplexExpr::new(d(&psi.re, Var::X, 1)?, d(&psi.im, Var::X, 1)?);
    let psi_xx = ComplexExpr::new(d(&psi.re, Var::X, 2)?, d(&psi.im, Var::X, 2)?);
    let psi_t = ComplexExpr::new(d(&psi.re, Var::T, 1)?, d(&psi.im, Var::T, 1)?);
    let u = sample_complex(psi, p, grid)?;
    let ux = sample_complex(&psi_x, p, grid)?;
    let uxx = sample_complex(&psi_xx, p, grid)?;
    let ut = sample_complex(&psi_t, p, grid)?;
    let coeffs = Coefficients::sample(scn, grid)?;
    Ok(assemble(&coeffs, &u, &ux, &uxx, &ut, tol))
}

/// The same residual with fourth-order finite differences of sampled `Ψ`
/// (needs `n_x, n_t ≥ 6`).
pub fn residual_of_field(scn: &Scenario, psi: &ComplexField, tol: f64) -> Result<ResidualReport> {
    let grid = psi.grid;
    if grid.n_x < 6 || grid.n_t < 6 {
        return Err(Error::Precondition("residual_of_field needs n_x, n_t >= 6".into()));
    }
    let re = psi.map(|z| z.re);
    let im = psi.map(|z| z.im);
    let join = |a: RealField, b: RealField| a.zip_map(&b, Complex64::new);
    let ux = join(fd_x(&re, 1), fd_x(&im, 1));
    let uxx = join(fd_x(&re, 2), fd_x(&im, 2));
    let ut = join(fd_t(&re, 1), fd_t(&im, 1));
    let coeffs = Coefficients::sample(scn, &grid)?;
    Ok(assemble(&coeffs, psi, &ux, &uxx, &ut, tol))
}

struct Coefficients {
    f: RealField,
    h: RealField,
    g: RealField,
    v: RealField,
    gamma: RealField,
}

impl Coefficients {
    fn sample(scn: &Scenario, grid: &GridSpec) -> Result<Coefficients> {
        let c = &scn.coefficients;
        let p = &c.params;
        let v = match &c.v {
            Potential::Analytic(e) => sample(e, p, grid)?,
            Potential::Sampled { v, .. } => {
                if v.grid != *grid {
                    return Err(Error::Precondition("sampled potential lives on a different grid".into()));
                }
                v.clone()
            }
        };
        Ok(Coefficients {
            f: sample(&c.f, p, grid)?,
            h: sample(c.h.as_ref().unwrap_or(&Expr::Num(0.0)), p, grid)?,
            g: sample(&c.g, p, grid)?,
            v,
            gamma: sample(&c.gamma, p, grid)?,
        })
    }
}

fn assemble(c: &Coefficients, u: &ComplexField, ux: &ComplexField, uxx: &ComplexField, ut: &ComplexField, tol: f64) -> ResidualReport {
    let grid = u.grid;
    let i = Complex64::i();
    let mut r = RealField::filled(grid, 0.0);
    let mut s = RealField::filled(grid, 0.0);
    for k in 0..grid.len() {
        let psi = u.data[k];
        let terms = [
            c.f.data[k] * uxx.data[k],
            c.h.data[k] * ux.data[k],
            c.g.data[k] * psi.norm_sqr() * psi,
            c.v.data[k] * psi,
            i * c.gamma.data[k] * psi,
            i * ut.data[k],
        ];
        r.data[k] = terms.iter().sum::<Complex64>().norm();
        s.data[k] = terms.iter().fold(0.0_f64, |m, t| m.max(t.norm()));
    }
    ResidualReport::from_samples("nls", &r, Some(&s), tol)
}

/// Coefficient evaluation along one time level.
enum Coef {
    Const(Vec<f64>),
    Timed(Program),
    Table(RealField),
}

impl Coef {
    fn new(e: &Expr, params: &Params, xs: &[f64]) -> Result<Coef> {
        let prog = e.compile(params)?;
        if !e.simplify().depends_on(Var::T) {
            let mut stack = Vec::new();
            let vals = xs.iter().map(|x| prog.eval_with(&mut stack, *x, 0.0)).collect::<std::result::Result<Vec<_>, _>>()?;
            return Ok(Coef::Const(vals));
        }
        Ok(Coef::Timed(prog))
    }

    fn at(&self, xs: &[f64], t: f64, out: &mut [f64]) -> Result<()> {
        match self {
            Coef::Const(v) => out.copy_from_slice(v),
            Coef::Timed(p) => {
                let mut stack = Vec::new();
                for (o, x) in out.iter_mut().zip(xs) {
                    *o = p.eval_with(&mut stack, *x, t)?;
                }
            }
            Coef::Table(f) => {
                let g = f.grid;
                let s = if g.n_t == 1 { 0.0 } else { (t - g.t_min) / g.dt() };
                let eps = 1e-9;
                if s < -eps || s > (g.n_t - 1) as f64 + eps {
                    return Err(Error::Precondition(format!("t = {t} outside the sampled potential's time range")));
                }
                let j = (s.floor().max(0.0) as usize).min(g.n_t.saturating_sub(2));
                let w = if g.n_t == 1 { 0.0 } else { (s - j as f64).clamp(0.0, 1.0) };
                let (a, b) = (f.row(j), f.row((j + 1).min(g.n_t - 1)));
                for (k, o) in out.iter_mut().enumerate() {
                    *o = (1.0 - w) * a[k] + w * b[k];
                }
            }
        }
        Ok(())
    }
}

struct Stepper {
    cfg: SolverConfig,
    xs: Vec<f64>,
    dx: f64,
    f: Coef,
    h: Coef,
    g: Coef,
    v: Coef,
    gamma: Coef,
    psi_ref: Option<(Program, Program)>,
}

impl Stepper {
    fn new(scn: &Scenario, cfg: SolverConfig) -> Result<Stepper> {
        cfg.validate()?;
        let grid = scn.grid;
        if grid.n_x < 5 {
            return Err(Error::Precondition("propagation needs n_x >= 5".into()));
        }
        let c = &scn.coefficients;
        let p = &c.params;
        let xs = grid.xs();
        let v = match &c.v {
            Potential::Analytic(e) => Coef::new(e, p, &xs)?,
            Potential::Sampled { v, .. } => Coef::Table(v.clone()),
        };
        let psi_ref = match (cfg.boundary, &scn.psi_ref) {
            (Boundary::Zero, _) => None,
            (Boundary::Analytic, Some(r)) => Some((r.re.compile(p)?, r.im.compile(p)?)),
            (Boundary::Analytic, None) => {
                return Err(Error::Precondition("analytic boundaries need psi_ref".into()));
            }
        };
        Ok(Stepper {
            cfg,
            dx: grid.dx(),
            f: Coef::new(&c.f, p, &xs)?,
            h: Coef::new(c.h.as_ref().unwrap_or(&Expr::Num(0.0)), p, &xs)?,
            g: Coef::new(&c.g, p, &xs)?,
            v,
            gamma: Coef::new(&c.gamma, p, &xs)?,
            psi_ref,
            xs,
        })
    }

    fn boundary(&self, t: f64) -> Result<(Complex64, Complex64)> {
        match &self.psi_ref {
            None => Ok((Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))),
            Some((re, im)) => {
                let n = self.xs.len();
                let at = |x: f64| -> Result<Complex64> { Ok(Complex64::new(re.eval(x, t)?, im.eval(x, t)?)) };
                Ok((at(self.xs[0])?, at(self.xs[n - 1])?))
            }
        }
    }

    /// One step from `t` to `t + dt` (`dt` may be negative).
    fn step(&self, psi: &[Complex64], t: f64, dt: f64, work: &mut Work) -> Result<Vec<Complex64>> {
        let n = self.xs.len();
        let tm = t + 0.5 * dt;
        self.f.at(&self.xs, tm, &mut work.f)?;
        self.h.at(&self.xs, tm, &mut work.h)?;
        self.g.at(&self.xs, tm, &mut work.g)?;
        self.v.at(&self.xs, tm, &mut work.v)?;
        self.gamma.at(&self.xs, tm, &mut work.gamma)?;
        let i = Complex64::i();
        let (dx2, two_dx) = (self.dx * self.dx, 2.0 * self.dx);
        // L = i(f D2 + h D1 + v) − γ on interior rows: (lo, di, up)
        let m = n - 2;
        let (mut lo, mut di, mut up) = (vec![Complex64::default(); m], vec![Complex64::default(); m], vec![Complex64::default(); m]);
        for r in 0..m {
            let k = r + 1;
            let (f, h) = (work.f[k], work.h[k]);
            lo[r] = i * (f / dx2 - h / two_dx);
            di[r] = i * (-2.0 * f / dx2 + work.v[k]) - work.gamma[k];
            up[r] = i * (f / dx2 + h / two_dx);
        }
        let (b0, b1) = self.boundary(t + dt)?;
        let half = 0.5 * dt;
        // explicit half and boundary contributions
        let mut base = vec![Complex64::default(); m];
        for r in 0..m {
            let k = r + 1;
            let lpsi = lo[r] * psi[k - 1] + di[r] * psi[k] + up[r] * psi[k + 1];
            base[r] = psi[k] + half * lpsi;
        }
        base[0] += half * lo[0] * b0;
        base[m - 1] += half * up[m - 1] * b1;
        // factor (I − dt/2·L)
        let a: Vec<Complex64> = lo.iter().map(|l| -half * l).collect();
        let c: Vec<Complex64> = up.iter().map(|u| -half * u).collect();
        let b: Vec<Complex64> = di.iter().map(|d| Complex64::new(1.0, 0.0) - half * d).collect();
        let mut cp = vec![Complex64::default(); m];
        let mut den = vec![Complex64::default(); m];
        den[0] = b[0];
        cp[0] = c[0] / den[0];
        for r in 1..m {
            den[r] = b[r] - a[r] * cp[r - 1];
            if den[r].norm() == 0.0 {
                return Err(Error::Precondition("singular Crank–Nicolson matrix".into()));
            }
            cp[r] = c[r] / den[r];
        }
        let solve = |rhs: &[Complex64], out: &mut [Complex64]| {
            let mut dp = vec![Complex64::default(); m];
            dp[0] = rhs[0] / den[0];
            for r in 1..m {
                dp[r] = (rhs[r] - a[r] * dp[r - 1]) / den[r];
            }
            out[m - 1] = dp[m - 1];
            for r in (0..m - 1).rev() {
                out[r] = dp[r] - cp[r] * out[r + 1];
            }
        };
        let mut next = psi.to_vec();
        next[0] = b0;
        next[n - 1] = b1;
        let mut rhs = vec![Complex64::default(); m];
        let mut sol = vec![Complex64::default(); m];
        let mut delta = f64::INFINITY;
        for _ in 0..self.cfg.max_iter {
            for r in 0..m {
                let k = r + 1;
                let mid = 0.5 * (psi[k] + next[k]);
                rhs[r] = base[r] + dt * i * work.g[k] * mid.norm_sqr() * mid;
            }
            solve(&rhs, &mut sol);
            let mut scale: f64 = 1.0;
            delta = 0.0;
            for r in 0..m {
                delta = delta.max((sol[r] - next[r + 1]).norm());
                scale = scale.max(sol[r].norm());
                next[r + 1] = sol[r];
            }
            if !delta.is_finite() {
                break;
            }
            if delta <= self.cfg.tol * scale {
                return Ok(next);
            }
        }
        Err(Error::NoConvergence { t: t + dt, iterations: self.cfg.max_iter, delta })
    }
}

struct Work {
    f: Vec<f64>,
    h: Vec<f64>,
    g: Vec<f64>,
    v: Vec<f64>,
    gamma: Vec<f64>,
}

/// Propagate `psi0` (given on the scenario's `x` grid at `t_start`) to
/// `t_end`. The returned field holds every `save_every`-th level, endpoints
/// included; `t_end < t_start` runs backwards.
pub fn propagate(scn: &Scenario, psi0: &[Complex64], cfg: &SolverConfig, t_start: f64, t_end: f64) -> Result<ComplexField> {
    let st = Stepper::new(scn, *cfg)?;
    let n = st.xs.len();
    if psi0.len() != n {
        return Err(Error::Precondition(format!("psi0 has {} points, grid has {n}", psi0.len())));
    }
    let span = t_end - t_start;
    let steps = (span.abs() / cfg.dt).round() as usize;
    if steps == 0 || ((steps as f64) * cfg.dt - span.abs()).abs() > 1e-9 * span.abs().max(1.0) {
        return Err(Error::Precondition(format!("|t_end − t_start| = {} is not a positive multiple of dt = {}", span.abs(), cfg.dt)));
    }
    if !steps.is_multiple_of(cfg.save_every) {
        return Err(Error::Precondition("step count is not a multiple of save_every".into()));
    }
    let dt = span / steps as f64;
    let saved = steps / cfg.save_every + 1;
    let (lo, hi) = if span > 0.0 { (t_start, t_end) } else { (t_end, t_start) };
    let out_grid = GridSpec { t_min: lo, t_max: hi, n_t: saved, ..scn.grid };
    let mut data = vec![Complex64::default(); n * saved];
    let slot = |level: usize| if span > 0.0 { level } else { saved - 1 - level };
    data[slot(0) * n..(slot(0) + 1) * n].copy_from_slice(psi0);
    let mut work = Work { f: vec![0.0; n], h: vec![0.0; n], g: vec![0.0; n], v: vec![0.0; n], gamma: vec![0.0; n] };
    let mut psi = psi0.to_vec();
    for s in 0..steps {
        let t = t_start + s as f64 * dt;
        psi = st.step(&psi, t, dt, &mut work)?;
        if (s + 1) % cfg.save_every == 0 {
            let l = slot((s + 1) / cfg.save_every);
            data[l * n..(l + 1) * n].copy_from_slice(&psi);
        }
    }
    Ok(ComplexField::new(out_grid, data)?)
}

/// `Ψ_ref` sampled on the scenario's `x` grid at time `t`.
pub fn initial_from_ref(scn: &Scenario, t: f64) -> Result<Vec<Complex64>> {
    let r = scn.psi_ref.as_ref().ok_or_else(|| Error::Precondition("scenario has no psi_ref".into()))?;
    Ok(sample_complex(r, scn.params(), &scn.grid.at_time(t))?.data)
}

/// Max over `x` of `|Ψ − Ψ_ref|` on the last saved level.
pub fn final_error(scn: &Scenario, field: &ComplexField) -> Result<f64> {
    let g = field.grid;
    let t = g.t_max;
    let r = initial_from_ref(scn, t)?;
    let last = if field.grid.t_min == t { 0 } else { g.n_t - 1 };
    Ok(field.row(last).iter().zip(&r).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub dx: f64,
    pub dt: f64,
    pub n_x: usize,
    pub error: f64,
    /// `log2(e_prev / e)`; absent on the first row.
    pub order: Option<f64>,
    /// Refinement reduced the error by less than 3× (or increased it).
    pub anomaly: bool,
}

/// Errors against `psi_ref` at `t_end` under simultaneous halving of `dx`
/// and `dt`, starting from the scenario grid and `cfg.dt`.
pub fn convergence_study(scn: &Scenario, cfg: &SolverConfig, t_end: f64, refinements: usize) -> Result<Vec<ConvergenceRow>> {
    if refinements < 2 {
        return Err(Error::Precondition("a convergence study needs at least 2 refinements".into()));
    }
    let t0 = scn.grid.t_min;
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    let mut grid = scn.grid;
    let mut c = *cfg;
    c.save_every = 1;
    for _ in 0..refinements {
        let s = Scenario { grid, ..scn.clone() };
        let s = if matches!(s.coefficients.v, Potential::Sampled { .. }) { scn.with_grid(grid)? } else { s };
        let psi0 = initial_from_ref(&s, t0)?;
        let steps = ((t_end - t0) / c.dt).round() as usize;
        c.save_every = steps.max(1);
        let field = propagate(&s, &psi0, &c, t0, t_end)?;
        let error = final_error(&s, &field)?;
        let (order, anomaly) = match rows.last() {
            None => (None, false),
            Some(prev) => {
                let ratio = prev.error / error;
                (Some(ratio.log2()), ratio.is_nan() || ratio < 3.0)
            }
        };
        rows.push(ConvergenceRow { dx: grid.dx(), dt: c.dt, n_x: grid.n_x, error, order, anomaly });
        grid.n_x = 2 * (grid.n_x - 1) + 1;
        c.dt *= 0.5;
    }
    Ok(rows)
}

/// `sqrt(∫|Ψ|² dx)` on every saved level.
pub fn norms(field: &ComplexField) -> Vec<f64> {
    (0..field.grid.n_t).map(|j| field.l2_norm_row(j)).collect()
}
