use crate::output::{write_field, write_json, write_real_field, write_report, RunReport};
use crate::{Command, Common};
use nlsint::catalog::{self, catalog_file, named_q};
use nlsint::conditions::Potential;
use nlsint::expr::{parse, ComplexExpr, Params};
use nlsint::grid::{GridSpec, RealField};
use nlsint::laxcheck::{akns_case1, compat_residuals, fg_invariance, reduced_dispersion, LaxFunctions};
use nlsint::report::{ResidualReport, DEFAULT_TOL};
use nlsint::sample::sample_complex;
use nlsint::scenario::{CoefficientsFile, FreeFile, Scenario, ScenarioFile, AUTO};
use nlsint::similarity::{check_homogeneous, consistency, map_solution};
use nlsint::simulator::{initial_from_ref, norms, propagate, residual_of_candidate, residual_of_field, Boundary, SolverConfig};
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Norm conservation is held to this regardless of `--tol`.
const NORM_TOL: f64 = 1e-8;
/// Default for the simulation's distance to the reference solution.
const SIMULATE_TOL: f64 = 1e-3;
/// Finite-difference residual of a mapped field.
const FIELD_TOL: f64 = 1e-5;

enum Failure {
    Usage(String),
    Accuracy(String),
}

impl From<nlsint::Error> for Failure {
    fn from(e: nlsint::Error) -> Failure {
        match e {
            nlsint::Error::NoConvergence { .. } => Failure::Accuracy(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Failure {
        Failure::Usage(e.to_string())
    }
}

type Outcome = Result<(), Failure>;
type Checked = Result<(String, Vec<ResidualReport>), Failure>;

struct Ctx {
    out: PathBuf,
    params: Params,
    tol: Option<f64>,
    grid: Option<GridSpec>,
    jobs: usize,
}

impl Ctx {
    fn new(c: &Common) -> Result<Ctx, Failure> {
        let mut params = Params::new();
        for kv in &c.params {
            let (k, v) = kv.split_once('=').ok_or_else(|| Failure::Usage(format!("--param expects NAME=VALUE, got `{kv}`")))?;
            let v: f64 = v.trim().parse().map_err(|_| Failure::Usage(format!("--param {k}: `{v}` is not a number")))?;
            params.insert(k.trim().to_string(), v);
        }
        let tol = match c.tol {
            Some(t) => Some(t),
            None => match std::env::var("NLS_TOL") {
                Ok(s) => Some(s.trim().parse().map_err(|_| Failure::Usage(format!("NLS_TOL: `{s}` is not a number")))?),
                Err(_) => None,
            },
        };
        if let Some(t) = tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Failure::Usage(format!("tolerance must be positive, got {t}")));
            }
        }
        let grid = c.grid.as_deref().map(parse_grid).transpose()?;
        if c.jobs == 0 {
            return Err(Failure::Usage("--jobs must be at least 1".into()));
        }
        Ok(Ctx { out: c.out.clone(), params, tol, grid, jobs: c.jobs })
    }

    fn tol(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }

    /// A scenario file path or a catalog name, with overrides applied.
    fn scenario_file(&self, arg: &str) -> Result<ScenarioFile, Failure> {
        let mut file = if Path::new(arg).is_file() {
            let mut f = ScenarioFile::load(Path::new(arg))?;
            f.params.extend(self.params.clone());
            f
        } else if catalog::describe(arg).is_some() {
            catalog_file(arg, &self.params)?
        } else {
            return Err(Failure::Usage(format!("`{arg}` is neither a file nor a catalog entry ({})", catalog::NAMES.join(", "))));
        };
        if let Some(g) = self.grid {
            file.grid = g;
        }
        Ok(file)
    }
}

fn parse_grid(spec: &str) -> Result<GridSpec, Failure> {
    let bad = || Failure::Usage(format!("--grid expects x_min,x_max,n_x,t_min,t_max,n_t, got `{spec}`"));
    let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
    if parts.len() != 6 {
        return Err(bad());
    }
    let num = |s: &str| s.parse::<f64>().map_err(|_| bad());
    let count = |s: &str| s.parse::<usize>().map_err(|_| bad());
    GridSpec::new(num(parts[0])?, num(parts[1])?, count(parts[2])?, num(parts[3])?, num(parts[4])?, count(parts[5])?)
        .map_err(|e| Failure::Usage(e.to_string()))
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Check { .. } => "check",
        Command::Construct { .. } => "construct",
        Command::Map { .. } => "map",
        Command::Lax { .. } => "lax",
        Command::Simulate { .. } => "simulate",
        Command::Catalog { .. } => "catalog",
    }
}

pub fn run(common: &Common, cmd: &Command) -> u8 {
    let start = Instant::now();
    let mut report = RunReport {
        command: command_name(cmd).into(),
        scenario: String::new(),
        reports: Vec::new(),
        artifacts: Vec::new(),
        wall_time: 0.0,
        exit_status: 0,
        error: None,
    };
    let outcome = Ctx::new(common).and_then(|ctx| dispatch(&ctx, cmd, &mut report));
    for r in &report.reports {
        println!(
            "{} {:<22} max_abs {:.3e}  relative {:.3e}  tol {:.1e}",
            if r.pass { "PASS" } else { "FAIL" },
            r.condition,
            r.max_abs,
            r.relative(),
            r.tolerance
        );
    }
    report.exit_status = match &outcome {
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            report.error = Some(m.clone());
            2
        }
        Err(Failure::Accuracy(m)) => {
            eprintln!("error: {m}");
            report.error = Some(m.clone());
            1
        }
        Ok(()) if report.reports.iter().all(|r| r.pass) => 0,
        Ok(()) => 1,
    };
    report.wall_time = start.elapsed().as_secs_f64();
    if let Err(e) = write_report(&common.out, &report) {
        eprintln!("error: cannot write report: {e}");
        return 2;
    }
    report.exit_status
}

fn dispatch(ctx: &Ctx, cmd: &Command, rep: &mut RunReport) -> Outcome {
    match cmd {
        Command::Check { scenario, catalog, coefs } => check(ctx, scenario.as_deref().or(catalog.as_deref()).unwrap(), coefs, rep),
        Command::Construct { g, c1, c2, c3, c4, name } => construct(ctx, name, g, [c1, c2, c3, c4], rep),
        Command::Map { gauge, q } => map(ctx, gauge, q, rep),
        Command::Lax { scenario, laxfns, lambda } => lax(ctx, scenario, laxfns, *lambda, rep),
        Command::Simulate { scenario, dt, t, boundary, save_every } => simulate(ctx, scenario, *dt, *t, boundary, *save_every, rep),
        Command::Catalog { list, name } => catalog_cmd(ctx, *list, name.as_deref(), rep),
    }
}

fn apply_coefs(file: &mut ScenarioFile, coefs: &[String]) -> Outcome {
    for kv in coefs {
        let (k, v) = kv.split_once('=').ok_or_else(|| Failure::Usage(format!("--coef expects NAME=EXPR, got `{kv}`")))?;
        let v = v.trim().to_string();
        let c = &mut file.coefficients;
        match k.trim() {
            "f" => c.f = Some(v),
            "g" => c.g = v,
            "gamma" => c.gamma = Some(v),
            "v" => c.v = Some(v),
            "h" => c.h = Some(v),
            other => return Err(Failure::Usage(format!("--coef: unknown coefficient `{other}` (f, g, gamma, v, h)"))),
        }
    }
    Ok(())
}

fn check_one(ctx: &Ctx, arg: &str, coefs: &[String]) -> Checked {
    let mut file = ctx.scenario_file(arg)?;
    apply_coefs(&mut file, coefs)?;
    let s = file.resolve()?;
    Ok((s.name.clone(), s.check(ctx.tol(DEFAULT_TOL))?))
}

fn check(ctx: &Ctx, arg: &str, coefs: &[String], rep: &mut RunReport) -> Outcome {
    if arg != "all" {
        let (name, reports) = check_one(ctx, arg, coefs)?;
        rep.scenario = name;
        rep.reports = reports;
        return Ok(());
    }
    rep.scenario = "all".into();
    let names = catalog::NAMES;
    let mut results: Vec<Option<Checked>> = (0..names.len()).map(|_| None).collect();
    let chunk = names.len().div_ceil(ctx.jobs);
    std::thread::scope(|scope| {
        for (slots, batch) in results.chunks_mut(chunk).zip(names.chunks(chunk)) {
            scope.spawn(move || {
                for (slot, name) in slots.iter_mut().zip(batch) {
                    *slot = Some(check_one(ctx, name, coefs));
                }
            });
        }
    });
    for r in results {
        let (name, reports) = r.expect("every entry ran")?;
        for mut r in reports {
            r.condition = format!("{name}/{}", r.condition);
            rep.reports.push(r);
        }
    }
    Ok(())
}

fn construct(ctx: &Ctx, name: &str, g: &str, c: [&String; 4], rep: &mut RunReport) -> Outcome {
    let grid = ctx.grid.ok_or_else(|| Failure::Usage("construct needs --grid x_min,x_max,n_x,t_min,t_max,n_t".into()))?;
    let auto = || Some(AUTO.to_string());
    let file = ScenarioFile {
        name: name.into(),
        params: ctx.params.clone(),
        coefficients: CoefficientsFile { f: auto(), g: g.into(), gamma: auto(), v: auto(), h: None },
        free: FreeFile { c1: Some(c[0].clone()), c2: Some(c[1].clone()), c3: Some(c[2].clone()), c4: Some(c[3].clone()), k1i: None },
        grid,
        psi_ref: None,
        gauge: None,
        singular: Default::default(),
    };
    rep.scenario = name.into();
    if parse(g).map_err(|e| Failure::Usage(format!("--g: {e}")))?.simplify().is_zero() {
        return Err(Failure::Usage("g must not vanish".into()));
    }
    let s = file.resolve()?;
    rep.artifacts.push(write_json(&ctx.out, "scenario.json", &s.completed())?);
    if let (Potential::Analytic(v), true) = (&s.coefficients.v, s.quadrature_v) {
        println!("v ≈ {v}");
    }
    let [v, _, _] = s.coefficients.v.sample(s.params(), &s.grid)?;
    rep.artifacts.extend(write_real_field(&ctx.out, "v", &s.grid, &v.data)?);
    rep.reports = s.check(ctx.tol(DEFAULT_TOL))?;
    if s.quadrature_v && rep.reports.iter().any(|r| !r.pass) {
        eprintln!("hint: the potential came from quadrature; a larger n_x usually resolves it");
    }
    Ok(())
}

fn homogeneous_q(q: &str) -> Result<ComplexExpr, Failure> {
    match named_q(q) {
        Some(q) => Ok(q),
        None => Ok(ComplexExpr::real(parse(q).map_err(|e| Failure::Usage(format!("--Q: {e}")))?)),
    }
}

fn map(ctx: &Ctx, arg: &str, q: &str, rep: &mut RunReport) -> Outcome {
    let s = ctx.scenario_file(arg)?.resolve()?;
    rep.scenario = s.name.clone();
    let gs = s.gauge.as_ref().ok_or_else(|| Failure::Usage(format!("scenario `{}` has no gauge", s.name)))?;
    let q = homogeneous_q(q)?;
    let tol = ctx.tol(DEFAULT_TOL);
    let (eqn, tr) = s.gauge_equation()?;
    let psi = map_solution(gs, &q, &tr, &s.grid)?;
    rep.artifacts.extend(write_field(&ctx.out, "psi", &s.grid, &psi.data)?);
    rep.artifacts.extend(write_real_field(&ctx.out, "v", &s.grid, &tr.v.data)?);
    rep.reports = consistency(gs, &tr, &s.grid, tol)?;
    let lo = tr.x.data.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = tr.x.data.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    rep.reports.push(check_homogeneous(&q, gs.epsilon, gs.delta, lo, hi, 1001, &gs.params, tol)?);
    match &s.psi_ref {
        Some(r) => {
            // Ψ and −Ψ solve the same equation; compare up to that sign.
            let want = sample_complex(r, s.params(), &s.grid)?;
            let gap = |sign: f64| psi.zip_map(&want, |a, b| (a - sign * b).norm());
            let (plus, minus) = (gap(1.0), gap(-1.0));
            let best = if plus.max_abs() <= minus.max_abs() { plus } else { minus };
            rep.reports.push(ResidualReport::from_samples("reference_match", &best, None, tol));
            let mut cand = residual_of_candidate(&s, r, &s.grid, tol)?;
            cand.condition = "reference_solves_equation".into();
            rep.reports.push(cand);
        }
        None => {
            let mut r = residual_of_field(&eqn, &psi, tol.max(FIELD_TOL))?;
            r.condition = "mapped_field".into();
            rep.reports.push(r);
        }
    }
    Ok(())
}

fn lax(ctx: &Ctx, arg: &str, laxfns: &str, lambda: f64, rep: &mut RunReport) -> Outcome {
    let s = ctx.scenario_file(arg)?.resolve()?;
    rep.scenario = s.name.clone();
    let l = if laxfns == "akns" {
        akns_case1(lambda)
    } else {
        let text = std::fs::read_to_string(laxfns).map_err(|e| Failure::Usage(format!("{laxfns}: {e}")))?;
        let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{laxfns}: {e}")))?;
        LaxFunctions::from_json(&v)?
    };
    let tol = ctx.tol(DEFAULT_TOL);
    rep.reports = compat_residuals(&l, &s.coefficients, &s.grid, tol)?;
    rep.reports.push(reduced_dispersion(&l, &s.coefficients, &s.grid, tol)?);
    rep.reports.push(fg_invariance(&s.coefficients, &s.grid, tol)?);
    Ok(())
}

fn default_save_every(steps: usize) -> usize {
    let mut k = (steps / 100).max(1);
    while !steps.is_multiple_of(k) {
        k -= 1;
    }
    k
}

fn conserves_norm(s: &Scenario) -> bool {
    let c = &s.coefficients;
    c.gamma.simplify().is_zero() && c.h.as_ref().is_none_or(|h| h.simplify().is_zero())
}

fn simulate(ctx: &Ctx, arg: &str, dt: f64, span: f64, boundary: &str, save_every: Option<usize>, rep: &mut RunReport) -> Outcome {
    let s = ctx.scenario_file(arg)?.resolve()?;
    rep.scenario = s.name.clone();
    let boundary: Boundary = boundary.parse()?;
    if !(span > 0.0 && dt > 0.0) {
        return Err(Failure::Usage("--dt and --T must be positive".into()));
    }
    let steps = (span / dt).round() as usize;
    let cfg = SolverConfig { save_every: save_every.unwrap_or_else(|| default_save_every(steps)), ..SolverConfig::new(dt) }.with_boundary(boundary);
    cfg.validate()?;
    let t0 = s.grid.t_min;
    let psi0 = initial_from_ref(&s, t0)?;
    let out = propagate(&s, &psi0, &cfg, t0, t0 + span)?;
    rep.artifacts.extend(write_field(&ctx.out, "psi", &out.grid, &out.data)?);
    let want = sample_complex(s.psi_ref.as_ref().expect("initial data came from psi_ref"), s.params(), &out.grid)?;
    let err = out.zip_map(&want, |a, b| (a - b).norm());
    rep.reports.push(ResidualReport::from_samples("reference_error", &err, None, ctx.tol(SIMULATE_TOL)));
    let n = norms(&out);
    let ts: Vec<f64> = (0..out.grid.n_t).map(|j| out.grid.t(j)).collect();
    rep.artifacts.push(write_json(&ctx.out, "norms.json", &serde_json::json!({ "t": ts, "norm": n }))?);
    if boundary == Boundary::Zero && conserves_norm(&s) {
        let mut drift = RealField::filled(out.grid, 0.0);
        for j in 0..out.grid.n_t {
            drift.row_mut(j).fill((n[j] - n[0]).abs() / n[0]);
        }
        rep.reports.push(ResidualReport::from_samples("norm_drift", &drift, None, NORM_TOL));
    }
    Ok(())
}

fn catalog_cmd(ctx: &Ctx, list: bool, name: Option<&str>, rep: &mut RunReport) -> Outcome {
    if list {
        for n in catalog::NAMES {
            println!("{n:<10} {}", catalog::describe(n).unwrap());
        }
        rep.artifacts.push(write_json(&ctx.out, "catalog.json", &catalog::NAMES)?);
        return Ok(());
    }
    let name = name.expect("clap requires a name without --list");
    let mut file = catalog_file(name, &ctx.params)?;
    if let Some(g) = ctx.grid {
        file.grid = g;
    }
    rep.scenario = name.into();
    println!("{}", file.to_json_string());
    rep.artifacts.push(write_json(&ctx.out, &format!("{name}.json"), &file)?);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_spec_parsing() {
        let g = parse_grid("0, 1, 11, 0, 2, 5").ok().unwrap();
        assert_eq!((g.n_x, g.n_t, g.t_max), (11, 5, 2.0));
        assert!(parse_grid("0,1,11").is_err());
        assert!(parse_grid("1,0,11,0,1,3").is_err());
    }

    #[test]
    fn save_every_divides_step_count() {
        assert_eq!(default_save_every(1000), 10);
        assert_eq!(default_save_every(50), 1);
        assert_eq!(default_save_every(1030), 10);
        assert_eq!(default_save_every(1070), 10);
        assert_eq!(1070 % default_save_every(1070), 0);
    }
}
