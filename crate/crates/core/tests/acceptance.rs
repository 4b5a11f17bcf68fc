//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

mod common;

use common::{e, random_expr, random_seed_g, random_time_fn};
use nlsint::catalog::{catalog, catalog_file, named_q};
use nlsint::conditions::{residual_painleve, residual_v_field, residual_v_hd_field, CoefficientSet};
use nlsint::constructor::{build_v, build_v_timeonly, construct, timeonly_v2, FreeFunctions};
use nlsint::elliptic::jacobi;
use nlsint::expr::{diff, Expr, Params, Var};
use nlsint::grid::GridSpec;
use nlsint::laxcheck::{akns_case1, compat_residuals};
use nlsint::report::QUADRATURE_TOL;
use nlsint::scenario::PsiFile;
use nlsint::similarity::{check_homogeneous, quadratic_coefficient, transform, GaugeSpec};
use nlsint::simulator::{convergence_study, final_error, initial_from_ref, norms, propagate, residual_of_candidate, SolverConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: String) -> Outcome {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn params(kv: &[(&str, f64)]) -> Params {
    kv.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn catalog_suite() -> Outcome {
    let entries: [(&str, Params); 9] = [
        ("case1", params(&[])),
        ("case2", params(&[])),
        ("case3", params(&[])),
        ("case4", params(&[])),
        ("case5", params(&[])),
        ("hd-case1", params(&[("n", 1.0)])),
        ("hd-case1", params(&[("n", 2.0)])),
        ("hd-case2", params(&[("p", 1.0)])),
        ("eq19", params(&[])),
    ];
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for (name, p) in entries {
        let start = Instant::now();
        let s = catalog(name, &p).map_err(|err| format!("{name}: {err}"))?;
        assert_eq!((s.grid.n_x, s.grid.n_t), (401, 101));
        let reps = s.check(1e-8).map_err(|err| format!("{name}: {err}"))?;
        let secs = start.elapsed().as_secs_f64();
        for r in &reps {
            if r.pass {
                worst = worst.max(r.relative());
            } else {
                failures.push(format!("{name}{p:?} {} relative {:.3e}", r.condition, r.relative()));
            }
        }
        if secs >= 5.0 {
            failures.push(format!("{name} took {secs:.1} s"));
        }
    }
    ensure(
        failures.is_empty(),
        if failures.is_empty() {
            format!("9 scenarios pass, worst relative residual {worst:.2e}")
        } else {
            failures.join("; ")
        },
    )
}

fn reduction_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let grid = GridSpec::new(-1.5, 1.5, 21, 0.0, 1.0, 6).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let f = format!("1.5 + sin({})", random_expr(&mut rng, 2));
        let g = format!("exp(0.5*sin({}))", random_expr(&mut rng, 2));
        let gamma = random_expr(&mut rng, 2);
        let v = random_expr(&mut rng, 3);
        let c = CoefficientSet::new(e(&f), e(&g), e(&gamma), e(&v)).with_h(Expr::Num(0.0));
        let flat = residual_v_field(&c, &grid).map_err(|err| err.to_string())?;
        let hd = residual_v_hd_field(&c, &grid).map_err(|err| err.to_string())?;
        for (a, b) in flat.data.iter().zip(&hd.data) {
            worst = worst.max((b - 4.0 * a).abs() / (4.0 * a.abs()).max(1.0));
        }
    }
    ensure(worst <= 1e-10, format!("50 random sets, worst pointwise relative {worst:.2e}"))
}

fn painleve_agreement() -> Outcome {
    let grid = GridSpec::new(-2.0, 2.0, 201, 0.0, 1.0, 11).unwrap();
    let mut lines = Vec::new();
    let mut ok = true;
    for alpha in [0.1, 0.5, 1.0] {
        let g = e(&format!("exp({alpha}*t)"));
        let v = build_v_timeonly(&Expr::Num(1.0), &g, &Expr::Num(0.0), &FreeFunctions::default()).map_err(|err| err.to_string())?;
        let v2 = timeonly_v2(&Expr::Num(1.0), &g, &Expr::Num(0.0)).map_err(|err| err.to_string())?;
        let mut dv: f64 = 0.0;
        for t in grid.ts() {
            let got = v2.eval(0.0, t, &Params::new()).unwrap();
            let from_v = 0.5 * diff(&v, Var::X, 2).unwrap().eval(0.3, t, &Params::new()).unwrap();
            dv = dv.max((got - alpha * alpha / 4.0).abs()).max((from_v - alpha * alpha / 4.0).abs());
        }
        let pv = residual_painleve(&Expr::Num(1.0), &g, &v2, &Params::new(), &grid, 1e-12).map_err(|err| err.to_string())?;
        let gauge = GaugeSpec {
            beta: e(&format!("{}*t", alpha / 2.0)),
            c2: e(&format!("exp({}*t)", 2.0 * alpha)),
            ..GaugeSpec::identity()
        };
        let tr = transform(&gauge, Some(&Expr::Num(1.0)), None, &grid).map_err(|err| err.to_string())?;
        let dc = quadratic_coefficient(&tr.v).iter().map(|c| (c - alpha * alpha / 4.0).abs()).fold(0.0, f64::max);
        ok &= dv <= 1e-12 && pv.max_abs <= 1e-12 && dc <= 1e-8;
        lines.push(format!("alpha={alpha}: |v2-a^2/4|={dv:.1e} painleve={:.1e} similarity={dc:.1e}", pv.max_abs));
    }
    ensure(ok, lines.join(", "))
}

fn elliptic_solution() -> Outcome {
    let s = catalog("eq19", &Params::new()).map_err(|err| err.to_string())?;
    let grid = GridSpec::new(0.7, 3.0, 600, 0.5, 2.0, 300).unwrap();
    let psi = s.psi_ref.clone().ok_or("eq19 has no psi_ref")?;
    let r = residual_of_candidate(&s, &psi, &grid, 1e-6).map_err(|err| err.to_string())?;
    let q = named_q("sn").unwrap();
    let h = check_homogeneous(&q, 1.0, 1.0, 0.0, 10.0, 1001, &Params::new(), 1e-9).map_err(|err| err.to_string())?;
    ensure(
        r.max_abs <= 1e-6 && h.max_abs <= 1e-9,
        format!("candidate residual {:.2e}, homogeneous residual {:.2e}", r.max_abs, h.max_abs),
    )
}

fn soliton_file(n_x: usize) -> nlsint::scenario::ScenarioFile {
    let mut f = catalog_file("case1", &Params::new()).unwrap();
    f.grid = GridSpec::new(-20.0, 20.0, n_x, 0.0, 1.0, 2).unwrap();
    f.psi_ref = Some(PsiFile::Polar { abs: "sqrt(2)*sech(x)".into(), phase: "t".into() });
    f
}

fn solver() -> Outcome {
    let start = Instant::now();
    let s = soliton_file(1024).resolve().map_err(|err| err.to_string())?;
    let psi0 = initial_from_ref(&s, 0.0).map_err(|err| err.to_string())?;
    let cfg = SolverConfig { save_every: 1000, ..SolverConfig::new(1e-3) };
    let out = propagate(&s, &psi0, &cfg, 0.0, 1.0).map_err(|err| err.to_string())?;
    let err = final_error(&s, &out).map_err(|err| err.to_string())?;
    let n = norms(&out);
    let drift = (n[1] - n[0]).abs() / n[0];
    let coarse = soliton_file(201).resolve().map_err(|err| err.to_string())?;
    let rows = convergence_study(&coarse, &SolverConfig::new(0.02), 1.0, 3).map_err(|err| err.to_string())?;
    let orders: Vec<f64> = rows.iter().filter_map(|r| r.order).collect();
    let secs = start.elapsed().as_secs_f64();
    let orders_ok = orders.iter().all(|o| (1.8..=2.2).contains(o));
    ensure(
        err <= 1e-3 && drift <= 1e-8 && orders_ok && secs < 60.0,
        format!("L∞ error {err:.2e}, norm drift {drift:.1e}, observed orders {orders:.3?}, {secs:.1} s"),
    )
}

fn lax() -> Outcome {
    let s = catalog("case1", &Params::new()).map_err(|err| err.to_string())?;
    let base = akns_case1(1.0);
    let reps = compat_residuals(&base, &s.coefficients, &s.grid, 1e-10).map_err(|err| err.to_string())?;
    let worst = reps.iter().map(|r| r.max_abs).fold(0.0, f64::max);
    let mut ok = worst <= 1e-10;
    let mut perturbed = Vec::new();
    let bump = |x: &Expr| (x.clone() + Expr::Num(0.1)).simplify();
    for (entry, idx) in [("g6", 3), ("g10", 4), ("g1", 5), ("g13", 5)] {
        let mut l = base.clone();
        match entry {
            "g6" => l.g6.re = bump(&l.g6.re),
            "g10" => l.g10.re = bump(&l.g10.re),
            "g1" => l.g1.re = bump(&l.g1.re),
            _ => l.g13.re = bump(&l.g13.re),
        }
        let r = compat_residuals(&l, &s.coefficients, &s.grid, 1e-10).map_err(|err| err.to_string())?;
        ok &= (r[idx].max_abs - 0.1).abs() <= 1e-15;
        perturbed.push(format!("{entry}->{} {:.3}", r[idx].condition, r[idx].max_abs));
    }
    ensure(ok, format!("max residual {worst:.1e}; {}", perturbed.join(", ")))
}

fn derivative_engine() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let p = Params::new();
    let mut worst_order = f64::INFINITY;
    let mut exact = 0;
    for _ in 0..100 {
        let var = if rng.gen_bool(0.5) { Var::X } else { Var::T };
        let (src, ex) = loop {
            let src = random_expr(&mut rng, 4);
            let ex = e(&src);
            if ex.depends_on(var) && ex.size() >= 4 {
                break (src, ex);
            }
        };
        let d = ex.derivative(var).map_err(|err| format!("{src}: {err}"))?;
        let (x, t) = (rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5));
        let at = |h: f64| {
            let (dx, dt) = if var == Var::X { (h, 0.0) } else { (0.0, h) };
            ex.eval(x + dx, t + dt, &p).unwrap()
        };
        let fd = |h: f64| (at(-2.0 * h) - 8.0 * at(-h) + 8.0 * at(h) - at(2.0 * h)) / (12.0 * h);
        let want = d.eval(x, t, &p).unwrap();
        let (e1, e2) = ((fd(0.02) - want).abs(), (fd(0.01) - want).abs());
        let scale = want.abs().max(1.0);
        if e1 <= 1e-10 * scale {
            exact += 1;
            continue;
        }
        worst_order = worst_order.min((e1 / e2).log2());
    }
    let mut ident: f64 = 0.0;
    for _ in 0..1000 {
        let u = rng.gen_range(-10.0..10.0);
        for m in [-1.0, 0.3, 0.9] {
            let (sn, cn, dn) = jacobi(u, m);
            ident = ident.max((sn * sn + cn * cn - 1.0).abs()).max((dn * dn + m * sn * sn - 1.0).abs());
        }
    }
    ensure(
        worst_order >= 2.0 && ident <= 1e-10,
        format!("worst observed order {worst_order:.2} ({exact} of 100 exact), sn²+cn²−1 ≤ {ident:.1e}"),
    )
}

fn constructor_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let grid = GridSpec::new(1.0, 2.0, 401, 0.0, 1.0, 11).unwrap();
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for seed in 0..20 {
        let free = FreeFunctions { c1: e(&random_time_fn(&mut rng)), c2: e(&random_time_fn(&mut rng)), ..Default::default() };
        let g = e(&random_seed_g(&mut rng));
        let (c, _) = construct(&g, &free, &Params::new(), &grid).map_err(|err| err.to_string())?;
        let reps = nlsint::conditions::check_all(&c, &free.c1, &free.c2, &grid, QUADRATURE_TOL, QUADRATURE_TOL)
            .map_err(|err| err.to_string())?;
        for r in reps {
            worst = worst.max(r.relative());
            if !r.pass {
                failures.push(format!("seed {seed} {} {:.2e}", r.condition, r.relative()));
            }
        }
    }
    let c = CoefficientSet::new(e("x^(-2)"), e("x"), Expr::Num(0.0), Expr::Num(0.0));
    let v0 = build_v(&c, &FreeFunctions::default(), &grid).map_err(|err| err.to_string())?;
    let shifted = FreeFunctions { c3: e("0.7*sin(t)"), ..Default::default() };
    let v1 = build_v(&c, &shifted, &grid).map_err(|err| err.to_string())?;
    let mut lin: f64 = 0.0;
    for j in 0..grid.n_t {
        let d3 = 0.7 * grid.t(j).sin();
        for i in 0..grid.n_x {
            let (a, b) = (v0.v.get(i, j), v1.v.get(i, j));
            lin = lin.max(((b - a) - d3).abs() / (1.0f64).max(a.abs()));
        }
    }
    ensure(
        failures.is_empty() && lin <= 1e-12,
        format!("20 seeds, worst relative residual {worst:.2e}{}; c3 linearity {lin:.1e}", if failures.is_empty() { String::new() } else { format!(" [{}]", failures.join("; ")) }),
    )
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("catalog pass suite", catalog_suite),
        ("reduction identity", reduction_identity),
        ("time-only agreement", painleve_agreement),
        ("exact elliptic solution", elliptic_solution),
        ("solver convergence", solver),
        ("lax compatibility", lax),
        ("derivative engine", derivative_engine),
        ("constructor round trip", constructor_round_trip),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("criterion {}: PASS  {name}: {msg} [{secs:.1} s]", k + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {msg} [{secs:.1} s]", k + 1);
            }
        }
    }
    println!("acceptance: {} of 8 criteria pass", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
