//! Named special cases.

use crate::error::{Error, Result};
use crate::expr::Params;
use crate::grid::{GridSpec, SingularLoci};
use crate::scenario::{CoefficientsFile, FreeFile, GaugeFile, PsiFile, Scenario, ScenarioFile};

pub const NAMES: [&str; 8] = ["case1", "case2", "case3", "case4", "case5", "hd-case1", "hd-case2", "eq19"];

pub const DEFAULT_NX: usize = 401;
pub const DEFAULT_NT: usize = 101;

pub fn describe(name: &str) -> Option<&'static str> {
    Some(match name {
        "case1" => "constant coefficients, linear potential c3 + c4*x; bright soliton when c4 = 0",
        "case2" => "harmonic potential alpha^2 x^2/4 with damping gamma = -alpha/2",
        "case3" => "harmonic potential with nonlinearity exp(alpha*t)",
        "case4" => "power-law coefficients g = x^n, f = x^(-2n)",
        "case5" => "time-dependent f, g, gamma with quadratic potential",
        "hd-case1" => "drift n/x, constant effective mass, g = x^n",
        "hd-case2" => "power-law effective mass, g = x^p, q = 4p",
        "eq19" => "g = t^2 x^3 with an exact elliptic-function solution",
        _ => return None,
    })
}

fn s(v: &str) -> Option<String> {
    Some(v.to_string())
}

fn default_params(name: &str) -> Params {
    let mut p = Params::new();
    match name {
        "case2" | "case3" => {
            p.insert("alpha".into(), 0.5);
        }
        "case4" | "hd-case1" => {
            p.insert("n".into(), 1.0);
        }
        "hd-case2" => {
            p.insert("p".into(), 1.0);
        }
        _ => {}
    }
    p
}

/// The scenario file for `name`, with `overrides` applied to its parameters.
pub fn catalog_file(name: &str, overrides: &Params) -> Result<ScenarioFile> {
    if describe(name).is_none() {
        return Err(Error::Scenario(format!("unknown catalog entry `{name}`; known: {}", NAMES.join(", "))));
    }
    let mut params = default_params(name);
    for (k, v) in overrides {
        params.insert(k.clone(), *v);
    }
    let grid = |x_min, x_max, t_min, t_max| GridSpec { x_min, x_max, n_x: DEFAULT_NX, t_min, t_max, n_t: DEFAULT_NT };
    let origin = SingularLoci { x: vec![0.0], t: vec![] };
    let free = |c1: &str, c2: &str| FreeFile { c1: s(c1), c2: s(c2), c3: s("0"), c4: s("0"), k1i: s("0") };
    let coeffs = |f: &str, g: &str, gamma: &str, v: &str| CoefficientsFile { f: s(f), g: g.into(), gamma: s(gamma), v: s(v), h: None };
    let mut file = ScenarioFile {
        name: name.into(),
        params: params.clone(),
        coefficients: coeffs("1", "1", "0", "c3 + c4*x"),
        free: free("1", "1"),
        grid: grid(-10.0, 10.0, 0.0, 1.0),
        psi_ref: None,
        gauge: None,
        singular: SingularLoci::default(),
    };
    match name {
        "case1" => {
            file.params.entry("c3".into()).or_insert(0.0);
            file.params.entry("c4".into()).or_insert(0.0);
            file.free.c3 = s("c3");
            file.free.c4 = s("c4");
            if file.params["c4"] == 0.0 {
                file.psi_ref = Some(PsiFile::Polar { abs: "sqrt(2)*sech(x)".into(), phase: "(1 + c3)*t".into() });
            }
        }
        "case2" => {
            file.coefficients = coeffs("1", "1", "-alpha/2", "alpha^2*x^2/4");
            file.free = free("1", "exp(alpha*t)");
            file.grid = grid(-5.0, 5.0, 0.0, 1.0);
        }
        "case3" => {
            file.coefficients = coeffs("1", "exp(alpha*t)", "0", "alpha^2*x^2/4");
            file.free = free("exp(2*alpha*t)", "exp(2*alpha*t)");
            file.grid = grid(-5.0, 5.0, 0.0, 1.0);
        }
        "case4" => {
            if (params["n"] + 1.0).abs() < 1e-12 {
                return Err(Error::Scenario("case4 needs n != -1".into()));
            }
            file.coefficients = coeffs("x^(-2*n)", "x^n", "0", "-n*(n + 2)*x^(-2*(n + 1))/4");
            file.grid = grid(0.5, 3.0, 0.0, 1.0);
            file.singular = origin;
        }
        "case5" => {
            file.coefficients = coeffs("1 + 0.5*sin(t)", "exp(-0.2*t)", "0.1*cos(t)", "auto");
            file.free = free("(1 + 0.5*sin(t))*exp(-0.4*t)", "exp(-0.4*t - 0.2*sin(t))");
            file.grid = grid(-5.0, 5.0, 0.0, 2.0);
        }
        "hd-case1" => {
            file.coefficients = CoefficientsFile {
                h: s("n/x"),
                ..coeffs("1", "x^n", "0", "n*(n - 2)/(4*x^2)")
            };
            file.free = free("x_min^(2*n)", "1");
            file.grid = grid(0.5, 3.0, 0.0, 1.0);
            file.singular = origin;
        }
        "hd-case2" => {
            if (params["p"] - 0.5).abs() < 1e-12 {
                return Err(Error::Scenario("hd-case2 needs p != 1/2".into()));
            }
            file.coefficients = CoefficientsFile {
                h: s("2*p*x^(2*p - 1)"),
                ..coeffs("x^(2*p)", "x^p", "0", "-p*(2 - 3*p)*x^(2*(p - 1))/4")
            };
            file.free = free("x_min^(4*p)", "1");
            file.grid = grid(0.5, 3.0, 0.0, 1.0);
            file.singular = origin;
        }
        "eq19" => {
            file.coefficients = coeffs("1", "t^2*x^3", "0", "3*x^2/(16*t^2) - 3/(4*x^2)");
            file.free = free("t^4", "t^4");
            file.grid = grid(0.7, 3.0, 0.5, 2.0);
            file.singular = SingularLoci { x: vec![0.0], t: vec![0.0] };
            let amp = "sn(t*x^2/sqrt(8), -1)/sqrt(x)";
            file.psi_ref = Some(PsiFile::Cartesian {
                re: format!("cos(x^2/(8*t))*{amp}"),
                im: format!("-sin(x^2/(8*t))*{amp}"),
            });
            file.gauge = Some(GaugeFile {
                beta: "-0.5*log(x)".into(),
                gamma: s("0"),
                c1: "t*x_min^2/2".into(),
                c2: "t".into(),
                c_theta: "-(x_min^2)/(8*t)".into(),
                c_f: "1".into(),
                epsilon: 1.0,
                delta: 1.0,
                c8: 1.0,
            });
        }
        _ => unreachable!(),
    }
    Ok(file)
}

pub fn catalog(name: &str, overrides: &Params) -> Result<Scenario> {
    catalog_file(name, overrides)?.resolve()
}

/// The homogeneous solution `Q(X)` named on the command line.
pub fn named_q(name: &str) -> Option<crate::expr::ComplexExpr> {
    let q = match name {
        "sn" => "-sn(x/sqrt(2), -1)",
        "sech" => "sqrt(2)*sech(x)",
        _ => return None,
    };
    Some(crate::expr::ComplexExpr::real(crate::expr::parse(q).expect("builtin Q parses")))
}
