//! Scenario files: coefficients, free functions, grid and optional exact
//! solution and gauge, as JSON.
//!
//! The parameters `x_min`, `x_max`, `t_min`, `t_max` are always bound to the
//! grid, so expressions may refer to them.

use crate::conditions::{check_all, CoefficientSet, Potential};
use crate::constructor::{build_f, build_gamma, build_v, build_v_timeonly, FreeFunctions};
use crate::error::{Error, Result};
use crate::expr::{parse, ComplexExpr, Expr, Params, Var};
use crate::grid::{GridSpec, SingularLoci};
use crate::report::{ResidualReport, QUADRATURE_TOL};
use crate::similarity::{transform, GaugeSpec, TransformResult};
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const AUTO: &str = "auto";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CoefficientsFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<String>,
    pub g: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FreeFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c1: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c2: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c3: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c4: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k1i: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PsiFile {
    Cartesian {
        re: String,
        #[serde(default = "zero")]
        im: String,
    },
    Polar {
        abs: String,
        phase: String,
    },
}

fn zero() -> String {
    "0".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaugeFile {
    pub beta: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<String>,
    #[serde(default = "zero")]
    pub c1: String,
    pub c2: String,
    #[serde(default = "zero")]
    pub c_theta: String,
    #[serde(default = "one")]
    pub c_f: String,
    #[serde(default = "unit")]
    pub epsilon: f64,
    #[serde(default = "unit")]
    pub delta: f64,
    #[serde(default = "unit")]
    pub c8: f64,
}

fn one() -> String {
    "1".into()
}

fn unit() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub name: String,
    #[serde(default)]
    pub params: Params,
    pub coefficients: CoefficientsFile,
    #[serde(default)]
    pub free: FreeFile,
    pub grid: GridSpec,
    #[serde(default)]
    pub psi_ref: Option<PsiFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gauge: Option<GaugeFile>,
    #[serde(default, skip_serializing_if = "is_empty_loci")]
    pub singular: SingularLoci,
}

fn is_empty_loci(l: &SingularLoci) -> bool {
    l.x.is_empty() && l.t.is_empty()
}

impl ScenarioFile {
    pub fn from_json_str(s: &str) -> Result<ScenarioFile> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn load(path: &Path) -> Result<ScenarioFile> {
        ScenarioFile::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn resolve(&self) -> Result<Scenario> {
        Scenario::from_file(self)
    }
}

/// A resolved scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub coefficients: CoefficientSet,
    pub free: FreeFunctions,
    pub grid: GridSpec,
    pub psi_ref: Option<ComplexExpr>,
    pub gauge: Option<GaugeSpec>,
    /// True when `v` came out of quadrature.
    pub quadrature_v: bool,
    pub file: ScenarioFile,
}

fn expr(what: &str, s: &str) -> Result<Expr> {
    parse(s).map_err(|e| Error::Scenario(format!("{what}: {e}")))
}

fn is_auto(s: &Option<String>) -> bool {
    s.as_deref().is_none_or(|s| s.trim() == AUTO)
}

fn grid_params(mut params: Params, grid: &GridSpec) -> Params {
    params.insert("x_min".into(), grid.x_min);
    params.insert("x_max".into(), grid.x_max);
    params.insert("t_min".into(), grid.t_min);
    params.insert("t_max".into(), grid.t_max);
    params
}

impl Scenario {
    pub fn from_file(file: &ScenarioFile) -> Result<Scenario> {
        let grid = file.grid;
        grid.validate()?;
        grid.check_singular(&file.singular)?;
        let params = grid_params(file.params.clone(), &grid);
        let opt = |what: &str, s: &Option<String>, default: f64| -> Result<Expr> {
            match s {
                Some(s) => expr(what, s),
                None => Ok(Expr::Num(default)),
            }
        };
        let free = FreeFunctions {
            c1: opt("c1", &file.free.c1, 1.0)?,
            c2: opt("c2", &file.free.c2, 1.0)?,
            c3: opt("c3", &file.free.c3, 0.0)?,
            c4: opt("c4", &file.free.c4, 0.0)?,
            k1i: opt("k1i", &file.free.k1i, 0.0)?,
        };
        free.validate()?;
        let co = &file.coefficients;
        let g = expr("g", &co.g)?;
        let f = if is_auto(&co.f) { build_f(&g, &free.c1) } else { expr("f", co.f.as_deref().unwrap())? };
        let gamma = if is_auto(&co.gamma) {
            build_gamma(&g, &free.c2)?
        } else {
            expr("gamma", co.gamma.as_deref().unwrap())?
        };
        let h = co.h.as_deref().map(|s| expr("h", s)).transpose()?;
        let mut c = CoefficientSet::new(f.clone(), g.clone(), gamma.clone(), Expr::Num(0.0)).with_params(params.clone());
        if let Some(h) = h {
            c = c.with_h(h);
        }
        let mut quadrature_v = false;
        if is_auto(&co.v) {
            if !c.is_flat() {
                return Err(Error::Scenario("v = auto is not available with a drift term h".into()));
            }
            let t_only = |e: &Expr| !e.simplify().depends_on(Var::X);
            if t_only(&f) && t_only(&g) && t_only(&gamma) {
                c.v = Potential::Analytic(build_v_timeonly(&f, &g, &gamma, &free)?);
            } else {
                // a recognized closed form is still only as good as the quadrature
                let built = build_v(&c, &free, &grid)?;
                quadrature_v = true;
                c.v = match &built.closed_form {
                    Some(e) => Potential::Analytic(e.clone()),
                    None => built.potential(),
                };
            }
        } else {
            c.v = Potential::Analytic(expr("v", co.v.as_deref().unwrap())?);
        }
        let psi_ref = match &file.psi_ref {
            None => None,
            Some(PsiFile::Cartesian { re, im }) => Some(ComplexExpr::new(expr("psi_ref.re", re)?, expr("psi_ref.im", im)?)),
            Some(PsiFile::Polar { abs, phase }) => Some(ComplexExpr::polar(expr("psi_ref.abs", abs)?, expr("psi_ref.phase", phase)?)),
        };
        let gauge = match &file.gauge {
            None => None,
            Some(gf) => Some(GaugeSpec {
                beta: expr("gauge.beta", &gf.beta)?,
                gamma: match &gf.gamma {
                    Some(s) => expr("gauge.gamma", s)?,
                    None => gamma.clone(),
                },
                c1: expr("gauge.c1", &gf.c1)?,
                c2: expr("gauge.c2", &gf.c2)?,
                c_theta: expr("gauge.c_theta", &gf.c_theta)?,
                c_f: expr("gauge.c_f", &gf.c_f)?,
                epsilon: gf.epsilon,
                delta: gf.delta,
                c8: gf.c8,
                params: params.clone(),
            }),
        };
        Ok(Scenario {
            name: file.name.clone(),
            coefficients: c,
            free,
            grid,
            psi_ref,
            gauge,
            quadrature_v,
            file: file.clone(),
        })
    }

    pub fn params(&self) -> &Params {
        &self.coefficients.params
    }

    /// The same scenario on another grid.
    pub fn with_grid(&self, grid: GridSpec) -> Result<Scenario> {
        let mut f = self.file.clone();
        f.grid = grid;
        Scenario::from_file(&f)
    }

    /// Residuals of every applicable condition. Quadrature potentials are
    /// held to at least [`QUADRATURE_TOL`].
    pub fn check(&self, tol: f64) -> Result<Vec<ResidualReport>> {
        let v_tol = if self.quadrature_v { tol.max(QUADRATURE_TOL) } else { tol };
        check_all(&self.coefficients, &self.free.c1, &self.free.c2, &self.grid, tol, v_tol)
    }

    /// The equation the gauge maps onto the homogeneous one: `f` from the
    /// scenario, `g`, `γ` from the gauge and `v` sampled from the transform.
    /// The returned scenario keeps `file` unchanged, so `with_grid` on it
    /// gives back the original equation.
    pub fn gauge_equation(&self) -> Result<(Scenario, TransformResult)> {
        let gs = self.gauge.as_ref().ok_or_else(|| Error::Scenario(format!("scenario `{}` has no gauge", self.name)))?;
        let f = &self.coefficients.f;
        let tr = transform(gs, Some(f), None, &self.grid)?;
        let g = tr.g_expr.clone().expect("g is analytic when f is");
        let mut c = CoefficientSet::new(f.clone(), g, gs.gamma.clone(), Expr::Num(0.0)).with_params(self.params().clone());
        c.v = Potential::Sampled { v: tr.v.clone(), v_x: None };
        let scn = Scenario { coefficients: c, quadrature_v: true, ..self.clone() };
        Ok((scn, tr))
    }

    /// The scenario file with `f`, `γ` written out, and `v` too unless it
    /// came from quadrature (then it stays `auto` and is rebuilt on load).
    pub fn completed(&self) -> ScenarioFile {
        let mut f = self.file.clone();
        let c = &self.coefficients;
        f.coefficients.f = Some(c.f.to_string());
        f.coefficients.gamma = Some(c.gamma.to_string());
        f.coefficients.v = Some(match (&c.v, self.quadrature_v) {
            (Potential::Analytic(e), false) => e.to_string(),
            _ => AUTO.into(),
        });
        f
    }
}
