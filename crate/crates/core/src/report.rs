use crate::grid::{GridSpec, RealField};
use serde::{Deserialize, Serialize};

pub const DEFAULT_TOL: f64 = 1e-8;
/// For potentials that come out of quadrature rather than closed form.
pub const QUADRATURE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub condition: String,
    pub max_abs: f64,
    pub rms: f64,
    /// Largest magnitude of a single term of the condition over the grid.
    pub normalization: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub grid: GridSpec,
    /// Location `[x, t]` of `max_abs`.
    pub max_at: [f64; 2],
}

impl ResidualReport {
    /// `residual` and `scale` are pointwise; `scale` holds the largest term
    /// magnitude at each point.
    pub fn from_samples(condition: &str, residual: &RealField, scale: Option<&RealField>, tolerance: f64) -> ResidualReport {
        let g = residual.grid;
        let mut max_abs: f64 = 0.0;
        let mut arg = 0;
        let mut sum_sq = 0.0;
        for (k, r) in residual.data.iter().enumerate() {
            let a = r.abs();
            // NaN must never look like a pass
            if a > max_abs || a.is_nan() && !max_abs.is_nan() {
                max_abs = a;
                arg = k;
            }
            sum_sq += a * a;
        }
        let rms = (sum_sq / residual.data.len() as f64).sqrt();
        let normalization = scale.map(|s| s.max_abs()).unwrap_or(0.0);
        let pass = max_abs <= tolerance * normalization.max(1.0);
        ResidualReport {
            condition: condition.to_string(),
            max_abs,
            rms,
            normalization,
            tolerance,
            pass,
            grid: g,
            max_at: [g.x(arg % g.n_x), g.t(arg / g.n_x)],
        }
    }

    /// Relative measure `max_abs / max(1, normalization)`.
    pub fn relative(&self) -> f64 {
        self.max_abs / self.normalization.max(1.0)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_is_relative_to_normalization() {
        let g = GridSpec::new(0.0, 1.0, 3, 0.0, 0.0, 1).unwrap();
        let r = RealField::new(g, vec![0.0, 1e-5, -2e-5]).unwrap();
        let s = RealField::new(g, vec![1e3, 1e3, 1e3]).unwrap();
        let rep = ResidualReport::from_samples("demo", &r, Some(&s), 1e-8);
        assert_eq!(rep.max_abs, 2e-5);
        assert_eq!(rep.max_at, [1.0, 0.0]);
        assert!(!rep.pass);
        let rep = ResidualReport::from_samples("demo", &r, Some(&s), 1e-7);
        assert!(rep.pass);
        let json = rep.to_json();
        for key in ["condition", "max_abs", "rms", "normalization", "tolerance", "pass", "grid"] {
            assert!(json.get(key).is_some(), "{key}");
        }
    }

    #[test]
    fn nan_fails() {
        let g = GridSpec::new(0.0, 1.0, 3, 0.0, 0.0, 1).unwrap();
        let r = RealField::new(g, vec![0.0, f64::NAN, 0.0]).unwrap();
        assert!(!ResidualReport::from_samples("nan", &r, None, 1.0).pass);
    }
}
