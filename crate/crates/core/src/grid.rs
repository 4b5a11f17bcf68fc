//! Uniform space-time grids, sampled fields, cumulative quadrature and
//! finite differences.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("invalid grid: {0}")]
    Invalid(String),
    #[error("grid contains the singular point {var} = {at}")]
    Singular { var: &'static str, at: f64 },
    #[error("field length {found} does not match grid ({expected})")]
    Length { expected: usize, found: usize },
    #[error("non-finite sample at x = {x}, t = {t}")]
    NonFinite { x: f64, t: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub n_x: usize,
    pub t_min: f64,
    pub t_max: f64,
    pub n_t: usize,
}

/// Points a scenario declares off-limits, e.g. `x = 0` for power-law
/// coefficients.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SingularLoci {
    #[serde(default)]
    pub x: Vec<f64>,
    #[serde(default)]
    pub t: Vec<f64>,
}

impl GridSpec {
    pub fn new(x_min: f64, x_max: f64, n_x: usize, t_min: f64, t_max: f64, n_t: usize) -> Result<GridSpec, GridError> {
        let g = GridSpec { x_min, x_max, n_x, t_min, t_max, n_t };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), GridError> {
        let finite = [self.x_min, self.x_max, self.t_min, self.t_max].iter().all(|v| v.is_finite());
        if !finite {
            return Err(GridError::Invalid("bounds must be finite".into()));
        }
        if self.x_min >= self.x_max {
            return Err(GridError::Invalid(format!("x_min {} >= x_max {}", self.x_min, self.x_max)));
        }
        if self.t_min > self.t_max {
            return Err(GridError::Invalid(format!("t_min {} > t_max {}", self.t_min, self.t_max)));
        }
        if self.n_x < 3 {
            return Err(GridError::Invalid(format!("n_x = {} < 3", self.n_x)));
        }
        if self.n_t < 1 {
            return Err(GridError::Invalid("n_t = 0".into()));
        }
        if self.n_t == 1 && self.t_min != self.t_max {
            return Err(GridError::Invalid("n_t = 1 requires t_min = t_max".into()));
        }
        Ok(())
    }

    /// Reject the grid when its closed rectangle touches a declared locus.
    pub fn check_singular(&self, loci: &SingularLoci) -> Result<(), GridError> {
        for &x in &loci.x {
            if (self.x_min..=self.x_max).contains(&x) {
                return Err(GridError::Singular { var: "x", at: x });
            }
        }
        for &t in &loci.t {
            if (self.t_min..=self.t_max).contains(&t) {
                return Err(GridError::Singular { var: "t", at: t });
            }
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_x - 1) as f64
    }

    /// Zero for a single time level.
    pub fn dt(&self) -> f64 {
        if self.n_t > 1 {
            (self.t_max - self.t_min) / (self.n_t - 1) as f64
        } else {
            0.0
        }
    }

    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.n_x {
            self.x_max
        } else {
            self.x_min + i as f64 * self.dx()
        }
    }

    pub fn t(&self, j: usize) -> f64 {
        if self.n_t > 1 && j + 1 == self.n_t {
            self.t_max
        } else {
            self.t_min + j as f64 * self.dt()
        }
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.n_x).map(|i| self.x(i)).collect()
    }

    pub fn ts(&self) -> Vec<f64> {
        (0..self.n_t).map(|j| self.t(j)).collect()
    }

    pub fn len(&self) -> usize {
        self.n_x * self.n_t
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major: all x at the first time, then the next time, ...
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.n_x + i
    }

    /// Same x range, single time level.
    pub fn at_time(&self, t: f64) -> GridSpec {
        GridSpec { t_min: t, t_max: t, n_t: 1, ..*self }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Field<T> {
    pub grid: GridSpec,
    pub data: Vec<T>,
}

pub type RealField = Field<f64>;
pub type ComplexField = Field<Complex64>;

impl<T: Copy> Field<T> {
    pub fn new(grid: GridSpec, data: Vec<T>) -> Result<Field<T>, GridError> {
        if data.len() != grid.len() {
            return Err(GridError::Length { expected: grid.len(), found: data.len() });
        }
        Ok(Field { grid, data })
    }

    pub fn filled(grid: GridSpec, value: T) -> Field<T> {
        Field { grid, data: vec![value; grid.len()] }
    }

    pub fn from_fn<E>(grid: GridSpec, mut f: impl FnMut(f64, f64) -> Result<T, E>) -> Result<Field<T>, E> {
        let mut data = Vec::with_capacity(grid.len());
        for j in 0..grid.n_t {
            let t = grid.t(j);
            for i in 0..grid.n_x {
                data.push(f(grid.x(i), t)?);
            }
        }
        Ok(Field { grid, data })
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[self.grid.index(i, j)]
    }

    pub fn row(&self, j: usize) -> &[T] {
        &self.data[j * self.grid.n_x..(j + 1) * self.grid.n_x]
    }

    pub fn row_mut(&mut self, j: usize) -> &mut [T] {
        let n = self.grid.n_x;
        &mut self.data[j * n..(j + 1) * n]
    }

    pub fn column(&self, i: usize) -> Vec<T> {
        (0..self.grid.n_t).map(|j| self.get(i, j)).collect()
    }

    pub fn map<U>(&self, f: impl Fn(T) -> U) -> Field<U> {
        Field { grid: self.grid, data: self.data.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_map<U: Copy, V>(&self, other: &Field<U>, f: impl Fn(T, U) -> V) -> Field<V> {
        assert_eq!(self.grid, other.grid, "grids differ");
        Field {
            grid: self.grid,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }
}

impl RealField {
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn check_finite(&self) -> Result<(), GridError> {
        match self.data.iter().position(|v| !v.is_finite()) {
            None => Ok(()),
            Some(k) => {
                let (i, j) = (k % self.grid.n_x, k / self.grid.n_x);
                Err(GridError::NonFinite { x: self.grid.x(i), t: self.grid.t(j) })
            }
        }
    }
}

impl ComplexField {
    pub fn abs(&self) -> RealField {
        self.map(|z| z.norm())
    }

    /// Discrete L² norm of one time level (trapezoid in x).
    pub fn l2_norm_row(&self, j: usize) -> f64 {
        let row = self.row(j);
        let n = row.len();
        let mut s = 0.0;
        for (i, z) in row.iter().enumerate() {
            let w = if i == 0 || i + 1 == n { 0.5 } else { 1.0 };
            s += w * z.norm_sqr();
        }
        (s * self.grid.dx()).sqrt()
    }
}

/// Cumulative integral of uniformly spaced samples, zero at the first node.
///
/// Even nodes use composite Simpson; odd nodes add a four-point
/// cubic-interpolation panel to the preceding even node.
pub fn cumint(samples: &[f64], h: f64) -> Vec<f64> {
    let n = samples.len();
    assert!(n >= 3, "cumint needs at least 3 samples");
    let f = samples;
    let mut out = vec![0.0; n];
    let mut k = 2;
    while k < n {
        out[k] = out[k - 2] + h / 3.0 * (f[k - 2] + 4.0 * f[k - 1] + f[k]);
        k += 2;
    }
    let mut k = 1;
    while k < n {
        out[k] = if k + 2 < n {
            out[k - 1] + h / 24.0 * (9.0 * f[k - 1] + 19.0 * f[k] - 5.0 * f[k + 1] + f[k + 2])
        } else if k + 1 < n && k >= 2 {
            out[k - 1] + h / 24.0 * (-f[k - 2] + 13.0 * f[k - 1] + 13.0 * f[k] - f[k + 1])
        } else if k + 1 < n {
            out[k - 1] + h / 12.0 * (5.0 * f[k - 1] + 8.0 * f[k] - f[k + 1])
        } else if k >= 3 {
            // last node of an even-length row: close the panel backwards
            out[k - 1] + h / 24.0 * (9.0 * f[k] + 19.0 * f[k - 1] - 5.0 * f[k - 2] + f[k - 3])
        } else {
            out[k - 1] + h / 12.0 * (5.0 * f[k] + 8.0 * f[k - 1] - f[k - 2])
        };
        k += 2;
    }
    out
}

/// Row-wise cumulative integral in x from `x_min`.
pub fn cumint_x(field: &RealField) -> Result<RealField, GridError> {
    if field.grid.n_x < 3 {
        return Err(GridError::Invalid(format!("n_x = {} < 3", field.grid.n_x)));
    }
    let h = field.grid.dx();
    let mut data = Vec::with_capacity(field.data.len());
    for j in 0..field.grid.n_t {
        data.extend(cumint(field.row(j), h));
    }
    Ok(Field { grid: field.grid, data })
}

const D1_CENTER: [f64; 5] = [1.0, -8.0, 0.0, 8.0, -1.0];
const D1_EDGE: [[f64; 5]; 2] = [
    [-25.0, 48.0, -36.0, 16.0, -3.0],
    [-3.0, -10.0, 18.0, -6.0, 1.0],
];
const D2_CENTER: [f64; 5] = [-1.0, 16.0, -30.0, 16.0, -1.0];
const D2_EDGE: [[f64; 6]; 2] = [
    [45.0, -154.0, 214.0, -156.0, 61.0, -10.0],
    [10.0, -15.0, -4.0, 14.0, -6.0, 1.0],
];

/// Fourth-order finite difference (`order` 1 or 2) of uniformly spaced
/// samples, one-sided near the ends. Needs at least 6 samples.
pub fn fd(samples: &[f64], h: f64, order: usize) -> Vec<f64> {
    let n = samples.len();
    assert!(n >= 6, "fd needs at least 6 samples");
    let f = samples;
    let mut out = vec![0.0; n];
    match order {
        1 => {
            for i in 0..n {
                out[i] = if (2..n - 2).contains(&i) {
                    (0..5).map(|k| D1_CENTER[k] * f[i + k - 2]).sum::<f64>() / (12.0 * h)
                } else if i < 2 {
                    (0..5).map(|k| D1_EDGE[i][k] * f[k]).sum::<f64>() / (12.0 * h)
                } else {
                    let e = n - 1 - i;
                    -(0..5).map(|k| D1_EDGE[e][k] * f[n - 1 - k]).sum::<f64>() / (12.0 * h)
                };
            }
        }
        2 => {
            for i in 0..n {
                out[i] = if (2..n - 2).contains(&i) {
                    (0..5).map(|k| D2_CENTER[k] * f[i + k - 2]).sum::<f64>() / (12.0 * h * h)
                } else if i < 2 {
                    (0..6).map(|k| D2_EDGE[i][k] * f[k]).sum::<f64>() / (12.0 * h * h)
                } else {
                    let e = n - 1 - i;
                    (0..6).map(|k| D2_EDGE[e][k] * f[n - 1 - k]).sum::<f64>() / (12.0 * h * h)
                };
            }
        }
        _ => panic!("fd order {order} not supported"),
    }
    out
}

/// x-derivative of every time row.
pub fn fd_x(field: &RealField, order: usize) -> RealField {
    let h = field.grid.dx();
    let mut data = Vec::with_capacity(field.data.len());
    for j in 0..field.grid.n_t {
        data.extend(fd(field.row(j), h, order));
    }
    Field { grid: field.grid, data }
}

/// t-derivative of every x column. Needs n_t ≥ 6.
pub fn fd_t(field: &RealField, order: usize) -> RealField {
    let g = field.grid;
    let mut out = Field::filled(g, 0.0);
    for i in 0..g.n_x {
        let col = fd(&field.column(i), g.dt(), order);
        for (j, v) in col.into_iter().enumerate() {
            out.data[g.index(i, j)] = v;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(x0: f64, x1: f64, nx: usize) -> GridSpec {
        GridSpec::new(x0, x1, nx, 0.0, 1.0, 3).unwrap()
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(GridSpec::new(1.0, 1.0, 10, 0.0, 1.0, 2).is_err());
        assert!(GridSpec::new(0.0, 1.0, 2, 0.0, 1.0, 2).is_err());
        assert!(GridSpec::new(0.0, 1.0, 10, 1.0, 0.0, 2).is_err());
        assert!(GridSpec::new(0.0, 1.0, 10, 0.0, 1.0, 0).is_err());
        assert!(GridSpec::new(0.0, 1.0, 10, 0.5, 0.5, 1).is_ok());
    }

    #[test]
    fn singular_loci() {
        let loci = SingularLoci { x: vec![0.0], t: vec![] };
        assert_eq!(
            grid(-1.0, 1.0, 11).check_singular(&loci),
            Err(GridError::Singular { var: "x", at: 0.0 })
        );
        assert!(grid(0.5, 3.0, 11).check_singular(&loci).is_ok());
    }

    #[test]
    fn row_major_layout() {
        let g = grid(0.0, 1.0, 4);
        let f = RealField::from_fn(g, |x, t| Ok::<_, ()>(x + 10.0 * t)).unwrap();
        assert_eq!(f.data.len(), 12);
        assert_eq!(f.get(3, 1), 1.0 + 5.0);
        assert_eq!(f.row(2)[0], 10.0);
    }

    #[test]
    fn integrates_constant_exactly() {
        let g = grid(0.0, 1.0, 101);
        let one = RealField::filled(g, 1.0);
        let out = cumint_x(&one).unwrap();
        for j in 0..3 {
            assert_eq!(out.get(0, j), 0.0);
            assert!((out.get(100, j) - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn integrates_reciprocal_to_log() {
        let e = std::f64::consts::E;
        let g = grid(1.0, e, 401);
        let f = RealField::from_fn(g, |x, _| Ok::<_, ()>(2.0 / x)).unwrap();
        let out = cumint_x(&f).unwrap();
        assert!((out.get(400, 0) - 2.0).abs() <= 1e-8);
        for i in 0..401 {
            assert!((out.get(i, 1) - 2.0 * g.x(i).ln()).abs() <= 1e-8);
        }
    }

    #[test]
    fn fourth_order_at_every_node() {
        // cubics are exact on both panel types; three nodes only reach quadratics
        let s = cumint(&[0.0, 1.0, 4.0], 1.0);
        assert!((s[1] - 1.0 / 3.0).abs() < 1e-15 && (s[2] - 8.0 / 3.0).abs() < 1e-15);
        for n in [4, 5, 8, 9] {
            let h = 0.3;
            let s: Vec<f64> = (0..n).map(|i| (i as f64 * h).powi(3) - 2.0 * i as f64 * h).collect();
            let out = cumint(&s, h);
            for (i, v) in out.iter().enumerate() {
                let x = i as f64 * h;
                assert!((v - (x.powi(4) / 4.0 - x * x)).abs() < 1e-12, "n={n} i={i}");
            }
        }
    }

    #[test]
    fn differences_are_exact_on_quartics() {
        let h = 0.1;
        let s: Vec<f64> = (0..12).map(|i| (i as f64 * h).powi(4)).collect();
        let d1 = fd(&s, h, 1);
        let d2 = fd(&s, h, 2);
        for i in 0..12 {
            let x = i as f64 * h;
            assert!((d1[i] - 4.0 * x.powi(3)).abs() < 1e-10, "d1 at {i}");
            assert!((d2[i] - 12.0 * x * x).abs() < 1e-9, "d2 at {i}");
        }
    }
}
