//! Sampling expressions and their exact derivatives on grids.

use crate::error::Result;
use crate::expr::{diff, ComplexExpr, Expr, Params, Var};
use crate::grid::{ComplexField, GridSpec, RealField};
use num_complex::Complex64;

pub fn sample(e: &Expr, params: &Params, grid: &GridSpec) -> Result<RealField> {
    let prog = e.compile(params)?;
    if let Some(c) = prog.as_constant() {
        return Ok(RealField::filled(*grid, c));
    }
    let mut stack = Vec::with_capacity(32);
    Ok(RealField::from_fn(*grid, |x, t| prog.eval_with(&mut stack, x, t))?)
}

pub fn sample_complex(e: &ComplexExpr, params: &Params, grid: &GridSpec) -> Result<ComplexField> {
    let re = sample(&e.re, params, grid)?;
    let im = sample(&e.im, params, grid)?;
    Ok(re.zip_map(&im, Complex64::new))
}

const GL_NODES: [f64; 5] = [0.0, -0.5384693101056831, 0.5384693101056831, -0.906179845938664, 0.906179845938664];
const GL_WEIGHTS: [f64; 5] = [
    0.5688888888888889,
    0.47862867049936647,
    0.47862867049936647,
    0.23692688505618908,
    0.23692688505618908,
];

/// `∫_{x_min}^{x} e dx'` at every grid node, by five-point Gauss–Legendre
/// on each cell.
pub fn cumint_expr(e: &Expr, params: &Params, grid: &GridSpec) -> Result<RealField> {
    let prog = e.compile(params)?;
    let mut stack = Vec::with_capacity(32);
    let mut out = RealField::filled(*grid, 0.0);
    let h = grid.dx();
    for j in 0..grid.n_t {
        let t = grid.t(j);
        let mut acc = 0.0;
        for i in 1..grid.n_x {
            let mid = grid.x(i - 1) + 0.5 * h;
            let mut cell = 0.0;
            for (z, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
                cell += w * prog.eval_with(&mut stack, mid + 0.5 * h * z, t)?;
            }
            acc += 0.5 * h * cell;
            out.data[grid.index(i, j)] = acc;
        }
    }
    out.check_finite()?;
    Ok(out)
}

/// `∂^order e / ∂var^order` sampled on the grid; `order = 0` samples `e`.
pub fn sample_diff(e: &Expr, var: Var, order: usize, params: &Params, grid: &GridSpec) -> Result<RealField> {
    if order == 0 {
        return sample(e, params, grid);
    }
    sample(&diff(e, var, order)?, params, grid)
}

/// `e` and its first `max_order` derivatives in `var`.
pub fn sample_jet(e: &Expr, var: Var, max_order: usize, params: &Params, grid: &GridSpec) -> Result<Vec<RealField>> {
    let mut out = vec![sample(e, params, grid)?];
    let mut d = e.simplify();
    for _ in 0..max_order {
        d = d.derivative(var)?;
        out.push(sample(&d, params, grid)?);
    }
    Ok(out)
}

/// Reject expressions that depend on `x`.
pub fn require_time_only(name: &str, e: &Expr) -> Result<()> {
    if e.simplify().depends_on(Var::X) {
        return Err(crate::Error::Precondition(format!("{name} = `{e}` depends on x")));
    }
    Ok(())
}

/// Reject grids on which the sampled field vanishes.
pub fn require_nonzero(name: &str, field: &RealField) -> Result<()> {
    if let Some(k) = field.data.iter().position(|v| *v == 0.0) {
        let g = field.grid;
        return Err(crate::Error::Singular {
            what: format!("{name} vanishes"),
            x: g.x(k % g.n_x),
            t: g.t(k / g.n_x),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    #[test]
    fn gauss_legendre_cumint_is_exact_for_logs() {
        let grid = GridSpec::new(0.5, 3.0, 21, 0.0, 1.0, 2).unwrap();
        let r = cumint_expr(&parse("2/x").unwrap(), &Params::new(), &grid).unwrap();
        for i in 0..21 {
            let want = 2.0 * (grid.x(i) / 0.5).ln();
            assert!((r.get(i, 1) - want).abs() < 1e-12, "{i}");
        }
    }
}
