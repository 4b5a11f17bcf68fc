//! Jacobi elliptic functions `sn`, `cn`, `dn` for any real parameter `m`.
//!
//! `m` is the parameter (`k² = m`). For `0 ≤ m ≤ 1` the values come from the
//! descending Landen/AGM scheme; `m < 0` is mapped onto `[0, 1)` with the
//! negative-parameter transformation and `m > 1` with the reciprocal one.

/// `(sn, cn, dn)` of `u` at parameter `m`.
pub fn jacobi(u: f64, m: f64) -> (f64, f64, f64) {
    if m < 0.0 {
        // sn(u|m) = sd(v|μ)/√(1-m), cn(u|m) = cd(v|μ), dn(u|m) = nd(v|μ)
        // with μ = -m/(1-m), v = u·√(1-m)
        let s = (1.0 - m).sqrt();
        let mu = -m / (1.0 - m);
        let (sn, cn, dn) = jacobi_unit(u * s, mu);
        (sn / (dn * s), cn / dn, 1.0 / dn)
    } else if m > 1.0 {
        // sn(u|m) = sn(u√m | 1/m)/√m, cn(u|m) = dn(u√m | 1/m), dn(u|m) = cn(u√m | 1/m)
        let s = m.sqrt();
        let (sn, cn, dn) = jacobi_unit(u * s, 1.0 / m);
        (sn / s, dn, cn)
    } else {
        jacobi_unit(u, m)
    }
}

pub fn sn(u: f64, m: f64) -> f64 {
    jacobi(u, m).0
}

pub fn cn(u: f64, m: f64) -> f64 {
    jacobi(u, m).1
}

pub fn dn(u: f64, m: f64) -> f64 {
    jacobi(u, m).2
}

/// `0 ≤ m ≤ 1`.
fn jacobi_unit(u: f64, m: f64) -> (f64, f64, f64) {
    debug_assert!((0.0..=1.0).contains(&m));
    if m == 0.0 {
        return (u.sin(), u.cos(), 1.0);
    }
    let mc = 1.0 - m;
    if mc < 1e-300 {
        let c = 1.0 / u.cosh();
        return (u.tanh(), c, c);
    }
    // AGM descent; the convergence test is on the relative gap, which
    // shrinks quadratically, so 1e-9 leaves a residual gap below 1e-17.
    const GAP: f64 = 1e-9;
    let mut a = 1.0_f64;
    let mut emc = mc;
    let mut em = [0.0_f64; 16];
    let mut en = [0.0_f64; 16];
    let mut levels = 0;
    let mut c = 1.0;
    for i in 0..16 {
        levels = i;
        em[i] = a;
        emc = emc.sqrt();
        en[i] = emc;
        c = 0.5 * (a + emc);
        if (a - emc).abs() <= GAP * a {
            break;
        }
        emc *= a;
        a = c;
    }
    let v = u * c;
    let mut sn = v.sin();
    let mut cn = v.cos();
    let mut dn = 1.0;
    if sn != 0.0 {
        let mut a = cn / sn;
        let mut c = c * a;
        for ii in (0..=levels).rev() {
            let b = em[ii];
            a *= c;
            c *= dn;
            dn = (en[ii] + a) / (b + a);
            a = c / b;
        }
        let a = 1.0 / (c * c + 1.0).sqrt();
        sn = if sn >= 0.0 { a } else { -a };
        cn = c * sn;
    }
    (sn, cn, dn)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// RK4 on sn'' = 2m·sn³ − (1+m)·sn, sn(0) = 0, sn'(0) = 1.
    fn sn_by_ode(u: f64, m: f64, steps: usize) -> f64 {
        let h = u / steps as f64;
        let rhs = |y: f64, p: f64| (p, 2.0 * m * y * y * y - (1.0 + m) * y);
        let (mut y, mut p) = (0.0_f64, 1.0_f64);
        for _ in 0..steps {
            let (k1y, k1p) = rhs(y, p);
            let (k2y, k2p) = rhs(y + 0.5 * h * k1y, p + 0.5 * h * k1p);
            let (k3y, k3p) = rhs(y + 0.5 * h * k2y, p + 0.5 * h * k2p);
            let (k4y, k4p) = rhs(y + h * k3y, p + h * k3p);
            y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
            p += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        }
        y
    }

    #[test]
    fn sn_vanishes_at_origin() {
        for m in [-3.0, -1.0, 0.0, 0.3, 0.5, 0.99, 1.0, 2.5] {
            assert_eq!(sn(0.0, m), 0.0);
            assert_eq!(cn(0.0, m), 1.0);
            assert_eq!(dn(0.0, m), 1.0);
        }
    }

    #[test]
    fn sn_at_negative_unit_parameter_matches_ode() {
        let oracle = sn_by_ode(1.0, -1.0, 20_000);
        assert!((sn(1.0, -1.0) - oracle).abs() <= 1e-12 * oracle.abs(), "{} vs {oracle}", sn(1.0, -1.0));
    }

    #[test]
    fn sn_matches_ode_across_parameters() {
        for m in [-2.0, -1.0, -0.25, 0.1, 0.5, 0.9, 1.0, 1.6] {
            for u in [0.3, 1.0, 2.2] {
                let oracle = sn_by_ode(u, m, 20_000);
                assert!((sn(u, m) - oracle).abs() < 1e-11, "m={m} u={u}: {} vs {oracle}", sn(u, m));
            }
        }
    }

    #[test]
    fn limiting_parameters() {
        for u in [-2.0, 0.4, 1.7] {
            assert!((sn(u, 0.0) - f64::sin(u)).abs() < 1e-15);
            assert!((sn(u, 1.0) - f64::tanh(u)).abs() < 1e-15);
            assert!((cn(u, 1.0) - 1.0 / f64::cosh(u)).abs() < 1e-15);
        }
    }

    #[test]
    fn pythagorean_identities() {
        for m in [-1.0, 0.0, 0.5, 1.0] {
            let mut u = -3.0;
            while u <= 3.0 {
                let (s, c, d) = jacobi(u, m);
                assert!((s * s + c * c - 1.0).abs() < 1e-10, "m={m} u={u}");
                assert!((d * d + m * s * s - 1.0).abs() < 1e-10, "m={m} u={u}");
                u += 0.01;
            }
        }
    }

    #[test]
    fn odd_and_even_symmetry() {
        for m in [-1.0, 0.7] {
            let (s, c, d) = jacobi(1.3, m);
            let (sm, cm, dm) = jacobi(-1.3, m);
            assert_eq!(s, -sm);
            assert_eq!(c, cm);
            assert_eq!(d, dm);
        }
    }
}
