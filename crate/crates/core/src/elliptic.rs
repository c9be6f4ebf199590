//! Complete elliptic integral K, Jacobi elliptic functions and the closed-form
//! generation solution built from them.
//!
//! Everything here is self-contained (AGM and descending Landen), so it can
//! serve as an independent oracle for the ODE integrators.

use std::f64::consts::PI;

use crate::error::{domain, Result};
use crate::medium::AtomicMedium;

/// Elliptic modulus k together with m = k² and the complementary parameter
/// m1 = 1 − m, kept separately so that k → 1 does not lose digits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EllipticModulus {
    k: f64,
    m: f64,
    m1: f64,
}

impl EllipticModulus {
    pub fn from_k(k: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&k) {
            return Err(domain("EllipticModulus", format!("k must lie in [0, 1], got {k}")));
        }
        Ok(EllipticModulus {
            k,
            m: k * k,
            m1: (1.0 - k) * (1.0 + k),
        })
    }

    /// Modulus from the complementary parameter m1 = 1 − k².
    pub fn from_complement(m1: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&m1) {
            return Err(domain("EllipticModulus", format!("m1 must lie in [0, 1], got {m1}")));
        }
        let m = 1.0 - m1;
        Ok(EllipticModulus { k: m.sqrt(), m, m1 })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn m1(&self) -> f64 {
        self.m1
    }

    /// K(k); rejected at k = 1.
    pub fn complete_k(&self) -> Result<f64> {
        if self.m1 <= 0.0 {
            return Err(domain("complete_K", "K diverges at k = 1"));
        }
        Ok(PI / (2.0 * agm(1.0, self.m1.sqrt())))
    }

    /// sn, cn, dn at `x`.
    pub fn jacobi(&self, x: f64) -> Jacobi {
        jacobi_all(x, self)
    }
}

fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..64 {
        if (a - b).abs() <= 1e-16 * a {
            break;
        }
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
    }
    a
}

/// Complete elliptic integral of the first kind, K(k) for 0 ≤ k < 1.
pub fn complete_k(k: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&k) {
        return Err(domain("complete_K", format!("k must lie in [0, 1), got {k}")));
    }
    EllipticModulus::from_k(k)?.complete_k()
}

/// The three Jacobi functions at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jacobi {
    pub sn: f64,
    pub cn: f64,
    pub dn: f64,
}

impl Jacobi {
    pub fn cd(&self) -> f64 {
        self.cn / self.dn
    }
}

fn jacobi_all(x: f64, modulus: &EllipticModulus) -> Jacobi {
    if modulus.m1 == 0.0 {
        let sech = 1.0 / x.cosh();
        return Jacobi {
            sn: x.tanh(),
            cn: sech,
            dn: sech,
        };
    }
    if modulus.m == 0.0 {
        return Jacobi {
            sn: x.sin(),
            cn: x.cos(),
            dn: 1.0,
        };
    }
    // Reduce to one real period so the Landen angle stays small.
    let period = 4.0 * PI / (2.0 * agm(1.0, modulus.m1.sqrt()));
    let x = if x.abs() > period {
        x - period * (x / period).round()
    } else {
        x
    };

    const MAX_LEVELS: usize = 32;
    let mut a = [0.0f64; MAX_LEVELS + 1];
    let mut c = [0.0f64; MAX_LEVELS + 1];
    a[0] = 1.0;
    c[0] = modulus.m.sqrt();
    let mut b = modulus.m1.sqrt();
    let mut n = 0;
    while n < MAX_LEVELS && c[n].abs() > 1e-17 {
        let an = 0.5 * (a[n] + b);
        c[n + 1] = 0.5 * (a[n] - b);
        b = (a[n] * b).sqrt();
        a[n + 1] = an;
        n += 1;
    }
    let mut phi = (1u64 << n) as f64 * a[n] * x;
    let mut phi_prev = phi;
    for level in (1..=n).rev() {
        phi_prev = phi;
        phi = 0.5 * (phi + (c[level] * phi.sin() / a[level]).asin());
    }
    let sn = phi.sin();
    let cn = phi.cos();
    let dn = if n == 0 { 1.0 } else { cn / (phi_prev - phi).cos() };
    Jacobi { sn, cn, dn }
}

/// sn(x; k) for 0 ≤ k ≤ 1.
pub fn jacobi_sn(x: f64, k: f64) -> Result<f64> {
    Ok(EllipticModulus::from_k(k)?.jacobi(x).sn)
}

/// cd(x; k) = cn/dn for 0 ≤ k ≤ 1.
pub fn jacobi_cd(x: f64, k: f64) -> Result<f64> {
    Ok(EllipticModulus::from_k(k)?.jacobi(x).cd())
}

/// Squared amplitudes (u1², u2², uT²) of the generation solution at ζ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalyticPoint {
    pub u1sq: f64,
    pub u2sq: f64,
    pub utsq: f64,
}

/// Closed-form generation solution for uT(0) = 0, with ζ0 = +K:
/// u1² = u10²·sn²(ζ + K), u2² = 1 − u1², uT² = u10²·(1 − sn²(ζ + K)).
pub fn analytic_solution(zeta: f64, u10: f64) -> Result<AnalyticPoint> {
    if !(u10 > 0.0 && u10 < 1.0) {
        return Err(domain("analytic_solution", format!("u10 must lie in (0, 1), got {u10}")));
    }
    analytic_solution_modulus(zeta, &EllipticModulus::from_k(u10)?)
}

/// [`analytic_solution`] for a modulus given with full precision in m1.
pub fn analytic_solution_modulus(zeta: f64, modulus: &EllipticModulus) -> Result<AnalyticPoint> {
    if !(modulus.m > 0.0 && modulus.m1 > 0.0) {
        return Err(domain("analytic_solution", "u10 must lie strictly inside (0, 1)"));
    }
    // sn(ζ + K) = cd(ζ); evaluating cd directly avoids an error in K.
    let cd = modulus.jacobi(zeta).cd();
    let s2 = cd * cd;
    let u1sq = modulus.m * s2;
    Ok(AnalyticPoint {
        u1sq,
        u2sq: modulus.m1 + modulus.m * (1.0 - s2),
        utsq: modulus.m * (1.0 - s2),
    })
}

/// Length of maximal conversion, ζ_max = K(u10).
pub fn zeta_max(u10: f64) -> Result<f64> {
    if !(u10 > 0.0 && u10 < 1.0) {
        return Err(domain("zeta_max", format!("u10 must lie in (0, 1), got {u10}")));
    }
    complete_k(u10)
}

/// Logarithmic approximation ½·ln(16/u20²) of K for u20² ≪ 1.
pub fn k_log_approx(u20sq: f64) -> Result<f64> {
    if !(u20sq > 0.0 && u20sq < 1.0) {
        return Err(domain("K_log_approx", format!("u20^2 must lie in (0, 1), got {u20sq}")));
    }
    Ok(0.5 * (16.0 / u20sq).ln())
}

/// THz intensity I31(0)·(ωT/ω31)·(1 − cd²(ζ; u10)) in the units of `i31_in`.
pub fn thz_intensity_analytic(zeta: f64, i31_in: f64, medium: &AtomicMedium, u10: f64) -> Result<f64> {
    if !(u10 > 0.0 && u10 < 1.0) {
        return Err(domain("thz_intensity_analytic", format!("u10 must lie in (0, 1), got {u10}")));
    }
    let cd = jacobi_cd(zeta, u10)?;
    Ok(i31_in * medium.efficiency_bound() * (1.0 - cd * cd))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn k_at_zero_is_half_pi() {
        assert_eq!(complete_k(0.0).unwrap(), PI / 2.0);
    }

    #[test]
    fn k_lemniscatic_value() {
        // Γ(1/4)²/(4√π)
        let expected = 1.854_074_677_301_371_9;
        assert_relative_eq!(complete_k(0.5f64.sqrt()).unwrap(), expected, max_relative = 1e-15);
    }

    #[test]
    fn k_domain() {
        assert!(complete_k(1.0).is_err());
        assert!(complete_k(-0.1).is_err());
        assert!(EllipticModulus::from_k(1.0).unwrap().complete_k().is_err());
    }

    #[test]
    fn k_near_unity_and_log_approx() {
        let m = EllipticModulus::from_complement(0.59e-4).unwrap();
        let k = m.complete_k().unwrap();
        assert!((k - 6.256).abs() < 1e-3, "{k}");
        let approx = k_log_approx(0.59e-4).unwrap();
        assert!((approx - 6.256).abs() < 1e-3, "{approx}");
        let tiny = EllipticModulus::from_complement(1e-6).unwrap().complete_k().unwrap();
        assert!(((tiny - k_log_approx(1e-6).unwrap()) / tiny).abs() < 1e-3);
        assert!(k_log_approx(16.0).is_err());
        assert!(k_log_approx(0.0).is_err());
    }

    #[test]
    fn degenerate_moduli() {
        for x in [0.3, 1.0, 2.0] {
            assert_relative_eq!(jacobi_sn(x, 0.0).unwrap(), x.sin(), epsilon = 1e-15);
            assert_relative_eq!(jacobi_sn(x, 1.0).unwrap(), x.tanh(), epsilon = 1e-15);
        }
    }

    #[test]
    fn quarter_period_values() {
        for k in [0.1, 0.5, 0.9, 0.999, 0.999_999] {
            let kk = complete_k(k).unwrap();
            assert!((jacobi_sn(kk, k).unwrap() - 1.0).abs() < 1e-12, "k = {k}");
            assert_eq!(jacobi_cd(0.0, k).unwrap(), 1.0);
        }
    }

    #[test]
    fn shift_identity() {
        for k in [0.2, 0.7, 0.95, 0.9999] {
            let kk = complete_k(k).unwrap();
            for i in 0..40 {
                let x = -5.0 + 0.37 * i as f64;
                let a = jacobi_sn(x + kk, k).unwrap();
                let b = jacobi_cd(x, k).unwrap();
                assert!((a - b).abs() < 1e-11, "k = {k}, x = {x}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn analytic_boundary_and_period() {
        let u10 = (1.0f64 - 0.59e-4).sqrt();
        let p0 = analytic_solution(0.0, u10).unwrap();
        assert_eq!(p0.utsq, 0.0);
        assert_relative_eq!(p0.u1sq, u10 * u10, max_relative = 1e-15);
        let kk = zeta_max(u10).unwrap();
        let pk = analytic_solution(kk, u10).unwrap();
        assert_relative_eq!(pk.utsq, u10 * u10, max_relative = 1e-10);
        let p2 = analytic_solution(2.0 * kk, u10).unwrap();
        assert!((p2.utsq - p0.utsq).abs() < 1e-10);
        assert!(analytic_solution(0.1, 0.0).is_err());
        assert!(analytic_solution(0.1, 1.0).is_err());
    }

    #[test]
    fn both_zeta0_signs_agree() {
        for k in [0.3, 0.8, 0.99] {
            let kk = complete_k(k).unwrap();
            for i in 0..25 {
                let z = 0.29 * i as f64;
                let plus = jacobi_sn(z + kk, k).unwrap();
                let minus = jacobi_sn(z - kk, k).unwrap();
                assert!((plus * plus - minus * minus).abs() < 1e-12);
            }
        }
    }

    proptest::proptest! {
        #[test]
        fn pythagorean_identities(x in -30.0f64..30.0, k in 0.0f64..1.0) {
            let j = EllipticModulus::from_k(k).unwrap().jacobi(x);
            proptest::prop_assert!((j.sn * j.sn + j.cn * j.cn - 1.0).abs() < 1e-11);
            proptest::prop_assert!((j.dn * j.dn + k * k * j.sn * j.sn - 1.0).abs() < 1e-11);
        }

        #[test]
        fn photon_count_identity(z in 0.0f64..20.0, m1 in 1e-6f64..0.99) {
            let m = EllipticModulus::from_complement(m1).unwrap();
            let p = analytic_solution_modulus(z, &m).unwrap();
            proptest::prop_assert!(((p.utsq + p.u1sq) / m.m() - 1.0).abs() < 1e-13);
            proptest::prop_assert!((p.u1sq + p.u2sq - 1.0).abs() < 1e-13);
        }
    }
}
