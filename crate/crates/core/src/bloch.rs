//! Steady state of one velocity class of the closed-loop Λ atom.
//!
//! The atom is described in the frame rotating with the three fields. With
//! ħ = 1 and rates in units of γ31 the Hamiltonian is
//!
//! ```text
//!     H = diag(0, −(Δ31' − Δ32'), −Δ31') − (Ω31|3⟩⟨1| + Ω32|3⟩⟨2| + ΩT|2⟩⟨1| + h.c.)
//! ```
//!
//! with Doppler-shifted detunings Δ' = Δ − k·vz. Relaxation is Lindbladian:
//! |3⟩ decays to |1⟩ and |2⟩ at γ31 and γ32, |2⟩ decays to |1⟩ at γ21, and
//! the operator sqrt(Γ/2)·(|1⟩⟨1| − |2⟩⟨2|) dephases σ21 at Γ.

use nalgebra::{Matrix3, SMatrix, SVector, U10, U9};
use num_complex::Complex64;

use crate::error::{invalid, Result, SimError};
use crate::medium::{AtomicMedium, FieldState, Wave};

type C = Complex64;

/// Dimension of the real coordinate vector.
pub const DIM: usize = 9;

/// Populations and rotating-frame coherences ρ̄_ns = ⟨n|ρ̄|s⟩ (n > s).
///
/// The loop-phase referenced coherences σ_ns are obtained with
/// [`DensityMatrixState::referenced`].
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct DensityMatrixState {
    pub rho11: f64,
    pub rho22: f64,
    pub rho33: f64,
    pub rho21: C,
    pub rho31: C,
    pub rho32: C,
}

impl DensityMatrixState {
    pub fn trace(&self) -> f64 {
        self.rho11 + self.rho22 + self.rho33
    }

    pub fn to_coords(&self) -> SVector<f64, DIM> {
        SVector::<f64, DIM>::from_column_slice(&[
            self.rho11,
            self.rho22,
            self.rho33,
            self.rho21.re,
            self.rho21.im,
            self.rho31.re,
            self.rho31.im,
            self.rho32.re,
            self.rho32.im,
        ])
    }

    pub fn from_coords(x: &SVector<f64, DIM>) -> Self {
        DensityMatrixState {
            rho11: x[0],
            rho22: x[1],
            rho33: x[2],
            rho21: C::new(x[3], x[4]),
            rho31: C::new(x[5], x[6]),
            rho32: C::new(x[7], x[8]),
        }
    }

    /// Full Hermitian 3×3 matrix.
    pub fn matrix(&self) -> Matrix3<C> {
        let r = |x: f64| C::new(x, 0.0);
        Matrix3::new(
            r(self.rho11),
            self.rho21.conj(),
            self.rho31.conj(),
            self.rho21,
            r(self.rho22),
            self.rho32.conj(),
            self.rho31,
            self.rho32,
            r(self.rho33),
        )
    }

    fn from_matrix(m: &Matrix3<C>) -> Self {
        DensityMatrixState {
            rho11: m[(0, 0)].re,
            rho22: m[(1, 1)].re,
            rho33: m[(2, 2)].re,
            rho21: m[(1, 0)],
            rho31: m[(2, 0)],
            rho32: m[(2, 1)],
        }
    }

    /// Smallest eigenvalue of the density matrix.
    pub fn min_eigenvalue(&self) -> f64 {
        self.matrix()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Coherences with the field phases removed, (σ31, σ32, σ21).
    pub fn referenced(&self, fields: &FieldState) -> [C; 3] {
        let p = fields.phase_factors();
        [
            self.rho31 * p[0].conj(),
            self.rho32 * p[1].conj(),
            self.rho21 * p[2].conj(),
        ]
    }

    /// Weighted sum `self + w·other`.
    pub fn add_scaled(&self, w: f64, other: &Self) -> Self {
        DensityMatrixState {
            rho11: self.rho11 + w * other.rho11,
            rho22: self.rho22 + w * other.rho22,
            rho33: self.rho33 + w * other.rho33,
            rho21: self.rho21 + other.rho21 * w,
            rho31: self.rho31 + other.rho31 * w,
            rho32: self.rho32 + other.rho32 * w,
        }
    }
}

/// Real linear generator of the density-matrix evolution in the
/// coordinates of [`DensityMatrixState::to_coords`].
#[derive(Clone, Debug, PartialEq)]
pub struct Generator {
    matrix: SMatrix<f64, DIM, DIM>,
}

impl Generator {
    pub fn matrix(&self) -> &SMatrix<f64, DIM, DIM> {
        &self.matrix
    }

    /// Time derivative of `state` (units of γ31).
    pub fn apply(&self, state: &DensityMatrixState) -> SVector<f64, DIM> {
        self.matrix * state.to_coords()
    }
}

struct Rates {
    g31: f64,
    g32: f64,
    g21: f64,
    dephasing: f64,
}

fn lindblad_rhs(h: &Matrix3<C>, rates: &Rates, rho: &Matrix3<C>) -> Matrix3<C> {
    let i = C::new(0.0, 1.0);
    let mut out = (h * rho - rho * h) * (-i);
    let g3 = rates.g31 + rates.g32;
    let r33 = rho[(2, 2)].re;
    let r22 = rho[(1, 1)].re;
    out[(0, 0)] += C::new(rates.g31 * r33 + rates.g21 * r22, 0.0);
    out[(1, 1)] += C::new(rates.g32 * r33 - rates.g21 * r22, 0.0);
    out[(2, 2)] -= C::new(g3 * r33, 0.0);
    let decay = [
        ((1, 0), 0.5 * rates.g21 + rates.dephasing),
        ((2, 0), 0.5 * g3 + 0.25 * rates.dephasing),
        ((2, 1), 0.5 * (g3 + rates.g21) + 0.25 * rates.dephasing),
    ];
    for ((n, s), rate) in decay {
        out[(n, s)] -= rho[(n, s)] * rate;
        out[(s, n)] -= rho[(s, n)] * rate;
    }
    out
}

/// Rotating-frame Hamiltonian for atoms with axial velocity `vz` (cm/s).
fn hamiltonian(medium: &AtomicMedium, fields: &FieldState, vz: f64) -> Matrix3<C> {
    let d31 = fields.delta31 - medium.scaled_doppler(Wave::Optical31, vz);
    let d32 = fields.delta32 - medium.scaled_doppler(Wave::Optical32, vz);
    let [o31, o32, ot] = fields.rabi;
    let zero = C::new(0.0, 0.0);
    Matrix3::new(
        zero,
        -ot.conj(),
        -o31.conj(),
        -ot,
        C::new(-(d31 - d32), 0.0),
        -o32.conj(),
        -o31,
        -o32,
        C::new(-d31, 0.0),
    )
}

/// Generator for one velocity class.
pub fn build_generator(medium: &AtomicMedium, fields: &FieldState, vz: f64) -> Generator {
    let h = hamiltonian(medium, fields, vz);
    let [g31, g32, g21, dephasing] = medium.scaled_rates();
    let rates = Rates {
        g31,
        g32,
        g21,
        dephasing,
    };
    let mut matrix = SMatrix::<f64, DIM, DIM>::zeros();
    for j in 0..DIM {
        let mut e = SVector::<f64, DIM>::zeros();
        e[j] = 1.0;
        let basis = DensityMatrixState::from_coords(&e).matrix();
        let out = DensityMatrixState::from_matrix(&lindblad_rhs(&h, &rates, &basis)).to_coords();
        matrix.set_column(j, &out);
    }
    Generator { matrix }
}

/// Ratio below which the stacked system is treated as rank deficient.
const RANK_TOLERANCE: f64 = 64.0 * f64::EPSILON;

/// Unique trace-one kernel vector of the generator.
///
/// Solves the generator stacked with the trace row in the least-squares
/// sense by Householder QR.
pub fn solve_steady_state(generator: &Generator) -> Result<DensityMatrixState> {
    let mut a = SMatrix::<f64, 10, DIM>::zeros();
    a.fixed_view_mut::<DIM, DIM>(0, 0).copy_from(&generator.matrix);
    for j in 0..3 {
        a[(DIM, j)] = 1.0;
    }
    let mut b = SVector::<f64, 10>::zeros();
    b[DIM] = 1.0;

    let qr = nalgebra::QR::<f64, U10, U9>::new(a);
    let r = qr.r();
    let diag: Vec<f64> = (0..DIM).map(|i| r[(i, i)].abs()).collect();
    let max = diag.iter().copied().fold(0.0, f64::max);
    let min = diag.iter().copied().fold(f64::INFINITY, f64::min);
    let ratio = if max > 0.0 { min / max } else { 0.0 };
    if !(ratio > RANK_TOLERANCE) {
        return Err(SimError::NonUniqueSteadyState { ratio });
    }
    let qtb = qr.q().transpose() * b;
    let x = r
        .solve_upper_triangular(&qtb)
        .ok_or(SimError::NonUniqueSteadyState { ratio })?;
    Ok(DensityMatrixState::from_coords(&x))
}

/// Steady state for one velocity class.
pub fn steady_state(medium: &AtomicMedium, fields: &FieldState, vz: f64) -> Result<DensityMatrixState> {
    solve_steady_state(&build_generator(medium, fields, vz))
}

/// First-order (in gT) loop-phase referenced coherences.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FirstOrderCoherences {
    pub sigma31: C,
    pub sigma32: C,
    pub sigma21: C,
}

fn check_g0(g31: f64, g32: f64) -> Result<f64> {
    let g0sq = g31 * g31 + g32 * g32;
    if !(g0sq > 0.0) || !g0sq.is_finite() {
        return Err(invalid("g0", "g31² + g32² must be positive"));
    }
    Ok(g0sq)
}

/// Coherences of the grey state to first order in gT, for equal decay rates,
/// Γ = 0 and exact resonance.
pub fn first_order_sigma(g31: f64, g32: f64, gt: f64, phi: f64) -> Result<FirstOrderCoherences> {
    let g0sq = check_g0(g31, g32)?;
    let (s, c) = phi.sin_cos();
    let asym = (g32 * g32 - g31 * g31) / (g0sq * g0sq);
    Ok(FirstOrderCoherences {
        sigma31: C::new(-gt * g32 * asym * c, gt * g32 / g0sq * s),
        sigma32: C::new(gt * g31 * asym * c, -gt * g31 / g0sq * s),
        sigma21: C::new(-g31 * g32 / g0sq * c, -g31 * g32 / g0sq * s),
    })
}

/// Metastable populations (ρ11, ρ22) to first order in gT.
pub fn first_order_populations(g31: f64, g32: f64, gt: f64, phi: f64, gamma: f64) -> Result<(f64, f64)> {
    let g0sq = check_g0(g31, g32)?;
    let shift = 2.0 * gt * g31 * g32 * gamma * phi.sin() / (g0sq * g0sq);
    Ok((g32 * g32 / g0sq - shift, g31 * g31 / g0sq + shift))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::medium::{IntensityConvention, MediumParams, OpticalDipoles};
    use nalgebra::SVD;
    use std::f64::consts::PI;

    fn medium(gamma32: f64, gamma21: f64, dephasing: f64, temperature: f64) -> AtomicMedium {
        AtomicMedium::new(MediumParams {
            lambda31_cm: 517.27e-7,
            lambda32_cm: 518.36e-7,
            omega_t: None,
            gamma31: 3.46e7,
            gamma32: gamma32 * 3.46e7,
            gamma21: gamma21 * 3.46e7,
            dephasing: dephasing * 3.46e7,
            density_cm3: 1e12,
            temperature_k: temperature,
            mass_amu: 24.0,
            optical_dipoles: OpticalDipoles::FromDecay,
            intensity_convention: IntensityConvention::Gaussian,
            dipole_phases: [0.0; 3],
        })
        .unwrap()
    }

    fn check_invariants(s: &DensityMatrixState) {
        assert!((s.trace() - 1.0).abs() < 1e-10, "trace {}", s.trace());
        for p in [s.rho11, s.rho22, s.rho33] {
            assert!((-1e-10..=1.0 + 1e-10).contains(&p), "population {p}");
        }
        assert!(s.min_eigenvalue() >= -1e-8, "eigenvalue {}", s.min_eigenvalue());
    }

    /// Kernel from the SVD of the bare generator, normalised to unit trace.
    fn svd_kernel(g: &Generator) -> DensityMatrixState {
        let svd = SVD::new(g.matrix().clone_owned(), false, true);
        let vt = svd.v_t.unwrap();
        let (imin, _) = svd
            .singular_values
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, &s)| if s < acc.1 { (i, s) } else { acc });
        let v: SVector<f64, DIM> = vt.row(imin).transpose();
        let tr = v[0] + v[1] + v[2];
        DensityMatrixState::from_coords(&(v / tr))
    }

    /// Replace the ρ11 equation with the trace condition and LU-solve.
    fn lu_kernel(g: &Generator) -> DensityMatrixState {
        let mut a = g.matrix().clone_owned();
        let mut b = SVector::<f64, DIM>::zeros();
        for j in 0..DIM {
            a[(0, j)] = if j < 3 { 1.0 } else { 0.0 };
        }
        b[0] = 1.0;
        DensityMatrixState::from_coords(&a.lu().solve(&b).unwrap())
    }

    fn max_diff(a: &DensityMatrixState, b: &DensityMatrixState) -> f64 {
        (a.to_coords() - b.to_coords()).amax()
    }

    #[test]
    fn trace_preservation() {
        let m = medium(1.66, 1e-3, 2e-3, 800.0);
        let f = FieldState {
            rabi: [C::new(3.0, 1.0), C::new(0.5, -2.0), C::new(0.1, 0.3)],
            delta31: 0.7,
            delta32: -0.4,
        };
        let g = build_generator(&m, &f, 3e3);
        for j in 0..DIM {
            let col_sum = g.matrix()[(0, j)] + g.matrix()[(1, j)] + g.matrix()[(2, j)];
            assert!(col_sum.abs() < 1e-15, "column {j}: {col_sum}");
        }
    }

    #[test]
    fn no_drive_relaxes_to_ground() {
        let m = medium(1.66, 1e-2, 1e-2, 0.0);
        let s = steady_state(&m, &FieldState::from_amplitudes(0.0, 0.0, 0.0, 0.0), 0.0).unwrap();
        assert!((s.rho11 - 1.0).abs() < 1e-12);
        check_invariants(&s);
    }

    #[test]
    fn no_drive_no_relaxation_is_non_unique() {
        let m = medium(1.0, 0.0, 0.0, 0.0);
        let r = steady_state(&m, &FieldState::from_amplitudes(0.0, 0.0, 0.0, 0.0), 0.0);
        assert!(matches!(r, Err(SimError::NonUniqueSteadyState { .. })), "{r:?}");
    }

    #[test]
    fn perfect_dark_state() {
        let m = medium(1.0, 0.0, 0.0, 0.0);
        let s = steady_state(&m, &FieldState::from_amplitudes(2.0, 2.0, 0.0, 0.0), 0.0).unwrap();
        assert!(s.rho33.abs() < 1e-13);
        assert!(s.rho31.norm() < 1e-13 && s.rho32.norm() < 1e-13);
        assert!((s.rho21.norm() - 0.5).abs() < 1e-12);
        check_invariants(&s);
    }

    #[test]
    fn dark_state_is_in_kernel() {
        let m = medium(1.66, 0.0, 0.0, 0.0);
        let (g31, g32) = (3.0, 0.7);
        let g = build_generator(&m, &FieldState::from_amplitudes(g31, g32, 0.0, 0.0), 0.0);
        let n = g31 * g31 + g32 * g32;
        // |NC⟩ ∝ g32|1⟩ − g31|2⟩
        let nc = DensityMatrixState {
            rho11: g32 * g32 / n,
            rho22: g31 * g31 / n,
            rho33: 0.0,
            rho21: C::new(-g31 * g32 / n, 0.0),
            rho31: C::new(0.0, 0.0),
            rho32: C::new(0.0, 0.0),
        };
        assert!(g.apply(&nc).amax() < 1e-14);
    }

    #[test]
    fn agrees_with_independent_factorisations() {
        let m = medium(1.66, 1e-3, 2e-3, 800.0);
        let cases = [
            (FieldState::from_amplitudes(60.0, 20.0, 0.3, 0.4), 0.0),
            (FieldState::from_amplitudes(10.0, 0.1, 1e-3, PI / 2.0), 5e4),
            (
                FieldState {
                    rabi: [C::new(1.0, 2.0), C::new(-0.3, 0.4), C::new(0.05, -0.02)],
                    delta31: 1.5,
                    delta32: -0.5,
                },
                -2e4,
            ),
        ];
        for (f, vz) in cases {
            let g = build_generator(&m, &f, vz);
            let s = solve_steady_state(&g).unwrap();
            check_invariants(&s);
            assert!(g.apply(&s).amax() < 1e-11 * g.matrix().amax().max(1.0));
            assert!(max_diff(&s, &svd_kernel(&g)) < 1e-10);
            assert!(max_diff(&s, &lu_kernel(&g)) < 1e-10);
        }
    }

    #[test]
    fn first_order_examples() {
        let f = first_order_sigma(1.0, 1.0, 0.01, PI / 2.0).unwrap();
        assert!((f.sigma21.im + 0.5).abs() < 1e-15);
        assert!((f.sigma31.im - 0.005).abs() < 1e-15);
        assert!((f.sigma32.im + 0.005).abs() < 1e-15);
        let t = first_order_sigma(3.0, 2.0, 0.1, 0.0).unwrap();
        assert_eq!([t.sigma31.im, t.sigma32.im, t.sigma21.im], [0.0, 0.0, 0.0]);
        let e = first_order_sigma(2.0, 2.0, 0.1, 0.8).unwrap();
        assert_eq!([e.sigma31.re, e.sigma32.re], [0.0, 0.0]);
        assert!(first_order_sigma(0.0, 0.0, 0.1, 0.0).is_err());
    }

    #[test]
    fn first_order_population_examples() {
        let (a, b) = first_order_populations(3.0, 1.0, 0.0, 0.4, 1.0).unwrap();
        assert!((a - 0.1).abs() < 1e-15 && (b - 0.9).abs() < 1e-15);
        let (a, b) = first_order_populations(1.0, 1.0, 0.01, PI / 2.0, 1.0).unwrap();
        assert!((b - a - 0.01).abs() < 1e-15);
        assert!(first_order_populations(0.0, 0.0, 0.01, 0.0, 1.0).is_err());
    }

    #[test]
    fn solver_matches_first_order_coherences() {
        let m = medium(1.0, 0.0, 0.0, 0.0);
        let (g31, g32, gt, phi) = (10.0, 0.1, 1e-5, PI / 2.0);
        let f = FieldState::from_amplitudes(g31, g32, gt, phi);
        let s = steady_state(&m, &f, 0.0).unwrap();
        let [s31, s32, s21] = s.referenced(&f);
        let fo = first_order_sigma(g31, g32, gt, phi).unwrap();
        let scale = gt * gt / (g31 * g31 + g32 * g32);
        assert!((s31 - fo.sigma31).norm() < 10.0 * scale + 1e-13);
        assert!((s32 - fo.sigma32).norm() < 10.0 * scale + 1e-13);
        // At g31 ≠ g32 the σ21 coherence carries an extra first-order term
        // −gT(g31² − g32²)/g0⁴ in its imaginary part.
        let extra = -gt * (g31 * g31 - g32 * g32) / (g31 * g31 + g32 * g32).powi(2);
        assert!((s21 - fo.sigma21 - C::new(0.0, extra)).norm() < 10.0 * scale + 1e-13);
    }

    #[test]
    fn solver_population_shift_magnitude_matches_first_order() {
        let m = medium(1.0, 0.0, 0.0, 0.0);
        let (g31, g32, gt, phi) = (1.3, 0.9, 1e-5, 1.0);
        let s = steady_state(&m, &FieldState::from_amplitudes(g31, g32, gt, phi), 0.0).unwrap();
        let (r11, r22) = first_order_populations(g31, g32, gt, phi, 1.0).unwrap();
        let (d11, _) = first_order_populations(g31, g32, 0.0, phi, 1.0).unwrap();
        let solver_shift = s.rho11 - d11;
        let formula_shift = r11 - d11;
        assert!((solver_shift.abs() - formula_shift.abs()).abs() < 1e-3 * formula_shift.abs());
        // The closed-form correction carries the opposite sign.
        assert!(solver_shift * formula_shift < 0.0);
        assert!((r11 + r22 - 1.0).abs() < 1e-15);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(64))]

        #[test]
        fn steady_state_invariants(
            g31 in 0.01f64..100.0, g32 in 0.01f64..100.0, gt in 0.0f64..1.0,
            phi in -PI..PI, d31 in -5.0f64..5.0, d32 in -5.0f64..5.0, vz in -2e5f64..2e5,
        ) {
            let m = medium(1.66, 1e-6, 1e-3, 800.0);
            let mut f = FieldState::from_amplitudes(g31, g32, gt, phi);
            f.delta31 = d31;
            f.delta32 = d32;
            let g = build_generator(&m, &f, vz);
            let s = solve_steady_state(&g).unwrap();
            proptest::prop_assert!((s.trace() - 1.0).abs() < 1e-10);
            proptest::prop_assert!(s.min_eigenvalue() >= -1e-8);
            proptest::prop_assert!(g.apply(&s).amax() < 1e-11 * g.matrix().amax().max(1.0));
        }

        #[test]
        fn invariant_under_two_pi_shift(phi in -PI..PI, gt in 0.0f64..0.5) {
            let m = medium(1.66, 1e-6, 1e-3, 0.0);
            let a = steady_state(&m, &FieldState::from_amplitudes(5.0, 2.0, gt, phi), 0.0).unwrap();
            let b = steady_state(&m, &FieldState::from_amplitudes(5.0, 2.0, gt, phi + 2.0 * PI), 0.0).unwrap();
            proptest::prop_assert!((a.to_coords() - b.to_coords()).amax() < 1e-12);
        }
    }
}
