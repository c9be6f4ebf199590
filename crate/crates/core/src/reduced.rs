//! Reduced dimensionless three-wave system in the nonlinear length ζ.
//!
//! The amplitude/phase equations are singular where an amplitude vanishes,
//! so the integrator works with complex amplitudes
//!
//! ```text
//!     A1' = −i·A2·AT,   A2' = −i·A1·conj(AT),   AT' = −i·A1·conj(A2)
//! ```
//!
//! with u = |A| and Φ = arg A1 − arg A2 − arg AT. This form conserves S, B,
//! C and Π, and passes through amplitude zeros with the expected π jumps of Φ.

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::ode::{integrate, OdeOptions, StepStats};
use crate::trajectory::Invariants;

type C = Complex64;

/// Dimensionless amplitudes, loop phase and position.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReducedState {
    pub u1: f64,
    pub u2: f64,
    pub ut: f64,
    pub phi: f64,
    pub zeta: f64,
}

/// Amplitudes below this are treated as zero when forming dΦ/dζ.
pub const AMPLITUDE_FLOOR: f64 = 1e-12;

pub fn constants_of_motion(state: &ReducedState) -> Invariants {
    Invariants::from_amplitudes(state.u1, state.u2, state.ut, state.phi)
}

/// Derivatives (du1, du2, duT, dΦ) with respect to ζ.
///
/// A wave whose amplitude is below [`AMPLITUDE_FLOOR`] has its phase slaved
/// to its source and contributes nothing to dΦ/dζ.
pub fn reduced_rhs(state: &ReducedState) -> [f64; 4] {
    let ReducedState { u1, u2, ut, phi, .. } = *state;
    let (s, c) = phi.sin_cos();
    let term = |num: f64, den: f64| if den < AMPLITUDE_FLOOR { 0.0 } else { num / den };
    let dpsi1 = -term(u2 * ut, u1) * c;
    let dpsi2 = -term(u1 * ut, u2) * c;
    let dpsit = -term(u1 * u2, ut) * c;
    [-u2 * ut * s, u1 * ut * s, u1 * u2 * s, dpsi1 - dpsi2 - dpsit]
}

fn complex_rhs(y: &[f64], dy: &mut [f64]) {
    let i = C::new(0.0, 1.0);
    let a1 = C::new(y[0], y[1]);
    let a2 = C::new(y[2], y[3]);
    let at = C::new(y[4], y[5]);
    let d1 = -i * a2 * at;
    let d2 = -i * a1 * at.conj();
    let dt = -i * a1 * a2.conj();
    dy.copy_from_slice(&[d1.re, d1.im, d2.re, d2.im, dt.re, dt.im]);
}

/// Amplitudes and loop phase of a complex state. A zero amplitude takes the
/// phase of its source term.
fn to_state(y: &[f64], zeta: f64) -> ReducedState {
    let i = C::new(0.0, 1.0);
    let a1 = C::new(y[0], y[1]);
    let a2 = C::new(y[2], y[3]);
    let at = C::new(y[4], y[5]);
    let phase = |a: C, source: C| if a.norm() > 0.0 { a.arg() } else { source.arg() };
    let p1 = phase(a1, -i * a2 * at);
    let p2 = phase(a2, -i * a1 * at.conj());
    let pt = phase(at, -i * a1 * a2.conj());
    let phi = C::from_polar(1.0, p1 - p2 - pt).arg();
    ReducedState {
        u1: a1.norm(),
        u2: a2.norm(),
        ut: at.norm(),
        phi,
        zeta,
    }
}

fn invariants_of(y: &[f64]) -> Invariants {
    let a1 = C::new(y[0], y[1]);
    let a2 = C::new(y[2], y[3]);
    let at = C::new(y[4], y[5]);
    let (n1, n2, nt) = (a1.norm_sqr(), a2.norm_sqr(), at.norm_sqr());
    Invariants {
        s: n1 + n2,
        b: n1 + nt,
        c: nt - n2,
        pi: (a1 * a2.conj() * at.conj()).re,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReducedOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Largest drift of any constant of motion accepted over the whole run.
    /// Each step may use its share `budget·h/span`.
    pub invariant_budget: f64,
    pub samples: usize,
}

impl Default for ReducedOptions {
    fn default() -> Self {
        ReducedOptions {
            rtol: 1e-9,
            atol: 1e-12,
            invariant_budget: 5e-10,
            samples: 401,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReducedTrajectory {
    pub states: Vec<ReducedState>,
    pub stats: StepStats,
}

/// Integrate from `initial` over ζ ∈ [initial.zeta, initial.zeta + span],
/// sampled at `opts.samples` equidistant points.
pub fn propagate_reduced(initial: &ReducedState, span: f64, opts: &ReducedOptions) -> Result<ReducedTrajectory> {
    for (name, v) in [("u1", initial.u1), ("u2", initial.u2), ("uT", initial.ut)] {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(invalid(name, format!("must be non-negative, got {v}")));
        }
    }
    if !(span >= 0.0) || !span.is_finite() {
        return Err(invalid("span", format!("must be non-negative, got {span}")));
    }
    let s = initial.u1 * initial.u1 + initial.u2 * initial.u2;
    if (s - 1.0).abs() > 1e-9 {
        return Err(invalid("initial", format!("u1² + u2² must equal 1, got {s}")));
    }
    let samples = if span == 0.0 { 1 } else { opts.samples.max(2) };
    let z0 = initial.zeta;
    let outputs: Vec<f64> = (0..samples)
        .map(|k| if samples == 1 { 0.0 } else { span * k as f64 / (samples - 1) as f64 })
        .collect();
    let at = C::from_polar(initial.ut, -initial.phi);
    let y0 = [initial.u1, 0.0, initial.u2, 0.0, at.re, at.im];
    // A per-step share keeps the total within budget, and unlike a check
    // against the entrance values a step can always be shrunk to satisfy it.
    let per_unit = opts.invariant_budget / span.max(f64::MIN_POSITIVE);
    let ode = OdeOptions {
        rtol: opts.rtol,
        atol: opts.atol,
        ..Default::default()
    };
    let (ys, stats) = integrate(
        |_, y, dy| {
            complex_rhs(y, dy);
            Ok(())
        },
        0.0,
        &y0,
        &outputs,
        &ode,
        |h, previous, candidate| {
            let drift = invariants_of(candidate).max_diff(&invariants_of(previous));
            drift <= (per_unit * h).max(4.0 * f64::EPSILON)
        },
    )?;
    let mut states: Vec<ReducedState> =
        ys.iter().zip(&outputs).map(|(y, &t)| to_state(y, z0 + t)).collect();
    // The entrance keeps its configured phase when every amplitude is set.
    if initial.u1 > 0.0 && initial.u2 > 0.0 && initial.ut > 0.0 {
        states[0].phi = initial.phi;
    }
    Ok(ReducedTrajectory { states, stats })
}
