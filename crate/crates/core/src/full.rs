//! Full propagation: slowly varying envelope equations in the optical length
//! τ, driven by the velocity-averaged steady-state polarization.
//!
//! With Ω in units of γ31 each envelope obeys dΩ/dτ = i·c·ρ̃, where ρ̃ is the
//! averaged rotating-frame coherence of its transition and c is
//! [`AtomicMedium::field_coupling`].

use std::cell::RefCell;

use num_complex::Complex64;

use crate::bloch::DensityMatrixState;
use crate::config::ScenarioConfig;
use crate::constants::HBAR;
use crate::doppler::{averaged_coherences, velocity_grid, VelocityGrid};
use crate::error::Result;
use crate::medium::{AtomicMedium, FieldState, Wave};
use crate::ode::{integrate, OdeOptions};
use crate::trajectory::{Invariants, PathKind, PropagationTrajectory, Sample};

type C = Complex64;

/// dΩ/dτ of the three waves.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaxwellRhs {
    pub d_rabi: [C; 3],
}

impl MaxwellRhs {
    /// Laboratory amplitude/phase form: (dE/dz, E·dφ/dz) per wave, in
    /// statvolt/cm per cm (gauss per cm for the THz wave), with φ the phase
    /// of the real field cos(ωt − kz + φ).
    pub fn amplitude_phase_rates(&self, medium: &AtomicMedium, fields: &FieldState) -> [(f64, f64); 3] {
        let p = fields.phase_factors();
        let dtau_dz = medium.cross_section() * medium.density();
        Wave::ALL.map(|w| {
            let i = w.index();
            let d = medium.dipole(w);
            if d == 0.0 {
                return (0.0, 0.0);
            }
            let scale = 2.0 * HBAR * medium.gamma31() / d * dtau_dz;
            let r = p[i].conj() * self.d_rabi[i];
            (scale * r.re, -scale * r.im)
        })
    }
}

/// Envelope derivatives for the given fields and averaged density matrix.
pub fn maxwell_rhs(fields: &FieldState, sigma: &DensityMatrixState, medium: &AtomicMedium) -> MaxwellRhs {
    let _ = fields;
    let i = C::new(0.0, 1.0);
    let coh = [sigma.rho31, sigma.rho32, sigma.rho21];
    MaxwellRhs {
        d_rabi: Wave::ALL.map(|w| i * medium.field_coupling(w) * coh[w.index()]),
    }
}

fn fields_from(y: &[f64], delta31: f64, delta32: f64) -> FieldState {
    FieldState {
        rabi: [C::new(y[0], y[1]), C::new(y[2], y[3]), C::new(y[4], y[5])],
        delta31,
        delta32,
    }
}

/// Reference intensity I such that u1² + u2² = 1 at the entrance:
/// I = ω0·(I31/ω31 + I32/ω32).
pub fn reference_intensity(medium: &AtomicMedium, intensities: &[f64; 3]) -> f64 {
    medium.omega0()
        * (intensities[0] / medium.omega(Wave::Optical31)
            + intensities[1] / medium.omega(Wave::Optical32))
}

/// Builds trajectory samples from field states.
pub(crate) struct SampleBuilder<'a> {
    pub medium: &'a AtomicMedium,
    pub reference: f64,
    pub zeta_per_tau: f64,
}

impl SampleBuilder<'_> {
    pub fn new(medium: &AtomicMedium, reference: f64) -> SampleBuilder<'_> {
        let zeta_per_tau = if reference > 0.0 {
            medium.zeta_per_tau(reference).unwrap_or(f64::NAN)
        } else {
            f64::NAN
        };
        SampleBuilder {
            medium,
            reference,
            zeta_per_tau,
        }
    }

    pub fn build(&self, tau: f64, intensity: [f64; 3], phi: f64, rho33: f64) -> Sample {
        let usq = if self.reference > 0.0 {
            Wave::ALL.map(|w| self.medium.u_squared(w, intensity[w.index()], self.reference))
        } else {
            [f64::NAN; 3]
        };
        let u = usq.map(f64::sqrt);
        Sample {
            tau,
            z_cm: self.medium.z_from_tau(tau),
            zeta: tau * self.zeta_per_tau,
            intensity,
            usq,
            phi,
            rho33,
            invariants: Invariants::from_amplitudes(u[0], u[1], u[2], phi),
        }
    }
}

/// Loop phase of a field state; zero amplitudes take the phase of the
/// corresponding source so that Φ is defined at the entrance.
fn loop_phase(fields: &FieldState, sigma: &DensityMatrixState) -> f64 {
    let coh = [sigma.rho31, sigma.rho32, sigma.rho21];
    let i = C::new(0.0, 1.0);
    let ph = [0, 1, 2].map(|k| {
        let r = fields.rabi[k];
        if r.norm() > 0.0 {
            r / r.norm()
        } else {
            let s = i * coh[k];
            if s.norm() > 0.0 {
                s / s.norm()
            } else {
                C::new(1.0, 0.0)
            }
        }
    });
    (ph[0] * ph[1].conj() * ph[2].conj()).arg()
}

struct PolarizationCache {
    key: Vec<f64>,
    value: DensityMatrixState,
}

/// Integrate the envelope equations over τ ∈ [0, span].
pub fn propagate_full(config: &ScenarioConfig) -> Result<PropagationTrajectory> {
    let medium = &config.medium;
    let grid = velocity_grid(medium.vp(), config.velocity_nodes)?;
    let f0 = config.initial_fields()?;
    let intensities = config.input_intensities()?;
    let builder = SampleBuilder::new(medium, reference_intensity(medium, &intensities));

    let (d31, d32) = (config.delta31, config.delta32);
    let cache: RefCell<Option<PolarizationCache>> = RefCell::new(None);
    let polarization = |y: &[f64]| -> Result<DensityMatrixState> {
        if config.cache_polarization {
            if let Some(c) = cache.borrow().as_ref() {
                if c.key == y {
                    return Ok(c.value);
                }
            }
        }
        let v = averaged_coherences(medium, &fields_from(y, d31, d32), &grid)?;
        if config.cache_polarization {
            *cache.borrow_mut() = Some(PolarizationCache { key: y.to_vec(), value: v });
        }
        Ok(v)
    };

    let y0: Vec<f64> = f0.rabi.iter().flat_map(|r| [r.re, r.im]).collect();
    let n = config.samples.max(1);
    let outputs: Vec<f64> = (0..n)
        .map(|k| if n == 1 { 0.0 } else { config.span_tau * k as f64 / (n - 1) as f64 })
        .collect();
    let scale = f0.rabi.iter().map(|r| r.norm()).fold(0.0, f64::max).max(1e-300);
    let opts = OdeOptions {
        rtol: config.rtol_full,
        atol: 1e-6 * config.rtol_full * scale,
        ..Default::default()
    };
    let (ys, stats) = integrate(
        |_, y, dy| {
            let s = polarization(y)?;
            let r = maxwell_rhs(&fields_from(y, d31, d32), &s, medium);
            for (k, d) in r.d_rabi.iter().enumerate() {
                dy[2 * k] = d.re;
                dy[2 * k + 1] = d.im;
            }
            Ok(())
        },
        0.0,
        &y0,
        &outputs,
        &opts,
        |_, _, _| true,
    )?;

    let mut samples = Vec::with_capacity(n);
    for (y, &tau) in ys.iter().zip(&outputs) {
        let f = fields_from(y, d31, d32);
        let s = polarization(y)?;
        let intensity = Wave::ALL
            .iter()
            .map(|&w| medium.intensity_of(w, f.g(w)))
            .collect::<Result<Vec<f64>>>()?;
        samples.push(builder.build(tau, [intensity[0], intensity[1], intensity[2]], loop_phase(&f, &s), s.rho33));
    }
    Ok(PropagationTrajectory {
        kind: PathKind::Full,
        samples,
        stats,
    })
}

/// Averaged steady state and envelope derivatives at one point, for callers
/// that need the full-path right-hand side directly.
pub fn full_rhs_at(
    medium: &AtomicMedium,
    fields: &FieldState,
    grid: &VelocityGrid,
) -> Result<(DensityMatrixState, MaxwellRhs)> {
    let s = averaged_coherences(medium, fields, grid)?;
    Ok((s, maxwell_rhs(fields, &s, medium)))
}
