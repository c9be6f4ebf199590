//! Atomic medium, field state and the conversions between laboratory and
//! internal units.
//!
//! Internally every rate and Rabi frequency is measured in units of γ31 and
//! propagation is measured by the optical length τ. Laboratory units
//! (W/cm², cm, K) only appear at the boundaries of this module.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::{AMU, C_LIGHT, ERG_PER_S_PER_WATT, HBAR, K_BOLTZMANN};
use crate::error::{invalid, Result, SimError};

/// Relative tolerance of the multiphoton resonance check.
pub const MULTIPHOTON_TOLERANCE: f64 = 1e-9;

/// The three waves of the closed loop.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Wave {
    /// Optical field on |1⟩–|3⟩.
    Optical31,
    /// Optical field on |2⟩–|3⟩.
    Optical32,
    /// THz field on |1⟩–|2⟩.
    Thz,
}

impl Wave {
    pub const ALL: [Wave; 3] = [Wave::Optical31, Wave::Optical32, Wave::Thz];

    pub fn index(self) -> usize {
        match self {
            Wave::Optical31 => 0,
            Wave::Optical32 => 1,
            Wave::Thz => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DipoleKind {
    Electric,
    Magnetic,
}

/// Dipole moment (statC·cm, or the magnetic analogue) of a transition with
/// spontaneous rate `gamma` (1/s) and wavelength `lambda_cm`.
///
/// Uses d² = 3ħλ³γ/(32π³) for both kinds.
pub fn dipole_from_decay(gamma: f64, lambda_cm: f64, kind: DipoleKind) -> Result<f64> {
    let _ = kind;
    if !(lambda_cm > 0.0) || !lambda_cm.is_finite() {
        return Err(invalid("lambda", format!("must be positive, got {lambda_cm}")));
    }
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(invalid("gamma", format!("must be non-negative, got {gamma}")));
    }
    Ok((3.0 * HBAR * lambda_cm.powi(3) * gamma / (32.0 * PI.powi(3))).sqrt())
}

/// How laboratory intensities relate to field amplitudes.
///
/// `Gaussian` is the plane-wave relation I = (c/8π)E². `Saturation` reports
/// intensities in the atomic-physics convention I = I_sat·(g/γ)² with
/// I_sat = πhcγ/(3λ³), which is exactly 1/8 of the Gaussian value for a
/// dipole derived from the same γ and λ.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntensityConvention {
    #[default]
    Gaussian,
    Saturation,
}

impl IntensityConvention {
    /// Laboratory intensity per Gaussian plane-wave intensity.
    pub fn scale(self) -> f64 {
        match self {
            IntensityConvention::Gaussian => 1.0,
            IntensityConvention::Saturation => 0.125,
        }
    }
}

/// How the two optical dipole moments are obtained.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OpticalDipoles {
    /// Each dipole from its own decay rate and wavelength.
    #[default]
    FromDecay,
    /// d32 is set equal to d31.
    Equal,
}

/// Intensity in W/cm² of a wave with Rabi frequency `g` (rad/s) on a
/// transition with dipole `d`.
pub fn rabi_to_intensity(g: f64, d: f64, convention: IntensityConvention) -> Result<f64> {
    if !(g >= 0.0) || !g.is_finite() {
        return Err(invalid("g", format!("must be non-negative, got {g}")));
    }
    if g == 0.0 {
        return Ok(0.0);
    }
    if !(d > 0.0) {
        return Err(invalid("d", format!("must be positive when g > 0, got {d}")));
    }
    let e = 2.0 * HBAR * g / d;
    Ok(convention.scale() * C_LIGHT * e * e / (8.0 * PI) / ERG_PER_S_PER_WATT)
}

/// Inverse of [`rabi_to_intensity`].
pub fn intensity_to_rabi(intensity: f64, d: f64, convention: IntensityConvention) -> Result<f64> {
    if !(intensity >= 0.0) || !intensity.is_finite() {
        return Err(invalid("intensity", format!("must be non-negative, got {intensity}")));
    }
    if intensity == 0.0 {
        return Ok(0.0);
    }
    if !(d > 0.0) {
        return Err(invalid("d", format!("must be positive when I > 0, got {d}")));
    }
    let gaussian = intensity / convention.scale() * ERG_PER_S_PER_WATT;
    let e = (8.0 * PI * gaussian / C_LIGHT).sqrt();
    Ok(d * e / (2.0 * HBAR))
}

/// Inputs for [`AtomicMedium::new`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MediumParams {
    pub lambda31_cm: f64,
    pub lambda32_cm: f64,
    /// THz angular frequency; derived from the optical pair when absent.
    pub omega_t: Option<f64>,
    pub gamma31: f64,
    pub gamma32: f64,
    pub gamma21: f64,
    /// Pure dephasing of σ21 (1/s), on top of γ21.
    pub dephasing: f64,
    pub density_cm3: f64,
    pub temperature_k: f64,
    pub mass_amu: f64,
    pub optical_dipoles: OpticalDipoles,
    pub intensity_convention: IntensityConvention,
    /// Constant dipole phases ϑ31, ϑ32, ϑ21.
    pub dipole_phases: [f64; 3],
}

/// Validated, immutable description of the three-level medium.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AtomicMedium {
    params: MediumParams,
    omega: [f64; 3],
    lambda_t_cm: f64,
    dipole: [f64; 3],
    vp: f64,
}

impl AtomicMedium {
    pub fn new(params: MediumParams) -> Result<Self> {
        let p = &params;
        for (name, v) in [("lambda31", p.lambda31_cm), ("lambda32", p.lambda32_cm)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(invalid(name, format!("must be positive, got {v}")));
            }
        }
        for (name, v) in [
            ("gamma31", p.gamma31),
            ("gamma32", p.gamma32),
            ("gamma21", p.gamma21),
            ("dephasing", p.dephasing),
            ("temperature", p.temperature_k),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(invalid(name, format!("must be non-negative, got {v}")));
            }
        }
        if !(p.gamma31 > 0.0) {
            return Err(invalid("gamma31", "sets the internal unit and must be positive"));
        }
        if !(p.density_cm3 > 0.0) || !p.density_cm3.is_finite() {
            return Err(invalid("density", format!("must be positive, got {}", p.density_cm3)));
        }
        if !(p.mass_amu > 0.0) || !p.mass_amu.is_finite() {
            return Err(invalid("mass", format!("must be positive, got {}", p.mass_amu)));
        }
        if p.dipole_phases.iter().any(|x| !x.is_finite()) {
            return Err(invalid("dipole_phases", "must be finite"));
        }

        let omega31 = 2.0 * PI * C_LIGHT / p.lambda31_cm;
        let omega32 = 2.0 * PI * C_LIGHT / p.lambda32_cm;
        let omega_t = match p.omega_t {
            Some(w) => {
                let mismatch = omega31 - omega32 - w;
                let relative = mismatch.abs() / omega31;
                if !(relative <= MULTIPHOTON_TOLERANCE) {
                    return Err(SimError::MultiphotonResonance { mismatch, relative });
                }
                w
            }
            None => omega31 - omega32,
        };
        if !(omega_t > 0.0) {
            return Err(invalid(
                "lambda32",
                "the THz transition needs omega31 > omega32 (lambda32 > lambda31)",
            ));
        }
        let lambda_t_cm = 2.0 * PI * C_LIGHT / omega_t;

        let d31 = dipole_from_decay(p.gamma31, p.lambda31_cm, DipoleKind::Electric)?;
        let d32 = match p.optical_dipoles {
            OpticalDipoles::FromDecay => {
                dipole_from_decay(p.gamma32, p.lambda32_cm, DipoleKind::Electric)?
            }
            OpticalDipoles::Equal => d31,
        };
        let mu = dipole_from_decay(p.gamma21, lambda_t_cm, DipoleKind::Magnetic)?;
        let vp = most_probable_speed(p.temperature_k, p.mass_amu);

        Ok(AtomicMedium {
            omega: [omega31, omega32, omega_t],
            lambda_t_cm,
            dipole: [d31, d32, mu],
            vp,
            params,
        })
    }

    pub fn params(&self) -> &MediumParams {
        &self.params
    }

    /// Angular frequency of a wave (rad/s).
    pub fn omega(&self, wave: Wave) -> f64 {
        self.omega[wave.index()]
    }

    /// Vacuum wavelength of a wave (cm).
    pub fn lambda_cm(&self, wave: Wave) -> f64 {
        match wave {
            Wave::Optical31 => self.params.lambda31_cm,
            Wave::Optical32 => self.params.lambda32_cm,
            Wave::Thz => self.lambda_t_cm,
        }
    }

    /// Wave number ω/c (1/cm).
    pub fn wavenumber(&self, wave: Wave) -> f64 {
        self.omega(wave) / C_LIGHT
    }

    /// Dipole matrix element of the transition the wave drives.
    pub fn dipole(&self, wave: Wave) -> f64 {
        self.dipole[wave.index()]
    }

    pub fn dipole_phase(&self, wave: Wave) -> f64 {
        self.params.dipole_phases[wave.index()]
    }

    pub fn gamma31(&self) -> f64 {
        self.params.gamma31
    }

    pub fn gamma32(&self) -> f64 {
        self.params.gamma32
    }

    pub fn gamma21(&self) -> f64 {
        self.params.gamma21
    }

    pub fn dephasing(&self) -> f64 {
        self.params.dephasing
    }

    pub fn density(&self) -> f64 {
        self.params.density_cm3
    }

    pub fn temperature_k(&self) -> f64 {
        self.params.temperature_k
    }

    pub fn mass_amu(&self) -> f64 {
        self.params.mass_amu
    }

    pub fn intensity_convention(&self) -> IntensityConvention {
        self.params.intensity_convention
    }

    /// Most probable speed sqrt(2kT/m), cm/s.
    pub fn vp(&self) -> f64 {
        self.vp
    }

    /// Relaxation rates in units of γ31: (γ31, γ32, γ21, Γ).
    pub fn scaled_rates(&self) -> [f64; 4] {
        let g = self.params.gamma31;
        [1.0, self.params.gamma32 / g, self.params.gamma21 / g, self.params.dephasing / g]
    }

    /// Doppler shift k·vz of a wave in units of γ31.
    pub fn scaled_doppler(&self, wave: Wave, vz: f64) -> f64 {
        self.wavenumber(wave) * vz / self.params.gamma31
    }

    /// Upper bound on the energy conversion efficiency, ωT/ω31.
    pub fn efficiency_bound(&self) -> f64 {
        self.omega(Wave::Thz) / self.omega(Wave::Optical31)
    }

    /// ω0 = (ω31 + ω32 + ωT)/2.
    pub fn omega0(&self) -> f64 {
        0.5 * (self.omega[0] + self.omega[1] + self.omega[2])
    }

    /// Resonant absorption cross-section 3λ31²/(8π) = 3πc²/(2ω31²), cm².
    pub fn cross_section(&self) -> f64 {
        3.0 * self.params.lambda31_cm.powi(2) / (8.0 * PI)
    }

    /// Optical length τ = (3πc²/2ω31²)·N·z.
    pub fn tau_from_z(&self, z_cm: f64) -> Result<f64> {
        if !(z_cm >= 0.0) || !z_cm.is_finite() {
            return Err(invalid("z", format!("must be non-negative, got {z_cm}")));
        }
        Ok(self.cross_section() * self.params.density_cm3 * z_cm)
    }

    pub fn z_from_tau(&self, tau: f64) -> f64 {
        tau / (self.cross_section() * self.params.density_cm3)
    }

    /// Coefficient c in dΩ/dτ = i·c·σ̃ for the given wave, with Ω in units
    /// of γ31.
    pub fn field_coupling(&self, wave: Wave) -> f64 {
        let d = self.dipole(wave);
        2.0 * PI * self.omega(wave) * d * d / (HBAR * C_LIGHT)
            / (self.cross_section() * self.params.gamma31)
    }

    /// Rabi frequency (rad/s) per unit dimensionless amplitude u for a
    /// total Gaussian intensity `i_gauss` (erg/s/cm²).
    fn amplitude_scale(&self, wave: Wave, i_gauss: f64) -> f64 {
        let e = (8.0 * PI * i_gauss * self.omega(wave) / (C_LIGHT * self.omega0())).sqrt();
        self.dipole(wave) * e / (2.0 * HBAR)
    }

    /// dζ/dτ for a total laboratory intensity `total_w_cm2`.
    ///
    /// The nonlinear length uses the optical Rabi scale g0² of the ω31 wave
    /// carrying the whole intensity.
    pub fn zeta_per_tau(&self, total_w_cm2: f64) -> Result<f64> {
        if !(total_w_cm2 > 0.0) || !total_w_cm2.is_finite() {
            return Err(invalid(
                "total intensity",
                format!("must be positive, got {total_w_cm2}"),
            ));
        }
        if self.dipole(Wave::Thz) == 0.0 {
            return Err(invalid("gamma21", "THz coupling vanishes; zeta is undefined"));
        }
        let i = self.gaussian_intensity(total_w_cm2);
        let a1 = self.amplitude_scale(Wave::Optical31, i);
        let a2 = self.amplitude_scale(Wave::Optical32, i);
        let at = self.amplitude_scale(Wave::Thz, i);
        Ok(self.params.gamma31 * self.field_coupling(Wave::Optical31) * a2 * at / a1.powi(3))
    }

    pub fn zeta_from_tau(&self, tau: f64, total_w_cm2: f64) -> Result<f64> {
        Ok(tau * self.zeta_per_tau(total_w_cm2)?)
    }

    /// Laboratory intensity (W/cm², configured convention) to Gaussian
    /// plane-wave intensity (erg/s/cm²).
    pub fn gaussian_intensity(&self, lab_w_cm2: f64) -> f64 {
        lab_w_cm2 / self.intensity_convention().scale() * ERG_PER_S_PER_WATT
    }

    /// Laboratory intensity (W/cm²) of a wave with |Ω| in units of γ31.
    pub fn intensity_of(&self, wave: Wave, rabi_scaled: f64) -> Result<f64> {
        rabi_to_intensity(
            rabi_scaled.abs() * self.params.gamma31,
            self.dipole(wave),
            self.intensity_convention(),
        )
    }

    /// |Ω| in units of γ31 for a laboratory intensity (W/cm²).
    pub fn rabi_of(&self, wave: Wave, intensity_w_cm2: f64) -> Result<f64> {
        Ok(intensity_to_rabi(intensity_w_cm2, self.dipole(wave), self.intensity_convention())?
            / self.params.gamma31)
    }

    /// Dimensionless amplitude squared u² = I_m·ω0/(ω_m·I) of a wave.
    pub fn u_squared(&self, wave: Wave, intensity_w_cm2: f64, total_w_cm2: f64) -> f64 {
        intensity_w_cm2 * self.omega0() / (self.omega(wave) * total_w_cm2)
    }

    /// Inverse of [`AtomicMedium::u_squared`].
    pub fn intensity_from_u_squared(&self, wave: Wave, usq: f64, total_w_cm2: f64) -> f64 {
        usq * self.omega(wave) * total_w_cm2 / self.omega0()
    }

    /// Optical-pumping threshold on the total intensity.
    ///
    /// The intensity is the Gaussian plane-wave value (W/cm²) of
    /// (Γ/γ)(k31·vp/γ)²·16π²ħγc/(3λ31³), with γ = γ31.
    pub fn pumping_threshold(&self) -> Result<PumpingThreshold> {
        let gamma = self.params.gamma31;
        if !(gamma > 0.0) {
            return Err(invalid("gamma", "must be positive"));
        }
        let ratio = self.params.dephasing / gamma;
        let doppler = self.wavenumber(Wave::Optical31) * self.vp / gamma;
        let g0_sq = ratio * doppler * doppler;
        let lambda = self.params.lambda31_cm;
        let scale = 16.0 * PI * PI * HBAR * gamma * C_LIGHT / (3.0 * lambda.powi(3));
        Ok(PumpingThreshold {
            intensity_w_cm2: g0_sq * scale / ERG_PER_S_PER_WATT,
            rabi_sq_scaled: g0_sq,
        })
    }
}

/// Result of [`AtomicMedium::pumping_threshold`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PumpingThreshold {
    /// Threshold intensity, W/cm².
    pub intensity_w_cm2: f64,
    /// The same threshold as g0²/γ31².
    pub rabi_sq_scaled: f64,
}

/// sqrt(2kT/m) in cm/s.
pub fn most_probable_speed(temperature_k: f64, mass_amu: f64) -> f64 {
    (2.0 * K_BOLTZMANN * temperature_k / (mass_amu * AMU)).sqrt()
}

/// Complex Rabi frequencies of the three waves (units of γ31) and the two
/// laser detunings (units of γ31) at one position.
///
/// Each Rabi frequency already contains the wave's dipole phase, so the loop
/// phase is Φ = arg Ω31 − arg Ω32 − arg ΩT.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldState {
    pub rabi: [Complex64; 3],
    pub delta31: f64,
    pub delta32: f64,
}

impl FieldState {
    /// Resonant fields with real optical Rabi frequencies and the loop phase
    /// carried by the THz wave.
    pub fn from_amplitudes(g31: f64, g32: f64, gt: f64, phi: f64) -> Self {
        FieldState {
            rabi: [
                Complex64::new(g31, 0.0),
                Complex64::new(g32, 0.0),
                Complex64::from_polar(gt, -phi),
            ],
            delta31: 0.0,
            delta32: 0.0,
        }
    }

    /// Fields from complex envelopes (statvolt/cm, or gauss for the THz
    /// wave) and detunings in rad/s.
    pub fn from_envelopes(
        medium: &AtomicMedium,
        envelopes: [Complex64; 3],
        delta31: f64,
        delta32: f64,
    ) -> Self {
        let gamma = medium.gamma31();
        let mut rabi = [Complex64::new(0.0, 0.0); 3];
        for w in Wave::ALL {
            let i = w.index();
            rabi[i] = envelopes[i] * Complex64::from_polar(1.0, medium.dipole_phase(w))
                * (medium.dipole(w) / (2.0 * HBAR * gamma));
        }
        FieldState {
            rabi,
            delta31: delta31 / gamma,
            delta32: delta32 / gamma,
        }
    }

    /// Complex envelope of a wave, inverse of [`FieldState::from_envelopes`].
    pub fn envelope(&self, medium: &AtomicMedium, wave: Wave) -> Complex64 {
        let d = medium.dipole(wave);
        if d == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        self.rabi[wave.index()] * Complex64::from_polar(1.0, -medium.dipole_phase(wave))
            * (2.0 * HBAR * medium.gamma31() / d)
    }

    /// |Ω| of a wave in units of γ31.
    pub fn g(&self, wave: Wave) -> f64 {
        self.rabi[wave.index()].norm()
    }

    /// Φ wrapped to (−π, π], or `None` when a wave has zero amplitude.
    pub fn relative_phase(&self) -> Option<f64> {
        if self.rabi.iter().any(|r| r.norm() == 0.0) {
            return None;
        }
        let [a, b, c] = self.rabi;
        Some((a * b.conj() * c.conj()).arg())
    }

    /// Loop phase factors e^{iχ} used to reference the coherences.
    pub fn phase_factors(&self) -> [Complex64; 3] {
        let mut out = [Complex64::new(1.0, 0.0); 3];
        for (o, r) in out.iter_mut().zip(self.rabi.iter()) {
            let n = r.norm();
            if n > 0.0 {
                *o = r / n;
            }
        }
        out
    }
}
