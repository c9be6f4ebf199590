//! Sampled propagation results shared by all propagation paths.

use serde::Serialize;

use crate::medium::{AtomicMedium, Wave};
use crate::ode::StepStats;

/// Constants of motion S = u1² + u2², B = u1² + uT², C = uT² − u2² and
/// Π = u1·u2·uT·cos Φ.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Invariants {
    pub s: f64,
    pub b: f64,
    pub c: f64,
    pub pi: f64,
}

impl Invariants {
    pub fn from_amplitudes(u1: f64, u2: f64, ut: f64, phi: f64) -> Self {
        Invariants {
            s: u1 * u1 + u2 * u2,
            b: u1 * u1 + ut * ut,
            c: ut * ut - u2 * u2,
            pi: u1 * u2 * ut * phi.cos(),
        }
    }

    /// Largest absolute difference between two sets.
    pub fn max_diff(&self, other: &Invariants) -> f64 {
        (self.s - other.s)
            .abs()
            .max((self.b - other.b).abs())
            .max((self.c - other.c).abs())
            .max((self.pi - other.pi).abs())
    }
}

/// Output column names, in order.
pub const COLUMNS: [&str; 15] = [
    "tau", "z_cm", "zeta", "I31_W_cm2", "I32_W_cm2", "IT_W_cm2", "u1sq", "u2sq", "uTsq",
    "Phi_rad", "rho33", "inv_S", "inv_B", "inv_C", "inv_Pi",
];

/// One row of a trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Sample {
    pub tau: f64,
    pub z_cm: f64,
    pub zeta: f64,
    /// Intensities in W/cm² (configured convention).
    pub intensity: [f64; 3],
    /// Dimensionless u² of each wave.
    pub usq: [f64; 3],
    pub phi: f64,
    /// Velocity-averaged excited population; NaN where not computed.
    pub rho33: f64,
    pub invariants: Invariants,
}

impl Sample {
    pub fn values(&self) -> [f64; 15] {
        let i = &self.invariants;
        [
            self.tau,
            self.z_cm,
            self.zeta,
            self.intensity[0],
            self.intensity[1],
            self.intensity[2],
            self.usq[0],
            self.usq[1],
            self.usq[2],
            self.phi,
            self.rho33,
            i.s,
            i.b,
            i.c,
            i.pi,
        ]
    }

    pub fn from_values(v: &[f64; 15]) -> Self {
        Sample {
            tau: v[0],
            z_cm: v[1],
            zeta: v[2],
            intensity: [v[3], v[4], v[5]],
            usq: [v[6], v[7], v[8]],
            phi: v[9],
            rho33: v[10],
            invariants: Invariants {
                s: v[11],
                b: v[12],
                c: v[13],
                pi: v[14],
            },
        }
    }

    pub fn total_intensity(&self) -> f64 {
        self.intensity.iter().sum()
    }
}

/// Which model produced a trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PathKind {
    Full,
    Reduced,
    Analytic,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PropagationTrajectory {
    pub kind: PathKind,
    pub samples: Vec<Sample>,
    pub stats: StepStats,
}

impl PropagationTrajectory {
    /// Index of the sample with the largest THz intensity.
    pub fn thz_peak(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, s) in self.samples.iter().enumerate() {
            if best.is_none_or(|b| s.intensity[2] > self.samples[b].intensity[2]) {
                best = Some(i);
            }
        }
        best
    }

    /// Peak THz intensity divided by the input ω31 intensity.
    pub fn peak_efficiency(&self) -> Option<f64> {
        let first = self.samples.first()?;
        let peak = &self.samples[self.thz_peak()?];
        (first.intensity[0] > 0.0).then(|| peak.intensity[2] / first.intensity[0])
    }
}

/// Photon-flux balance over one sampling interval, relative to the largest
/// photon flux on the trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ManleyRoweResidual {
    pub tau_mid: f64,
    /// Δ(I31/ω31) + Δ(I32/ω32).
    pub optical_pair: f64,
    /// Δ(I31/ω31) + Δ(IT/ωT).
    pub thz_pair: f64,
    /// Length of the interval, cm.
    pub dz_cm: f64,
}

impl ManleyRoweResidual {
    /// The residuals as finite-difference rates per cm.
    pub fn per_cm(&self) -> (f64, f64) {
        (self.optical_pair / self.dz_cm, self.thz_pair / self.dz_cm)
    }
}

/// Manley–Rowe residuals of every sampling interval.
pub fn manley_rowe_residuals(
    trajectory: &PropagationTrajectory,
    medium: &AtomicMedium,
) -> Vec<ManleyRoweResidual> {
    let w = Wave::ALL.map(|x| medium.omega(x));
    let flux = |s: &Sample| [0, 1, 2].map(|i| s.intensity[i] / w[i]);
    let scale = trajectory
        .samples
        .iter()
        .flat_map(&flux)
        .fold(0.0f64, f64::max);
    let scale = if scale > 0.0 { scale } else { 1.0 };
    trajectory
        .samples
        .windows(2)
        .map(|p| {
            let (a, b) = (flux(&p[0]), flux(&p[1]));
            let d = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
            ManleyRoweResidual {
                tau_mid: 0.5 * (p[0].tau + p[1].tau),
                optical_pair: (d[0] + d[1]) / scale,
                thz_pair: (d[0] + d[2]) / scale,
                dz_cm: p[1].z_cm - p[0].z_cm,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn invariants_examples() {
        let i = Invariants::from_amplitudes(1.0, 0.0, 0.0, 0.3);
        assert_eq!((i.s, i.b, i.c, i.pi), (1.0, 1.0, 0.0, 0.0));
        let j = Invariants::from_amplitudes(0.6, 0.8, 0.5, std::f64::consts::PI / 3.0);
        assert!((j.pi - 0.12).abs() < 1e-15);
    }

    #[test]
    fn values_roundtrip() {
        let s = Sample {
            tau: 1.0,
            z_cm: 2.0,
            zeta: 3.0,
            intensity: [4.0, 5.0, 6.0],
            usq: [7.0, 8.0, 9.0],
            phi: 10.0,
            rho33: f64::NAN,
            invariants: Invariants { s: 12.0, b: 13.0, c: 14.0, pi: 15.0 },
        };
        let back = Sample::from_values(&s.values());
        assert_eq!(back.values()[..10], s.values()[..10]);
        assert!(back.rho33.is_nan());
    }
}
