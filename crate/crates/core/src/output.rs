//! Trajectory files and run manifests.
//!
//! CSV values use Rust's shortest round-trip formatting, so re-parsing a file
//! reproduces every value bit for bit.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::error::{Result, SimError};
use crate::ode::StepStats;
use crate::trajectory::{PropagationTrajectory, Sample, COLUMNS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> SimError + '_ {
    move |source| SimError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Trajectory as CSV text.
pub fn to_csv(trajectory: &PropagationTrajectory) -> String {
    let mut out = COLUMNS.join(",");
    out.push('\n');
    for s in &trajectory.samples {
        let row: Vec<String> = s.values().iter().map(|v| format!("{v:e}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Parse CSV text written by [`to_csv`].
pub fn parse_csv(text: &str) -> Result<Vec<Sample>> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    if header != COLUMNS.join(",") {
        return Err(SimError::Config(format!("unexpected CSV header `{header}`")));
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(|(n, line)| {
            let mut v = [0.0; 15];
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != v.len() {
                return Err(SimError::Config(format!("CSV line {}: expected 15 values", n + 2)));
            }
            for (slot, f) in v.iter_mut().zip(fields) {
                *slot = f
                    .parse()
                    .map_err(|_| SimError::Config(format!("CSV line {}: bad value `{f}`", n + 2)))?;
            }
            Ok(Sample::from_values(&v))
        })
        .collect()
}

/// Deterministic part of a run description, embedded in JSON trajectories.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunInfo {
    pub scenario: String,
    pub config_hash: String,
    pub mode: String,
    pub settings: SolverSettings,
    pub steps: BTreeMap<String, StepStats>,
    pub summary: Option<Summary>,
    pub compare: Option<CompareReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolverSettings {
    pub span_tau: f64,
    pub samples: usize,
    pub velocity_nodes: usize,
    pub rtol_full: f64,
    pub rtol_reduced: f64,
    pub cache_polarization: bool,
}

/// Headline numbers of a trajectory.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub path: String,
    pub i31_in_w_cm2: f64,
    pub peak_thz_w_cm2: f64,
    pub tau_at_peak: f64,
    pub z_cm_at_peak: f64,
    pub peak_efficiency: f64,
    pub efficiency_bound: f64,
}

impl Summary {
    pub fn of(trajectory: &PropagationTrajectory, efficiency_bound: f64) -> Option<Summary> {
        let first = trajectory.samples.first()?;
        let peak = &trajectory.samples[trajectory.thz_peak()?];
        Some(Summary {
            path: format!("{:?}", trajectory.kind).to_lowercase(),
            i31_in_w_cm2: first.intensity[0],
            peak_thz_w_cm2: peak.intensity[2],
            tau_at_peak: peak.tau,
            z_cm_at_peak: peak.z_cm,
            peak_efficiency: trajectory.peak_efficiency().unwrap_or(f64::NAN),
            efficiency_bound,
        })
    }
}

/// Numeric-versus-closed-form comparison of the THz intensity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompareReport {
    pub u20sq: f64,
    /// max |I_T(numeric) − I_T(closed form)| / max I_T(closed form).
    pub max_rel_thz_deviation: f64,
    /// The same after fitting u20² to the numeric trajectory.
    pub fitted_u20sq: f64,
    pub fitted_max_rel_thz_deviation: f64,
    pub tau_peak_numeric: f64,
    pub tau_peak_analytic: f64,
}

/// Complete record of one run, written as `manifest.json`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunManifest {
    #[serde(flatten)]
    pub info: RunInfo,
    pub format: Format,
    pub outputs: Vec<String>,
    pub wall_clock_s: f64,
    pub error: Option<String>,
}

/// Trajectory as JSON text: the CSV columns and rows plus the run info.
pub fn to_json(trajectory: &PropagationTrajectory, info: &RunInfo) -> String {
    #[derive(Serialize)]
    struct Doc<'a> {
        run: &'a RunInfo,
        path: String,
        columns: [&'static str; 15],
        rows: Vec<[f64; 15]>,
    }
    let doc = Doc {
        run: info,
        path: format!("{:?}", trajectory.kind).to_lowercase(),
        columns: COLUMNS,
        rows: trajectory.samples.iter().map(Sample::values).collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("trajectory serializes");
    s.push('\n');
    s
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        }
    }
    std::fs::write(path, text).map_err(io_err(path))
}

/// Write a trajectory in the requested format.
pub fn emit_outputs(
    path: &Path,
    trajectory: &PropagationTrajectory,
    format: Format,
    info: &RunInfo,
) -> Result<()> {
    let text = match format {
        Format::Csv => to_csv(trajectory),
        Format::Json => to_json(trajectory, info),
    };
    write_text(path, &text)
}

pub fn manifest_json(manifest: &RunManifest) -> String {
    let mut s = String::new();
    let _ = write!(s, "{}", serde_json::to_string_pretty(manifest).expect("manifest serializes"));
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trajectory::{Invariants, PathKind};

    fn traj(n: usize) -> PropagationTrajectory {
        let samples = (0..n)
            .map(|k| {
                let x = k as f64 * 0.1 + 1.0 / 3.0;
                Sample {
                    tau: x * 1e5,
                    z_cm: x.sqrt(),
                    zeta: x.exp(),
                    intensity: [x, 1.0 / x, 1e-300 * x],
                    usq: [x.sin(), x.cos(), x.tan()],
                    phi: -x,
                    rho33: if k % 2 == 0 { f64::NAN } else { 1e-9 / x },
                    invariants: Invariants { s: x, b: -x, c: x * 7.0, pi: 0.0 },
                }
            })
            .collect();
        PropagationTrajectory { kind: PathKind::Full, samples, stats: StepStats::default() }
    }

    #[test]
    fn csv_roundtrip_is_bit_identical() {
        let t = traj(17);
        let parsed = parse_csv(&to_csv(&t)).unwrap();
        assert_eq!(parsed.len(), 17);
        for (a, b) in parsed.iter().zip(&t.samples) {
            for (x, y) in a.values().iter().zip(b.values().iter()) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn csv_header_and_rows() {
        let text = to_csv(&traj(1));
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "tau,z_cm,zeta,I31_W_cm2,I32_W_cm2,IT_W_cm2,u1sq,u2sq,uTsq,Phi_rad,rho33,inv_S,inv_B,inv_C,inv_Pi"
        );
        assert_eq!(lines.count(), 1);
    }

    #[test]
    fn bad_csv_rejected() {
        assert!(parse_csv("a,b\n").is_err());
        let mut text = to_csv(&traj(1));
        text.push_str("1,2\n");
        assert!(parse_csv(&text).is_err());
    }
}
