//! Scenario orchestration: runs a propagation mode, writes trajectories and
//! returns a manifest describing what was done.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::config::ScenarioConfig;
use crate::elliptic::{analytic_solution_modulus, EllipticModulus};
use crate::error::{Result, SimError};
use crate::full::{propagate_full, reference_intensity, SampleBuilder};
use crate::medium::Wave;
use crate::output::{
    emit_outputs, manifest_json, write_text, CompareReport, Format, RunInfo, RunManifest,
    SolverSettings, Summary,
};
use crate::reduced::{propagate_reduced, ReducedOptions, ReducedState};
use crate::trajectory::{PathKind, PropagationTrajectory};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Full,
    Reduced,
    Analytic,
    Compare,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Full => "full",
            Mode::Reduced => "reduced",
            Mode::Analytic => "analytic",
            Mode::Compare => "compare",
        }
    }
}

/// Dimensionless entrance state and reference intensity of a scenario.
struct Entrance {
    reference: f64,
    usq: [f64; 3],
}

fn entrance(config: &ScenarioConfig) -> Result<Entrance> {
    let m = &config.medium;
    let i = config.input_intensities()?;
    let reference = reference_intensity(m, &i);
    if !(reference > 0.0) {
        return Err(SimError::IncompatibleMode {
            mode: "reduced".into(),
            reason: "the optical input intensity is zero".into(),
        });
    }
    Ok(Entrance {
        reference,
        usq: Wave::ALL.map(|w| m.u_squared(w, i[w.index()], reference)),
    })
}

fn tau_grid(config: &ScenarioConfig) -> Vec<f64> {
    let n = config.samples.max(1);
    (0..n)
        .map(|k| if n == 1 { 0.0 } else { config.span_tau * k as f64 / (n - 1) as f64 })
        .collect()
}

fn zeta_per_tau(config: &ScenarioConfig, reference: f64, mode: Mode) -> Result<f64> {
    config.medium.zeta_per_tau(reference).map_err(|e| SimError::IncompatibleMode {
        mode: mode.name().into(),
        reason: e.to_string(),
    })
}

/// Reduced-model trajectory in laboratory units.
pub fn reduced_trajectory(config: &ScenarioConfig) -> Result<PropagationTrajectory> {
    let m = &config.medium;
    let e = entrance(config)?;
    let zpt = zeta_per_tau(config, e.reference, Mode::Reduced)?;
    // Renormalise against rounding so that u1² + u2² = 1 holds exactly enough.
    let s = e.usq[0] + e.usq[1];
    let initial = ReducedState {
        u1: (e.usq[0] / s).sqrt(),
        u2: (e.usq[1] / s).sqrt(),
        ut: e.usq[2].sqrt(),
        phi: config.phi,
        zeta: 0.0,
    };
    let opts = ReducedOptions {
        rtol: config.rtol_reduced,
        samples: config.samples,
        ..Default::default()
    };
    let r = propagate_reduced(&initial, config.span_tau * zpt, &opts)?;
    let builder = SampleBuilder::new(m, e.reference);
    let samples = r
        .states
        .iter()
        .map(|st| {
            let usq = [st.u1 * st.u1, st.u2 * st.u2, st.ut * st.ut];
            let intensity = Wave::ALL.map(|w| m.intensity_from_u_squared(w, usq[w.index()], e.reference));
            let mut s = builder.build(st.zeta / zpt, intensity, st.phi, f64::NAN);
            s.zeta = st.zeta;
            s
        })
        .collect();
    Ok(PropagationTrajectory {
        kind: PathKind::Reduced,
        samples,
        stats: r.stats,
    })
}

fn analytic_check(config: &ScenarioConfig, mode: Mode) -> Result<Entrance> {
    let incompatible = |reason: &str| SimError::IncompatibleMode {
        mode: mode.name().into(),
        reason: reason.into(),
    };
    if config.medium.dephasing() != 0.0 {
        return Err(incompatible("the closed-form solution assumes no ground-state decoherence (dephasing_rel = 0)"));
    }
    let e = entrance(config)?;
    if e.usq[2] != 0.0 {
        return Err(incompatible("the closed-form solution describes generation from uT(0) = 0"));
    }
    if !(e.usq[0] > 0.0 && e.usq[1] > 0.0) {
        return Err(incompatible("both optical inputs must be non-zero"));
    }
    Ok(e)
}

/// Closed-form trajectory for a given u20², on the scenario's τ grid.
fn analytic_with(config: &ScenarioConfig, e: &Entrance, u20sq: f64, zpt: f64) -> Result<PropagationTrajectory> {
    let m = &config.medium;
    let modulus = EllipticModulus::from_complement(u20sq)?;
    let builder = SampleBuilder::new(m, e.reference);
    let samples = tau_grid(config)
        .into_iter()
        .map(|tau| {
            let zeta = tau * zpt;
            let p = analytic_solution_modulus(zeta, &modulus)?;
            let usq = [p.u1sq, p.u2sq, p.utsq];
            let intensity = Wave::ALL.map(|w| m.intensity_from_u_squared(w, usq[w.index()], e.reference));
            let j = modulus.jacobi(zeta);
            let phi = if j.cd() * j.sn >= 0.0 { FRAC_PI_2 } else { -FRAC_PI_2 };
            Ok(builder.build(tau, intensity, phi, f64::NAN))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PropagationTrajectory {
        kind: PathKind::Analytic,
        samples,
        stats: Default::default(),
    })
}

/// Closed-form generation trajectory of a scenario.
pub fn analytic_trajectory(config: &ScenarioConfig) -> Result<PropagationTrajectory> {
    let e = analytic_check(config, Mode::Analytic)?;
    let zpt = zeta_per_tau(config, e.reference, Mode::Analytic)?;
    let u20sq = e.usq[1] / (e.usq[0] + e.usq[1]);
    analytic_with(config, &e, u20sq, zpt)
}

fn thz_deviation(numeric: &PropagationTrajectory, analytic: &PropagationTrajectory) -> f64 {
    let max = analytic.samples.iter().map(|s| s.intensity[2]).fold(0.0, f64::max);
    numeric
        .samples
        .iter()
        .zip(&analytic.samples)
        .map(|(a, b)| (a.intensity[2] - b.intensity[2]).abs())
        .fold(0.0, f64::max)
        / max
}

/// Compare a numeric trajectory with the closed form, with and without
/// fitting u20².
pub fn compare_with_analytic(
    config: &ScenarioConfig,
    numeric: &PropagationTrajectory,
) -> Result<(PropagationTrajectory, CompareReport)> {
    let e = analytic_check(config, Mode::Compare)?;
    let zpt = zeta_per_tau(config, e.reference, Mode::Compare)?;
    let u20sq = e.usq[1] / (e.usq[0] + e.usq[1]);
    let analytic = analytic_with(config, &e, u20sq, zpt)?;
    let deviation = thz_deviation(numeric, &analytic);

    // Golden-section search on ln u20² within a factor 3 either way.
    let cost = |x: f64| -> Result<f64> {
        Ok(thz_deviation(numeric, &analytic_with(config, &e, x.exp().min(0.999), zpt)?))
    };
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (u20sq.ln() - 3f64.ln(), u20sq.ln() + 3f64.ln());
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (cost(c)?, cost(d)?);
    for _ in 0..60 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = cost(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = cost(d)?;
        }
    }
    let (best, best_dev) = if fc < fd { (c, fc) } else { (d, fd) };
    let (fitted, fitted_dev) = if best_dev < deviation { (best.exp(), best_dev) } else { (u20sq, deviation) };

    let peak_tau = |t: &PropagationTrajectory| t.thz_peak().map(|i| t.samples[i].tau).unwrap_or(f64::NAN);
    let report = CompareReport {
        u20sq,
        max_rel_thz_deviation: deviation,
        fitted_u20sq: fitted,
        fitted_max_rel_thz_deviation: fitted_dev,
        tau_peak_numeric: peak_tau(numeric),
        tau_peak_analytic: peak_tau(&analytic),
    };
    Ok((analytic, report))
}

/// Trajectories of one run, labelled for file naming.
pub struct RunOutput {
    pub trajectories: Vec<(String, PropagationTrajectory)>,
    pub compare: Option<CompareReport>,
}

/// Run a mode without touching the file system.
pub fn compute(config: &ScenarioConfig, mode: Mode) -> Result<RunOutput> {
    let mut trajectories = Vec::new();
    let mut compare = None;
    match mode {
        Mode::Full => trajectories.push(("full".to_string(), propagate_full(config)?)),
        Mode::Reduced => trajectories.push(("reduced".to_string(), reduced_trajectory(config)?)),
        Mode::Analytic => trajectories.push(("analytic".to_string(), analytic_trajectory(config)?)),
        Mode::Compare => {
            analytic_check(config, mode)?;
            let full = propagate_full(config)?;
            let (analytic, report) = compare_with_analytic(config, &full)?;
            trajectories.push(("full".to_string(), full));
            trajectories.push(("analytic".to_string(), analytic));
            compare = Some(report);
        }
    }
    Ok(RunOutput { trajectories, compare })
}

fn settings(config: &ScenarioConfig) -> SolverSettings {
    SolverSettings {
        span_tau: config.span_tau,
        samples: config.samples,
        velocity_nodes: config.velocity_nodes,
        rtol_full: config.rtol_full,
        rtol_reduced: config.rtol_reduced,
        cache_polarization: config.cache_polarization,
    }
}

/// Run a scenario, write its trajectories and `manifest.json` into
/// `out_dir`. Failures are recorded in the manifest rather than returned.
pub fn run_scenario(config: &ScenarioConfig, mode: Mode, out_dir: &Path, format: Format) -> RunManifest {
    let start = Instant::now();
    let mut info = RunInfo {
        scenario: config.name.clone(),
        config_hash: config.config_hash(),
        mode: mode.name().into(),
        settings: settings(config),
        steps: BTreeMap::new(),
        summary: None,
        compare: None,
    };
    let mut outputs = Vec::new();
    let result = compute(config, mode).and_then(|out| {
        for (label, t) in &out.trajectories {
            info.steps.insert(label.clone(), t.stats);
        }
        info.summary = out
            .trajectories
            .first()
            .and_then(|(_, t)| Summary::of(t, config.medium.efficiency_bound()));
        info.compare = out.compare.clone();
        for (label, t) in &out.trajectories {
            let path: PathBuf = out_dir.join(format!("{}_{label}.{}", config.name, format.extension()));
            emit_outputs(&path, t, format, &info)?;
            outputs.push(path.display().to_string());
        }
        Ok(())
    });
    let manifest_path = out_dir.join("manifest.json");
    let mut manifest = RunManifest {
        info,
        format,
        outputs,
        wall_clock_s: start.elapsed().as_secs_f64(),
        error: result.err().map(|e| e.to_string()),
    };
    manifest.outputs.push(manifest_path.display().to_string());
    if let Err(e) = write_text(&manifest_path, &manifest_json(&manifest)) {
        manifest.outputs.pop();
        manifest.error.get_or_insert(e.to_string());
    }
    manifest
}

/// Manifest for a scenario that could not be loaded.
pub fn failed_manifest(label: &str, mode: Mode, format: Format, out_dir: &Path, error: &SimError) -> RunManifest {
    let mut manifest = RunManifest {
        info: RunInfo {
            scenario: label.to_string(),
            config_hash: String::new(),
            mode: mode.name().into(),
            settings: SolverSettings {
                span_tau: f64::NAN,
                samples: 0,
                velocity_nodes: 0,
                rtol_full: f64::NAN,
                rtol_reduced: f64::NAN,
                cache_polarization: false,
            },
            steps: BTreeMap::new(),
            summary: None,
            compare: None,
        },
        format,
        outputs: Vec::new(),
        wall_clock_s: 0.0,
        error: Some(error.to_string()),
    };
    let path = out_dir.join("manifest.json");
    if write_text(&path, &manifest_json(&manifest)).is_ok() {
        manifest.outputs.push(path.display().to_string());
    }
    manifest
}
