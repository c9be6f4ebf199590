//! Runs through the public entry point, checked via the files they write.

use std::fs;

use thzmix::output::{parse_csv, Format};
use thzmix::run::{run_scenario, Mode};
use thzmix::ScenarioConfig;

fn quick(extra: &str) -> ScenarioConfig {
    ScenarioConfig::from_toml(&format!(
        "preset = \"mg-fig2\"\n[propagation]\nspan_tau = 4.0e5\nsamples = 41\n{extra}"
    ))
    .unwrap()
}

fn manifest(dir: &std::path::Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn every_mode_writes_trajectory_and_manifest() {
    let c = quick("");
    for (mode, files) in [
        (Mode::Full, vec!["mg-fig2_full.csv"]),
        (Mode::Reduced, vec!["mg-fig2_reduced.csv"]),
        (Mode::Analytic, vec!["mg-fig2_analytic.csv"]),
        (Mode::Compare, vec!["mg-fig2_full.csv", "mg-fig2_analytic.csv"]),
    ] {
        let dir = tempfile::tempdir().unwrap();
        let m = run_scenario(&c, mode, dir.path(), Format::Csv);
        assert!(m.error.is_none(), "{mode:?}: {:?}", m.error);
        for f in files {
            let rows = parse_csv(&fs::read_to_string(dir.path().join(f)).unwrap()).unwrap();
            assert_eq!(rows.len(), 41, "{mode:?} {f}");
        }
        let j = manifest(dir.path());
        assert_eq!(j["config_hash"], c.config_hash());
        assert!(j["error"].is_null());
        assert_eq!(j["compare"].is_null(), mode != Mode::Compare);
    }
}

#[test]
fn reruns_are_byte_identical() {
    let c = quick("");
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        assert!(run_scenario(&c, Mode::Full, d.path(), Format::Csv).error.is_none());
        assert!(run_scenario(&c, Mode::Reduced, d.path(), Format::Json).error.is_none());
    }
    for f in ["mg-fig2_full.csv", "mg-fig2_reduced.json"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn zero_span_gives_single_entrance_row() {
    let c = ScenarioConfig::from_toml("preset = \"mg-fig3\"\n[propagation]\nspan_tau = 0.0\n").unwrap();
    let dir = tempfile::tempdir().unwrap();
    let m = run_scenario(&c, Mode::Full, dir.path(), Format::Csv);
    assert!(m.error.is_none());
    let text = fs::read_to_string(dir.path().join("mg-fig3_full.csv")).unwrap();
    assert_eq!(text.lines().count(), 2);
    let row = &parse_csv(&text).unwrap()[0];
    assert_eq!(row.tau, 0.0);
    assert_eq!(row.intensity[2], 0.0);
}

#[test]
fn closed_form_rejects_decohering_medium() {
    let c = ScenarioConfig::preset("mg-fig3").unwrap();
    let dir = tempfile::tempdir().unwrap();
    let m = run_scenario(&c, Mode::Analytic, dir.path(), Format::Csv);
    let err = m.error.expect("analytic mode must refuse Gamma > 0");
    assert!(err.contains("analytic"), "{err}");
    assert!(!manifest(dir.path())["error"].is_null());
    assert!(!dir.path().join("mg-fig3_analytic.csv").exists());
}

#[test]
fn compare_mode_tracks_closed_form() {
    let c = ScenarioConfig::from_toml("preset = \"mg-fig2\"\n[propagation]\nsamples = 161\n").unwrap();
    let dir = tempfile::tempdir().unwrap();
    let m = run_scenario(&c, Mode::Compare, dir.path(), Format::Json);
    assert!(m.error.is_none(), "{:?}", m.error);
    let r = m.info.compare.unwrap();
    assert!(r.max_rel_thz_deviation < 0.02, "{r:?}");
    assert!(r.fitted_max_rel_thz_deviation <= r.max_rel_thz_deviation);
    assert!((r.tau_peak_numeric / r.tau_peak_analytic - 1.0).abs() < 0.02);
}

#[test]
fn full_and_reduced_agree_when_cold() {
    let c = quick("");
    let full = thzmix::full::propagate_full(&c).unwrap();
    let red = thzmix::run::reduced_trajectory(&c).unwrap();
    let peak = full.samples.iter().map(|s| s.usq[2]).fold(0.0, f64::max);
    for (a, b) in full.samples.iter().zip(&red.samples) {
        assert!((a.tau - b.tau).abs() <= 1e-12 * a.tau.max(1.0));
        assert!((a.usq[2] - b.usq[2]).abs() < 0.02 * peak, "tau {}: {} vs {}", a.tau, a.usq[2], b.usq[2]);
    }
}

#[test]
fn polarization_cache_is_exact() {
    let on = thzmix::full::propagate_full(&quick("cache_polarization = true\n")).unwrap();
    let off = thzmix::full::propagate_full(&quick("cache_polarization = false\n")).unwrap();
    assert_eq!(on.samples, off.samples);
    assert!(on.stats.rhs_evals == off.stats.rhs_evals);
}
