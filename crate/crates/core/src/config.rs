//! Scenario configuration: a small sectioned key/value (TOML) schema,
//! built-in presets and merge semantics.
//!
//! ```toml
//! preset = "mg-fig3"        # optional base scenario
//! name = "my-run"
//!
//! [medium]
//! dephasing_rel = 2e-3      # Γ in units of γ31
//!
//! [fields]
//! i31_w_cm2 = 18.8          # or g31 = 60.0 (units of γ31), never both
//!
//! [propagation]
//! span_tau = 3.2e6
//! ```
//!
//! A key given in a config file replaces the preset value. For each wave the
//! Rabi and intensity keys are one setting: specifying either replaces the
//! preset's choice for that wave.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::doppler::DEFAULT_NODES;
use crate::error::{Result, SimError};
use crate::medium::{
    AtomicMedium, FieldState, IntensityConvention, MediumParams, OpticalDipoles, Wave,
};

/// A built-in scenario.
#[derive(Clone, Copy, Debug)]
pub struct Preset {
    pub name: &'static str,
    pub text: &'static str,
    /// SHA-256 of `text`.
    pub sha256: &'static str,
}

pub const PRESETS: [Preset; 4] = [
    Preset {
        name: "mg-fig2",
        text: include_str!("../presets/mg-fig2.toml"),
        sha256: "6ec9d43d599485eb338d21dc1ccf20a904928213b4017bc4adbb4ae12ce326e8",
    },
    Preset {
        name: "mg-fig3",
        text: include_str!("../presets/mg-fig3.toml"),
        sha256: "5fbde3f5280f75796fb32ed0e5db6df85fc94f33cdf50cac4fecb824c42be645",
    },
    Preset {
        name: "mg-fig4a",
        text: include_str!("../presets/mg-fig4a.toml"),
        sha256: "96bed1b44efc7aef0befe42b70d4b547958b1526ed8f9d782bec9dcc1033a85b",
    },
    Preset {
        name: "mg-fig4b",
        text: include_str!("../presets/mg-fig4b.toml"),
        sha256: "bc313461ee9ade16821f1d08f06781de4931484c374fbf6ff8f7e264844f1434",
    },
];

pub fn find_preset(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    pub name: Option<String>,
    #[serde(default)]
    pub medium: RawMedium,
    #[serde(default)]
    pub fields: RawFields,
    #[serde(default)]
    pub propagation: RawPropagation,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawMedium {
    pub lambda31_nm: Option<f64>,
    pub lambda32_nm: Option<f64>,
    pub omega_t_rad_s: Option<f64>,
    pub gamma31_per_s: Option<f64>,
    pub gamma32_rel: Option<f64>,
    pub gamma21_rel: Option<f64>,
    pub dephasing_rel: Option<f64>,
    pub density_cm3: Option<f64>,
    pub temperature_k: Option<f64>,
    pub mass_amu: Option<f64>,
    pub optical_dipoles: Option<OpticalDipoles>,
    pub intensity_convention: Option<IntensityConvention>,
    pub dipole_phases_rad: Option<[f64; 3]>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawFields {
    pub g31: Option<f64>,
    pub g32: Option<f64>,
    pub gt: Option<f64>,
    pub i31_w_cm2: Option<f64>,
    pub i32_w_cm2: Option<f64>,
    pub it_w_cm2: Option<f64>,
    pub phi_rad: Option<f64>,
    pub delta31: Option<f64>,
    pub delta32: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawPropagation {
    pub span_tau: Option<f64>,
    pub samples: Option<usize>,
    pub velocity_nodes: Option<usize>,
    pub rtol_full: Option<f64>,
    pub rtol_reduced: Option<f64>,
    pub cache_polarization: Option<bool>,
}

macro_rules! overlay {
    ($base:expr, $top:expr; $($field:ident),+) => {
        $( if $top.$field.is_some() { $base.$field = $top.$field.clone(); } )+
    };
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| SimError::Config(e.to_string()))
    }

    /// `self` with every value present in `top` replacing its own.
    pub fn merged(&self, top: &RawConfig) -> RawConfig {
        let mut out = self.clone();
        overlay!(out, top; name);
        out.preset = top.preset.clone().or_else(|| self.preset.clone());
        overlay!(out.medium, top.medium; lambda31_nm, lambda32_nm, omega_t_rad_s, gamma31_per_s,
            gamma32_rel, gamma21_rel, dephasing_rel, density_cm3, temperature_k, mass_amu,
            optical_dipoles, intensity_convention, dipole_phases_rad);
        let (b, t) = (&mut out.fields, &top.fields);
        for (bg, bi, tg, ti) in [
            (&mut b.g31, &mut b.i31_w_cm2, t.g31, t.i31_w_cm2),
            (&mut b.g32, &mut b.i32_w_cm2, t.g32, t.i32_w_cm2),
            (&mut b.gt, &mut b.it_w_cm2, t.gt, t.it_w_cm2),
        ] {
            if tg.is_some() || ti.is_some() {
                *bg = tg;
                *bi = ti;
            }
        }
        overlay!(out.fields, top.fields; phi_rad, delta31, delta32);
        overlay!(out.propagation, top.propagation; span_tau, samples, velocity_nodes, rtol_full,
            rtol_reduced, cache_polarization);
        out
    }
}

/// How one input field is specified.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum FieldSpec {
    /// |Ω| in units of γ31.
    Rabi(f64),
    /// Laboratory intensity in W/cm².
    Intensity(f64),
}

/// Fully resolved and validated scenario.
#[derive(Clone, Debug)]
pub struct ScenarioConfig {
    pub name: String,
    pub medium: AtomicMedium,
    pub fields: [FieldSpec; 3],
    /// Initial loop phase Φ.
    pub phi: f64,
    /// Detunings in units of γ31.
    pub delta31: f64,
    pub delta32: f64,
    pub span_tau: f64,
    pub samples: usize,
    pub velocity_nodes: usize,
    pub rtol_full: f64,
    pub rtol_reduced: f64,
    pub cache_polarization: bool,
    /// The complete key/value set this scenario was built from.
    pub resolved: RawConfig,
}

fn require<T: Copy>(v: Option<T>, key: &str) -> Result<T> {
    v.ok_or_else(|| SimError::Config(format!("missing required key `{key}`")))
}

fn field_spec(g: Option<f64>, i: Option<f64>, wave: &str, default_zero: bool) -> Result<FieldSpec> {
    match (g, i) {
        (Some(_), Some(_)) => Err(SimError::Config(format!(
            "field {wave}: give either the Rabi frequency or the intensity, not both"
        ))),
        (Some(g), None) => Ok(FieldSpec::Rabi(g)),
        (None, Some(i)) => Ok(FieldSpec::Intensity(i)),
        (None, None) if default_zero => Ok(FieldSpec::Rabi(0.0)),
        (None, None) => Err(SimError::Config(format!(
            "field {wave}: missing Rabi frequency or intensity"
        ))),
    }
}

impl ScenarioConfig {
    /// Parse config text, merging onto its preset when one is named.
    pub fn from_toml(text: &str) -> Result<Self> {
        let raw = RawConfig::parse(text)?;
        let base = match &raw.preset {
            Some(name) => {
                let p = find_preset(name)
                    .ok_or_else(|| SimError::Config(format!("unknown preset `{name}`")))?;
                RawConfig::parse(p.text)?
            }
            None => RawConfig::default(),
        };
        Self::from_raw(base.merged(&raw))
    }

    pub fn preset(name: &str) -> Result<Self> {
        let p = find_preset(name).ok_or_else(|| SimError::Config(format!("unknown preset `{name}`")))?;
        Self::from_toml(p.text)
    }

    /// Load a config file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| SimError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text).map_err(|e| match e {
            SimError::Config(msg) => SimError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Resolve defaults, validate and build the medium.
    pub fn from_raw(raw: RawConfig) -> Result<Self> {
        let mut r = raw;
        let m = &mut r.medium;
        m.gamma21_rel.get_or_insert(0.0);
        m.dephasing_rel.get_or_insert(0.0);
        m.temperature_k.get_or_insert(0.0);
        m.optical_dipoles.get_or_insert(OpticalDipoles::default());
        m.intensity_convention.get_or_insert(IntensityConvention::default());
        m.dipole_phases_rad.get_or_insert([0.0; 3]);
        let f = &mut r.fields;
        if f.gt.is_none() && f.it_w_cm2.is_none() {
            f.gt = Some(0.0);
        }
        f.phi_rad.get_or_insert(0.0);
        f.delta31.get_or_insert(0.0);
        f.delta32.get_or_insert(0.0);
        let p = &mut r.propagation;
        p.samples.get_or_insert(401);
        p.velocity_nodes.get_or_insert(DEFAULT_NODES);
        p.rtol_full.get_or_insert(1e-7);
        p.rtol_reduced.get_or_insert(1e-9);
        p.cache_polarization.get_or_insert(true);
        r.name.get_or_insert_with(|| r.preset.clone().unwrap_or_else(|| "scenario".into()));

        let m = &r.medium;
        let gamma31 = require(m.gamma31_per_s, "medium.gamma31_per_s")?;
        let params = MediumParams {
            lambda31_cm: require(m.lambda31_nm, "medium.lambda31_nm")? * 1e-7,
            lambda32_cm: require(m.lambda32_nm, "medium.lambda32_nm")? * 1e-7,
            omega_t: m.omega_t_rad_s,
            gamma31,
            gamma32: require(m.gamma32_rel, "medium.gamma32_rel")? * gamma31,
            gamma21: m.gamma21_rel.unwrap_or(0.0) * gamma31,
            dephasing: m.dephasing_rel.unwrap_or(0.0) * gamma31,
            density_cm3: require(m.density_cm3, "medium.density_cm3")?,
            temperature_k: m.temperature_k.unwrap_or(0.0),
            mass_amu: require(m.mass_amu, "medium.mass_amu")?,
            optical_dipoles: m.optical_dipoles.unwrap_or_default(),
            intensity_convention: m.intensity_convention.unwrap_or_default(),
            dipole_phases: m.dipole_phases_rad.unwrap_or([0.0; 3]),
        };
        let medium = AtomicMedium::new(params)?;

        let f = &r.fields;
        let fields = [
            field_spec(f.g31, f.i31_w_cm2, "31", false)?,
            field_spec(f.g32, f.i32_w_cm2, "32", false)?,
            field_spec(f.gt, f.it_w_cm2, "T", true)?,
        ];
        for spec in fields {
            let v = match spec {
                FieldSpec::Rabi(v) | FieldSpec::Intensity(v) => v,
            };
            if !(v >= 0.0) || !v.is_finite() {
                return Err(SimError::Config(format!(
                    "field amplitudes must be finite and non-negative, got {v}"
                )));
            }
        }

        let p = &r.propagation;
        let span_tau = require(p.span_tau, "propagation.span_tau")?;
        if !(span_tau >= 0.0) || !span_tau.is_finite() {
            return Err(SimError::Config(format!("propagation.span_tau must be >= 0, got {span_tau}")));
        }
        let samples = p.samples.unwrap_or(401);
        if span_tau > 0.0 && samples < 2 {
            return Err(SimError::Config("propagation.samples must be at least 2".into()));
        }
        let velocity_nodes = p.velocity_nodes.unwrap_or(DEFAULT_NODES);
        if velocity_nodes == 0 {
            return Err(SimError::Config("propagation.velocity_nodes must be at least 1".into()));
        }
        for (key, v) in [("rtol_full", p.rtol_full), ("rtol_reduced", p.rtol_reduced)] {
            let v = v.unwrap_or(1e-7);
            if !(v > 0.0 && v < 1.0) {
                return Err(SimError::Config(format!("propagation.{key} must lie in (0, 1), got {v}")));
            }
        }
        let phi = f.phi_rad.unwrap_or(0.0);
        if !phi.is_finite() {
            return Err(SimError::Config("fields.phi_rad must be finite".into()));
        }

        Ok(ScenarioConfig {
            name: r.name.clone().unwrap_or_default(),
            medium,
            fields,
            phi,
            delta31: f.delta31.unwrap_or(0.0),
            delta32: f.delta32.unwrap_or(0.0),
            span_tau,
            samples: if span_tau == 0.0 { 1 } else { samples },
            velocity_nodes,
            rtol_full: p.rtol_full.unwrap_or(1e-7),
            rtol_reduced: p.rtol_reduced.unwrap_or(1e-9),
            cache_polarization: p.cache_polarization.unwrap_or(true),
            resolved: r,
        })
    }

    /// Rebuild after editing `resolved` (used for command-line overrides).
    pub fn with_overrides(&self, top: &RawConfig) -> Result<Self> {
        Self::from_raw(self.resolved.merged(top))
    }

    /// |Ω| in units of γ31 of each input wave.
    pub fn input_rabi(&self) -> Result<[f64; 3]> {
        let mut out = [0.0; 3];
        for w in Wave::ALL {
            out[w.index()] = match self.fields[w.index()] {
                FieldSpec::Rabi(g) => g,
                FieldSpec::Intensity(i) => self.medium.rabi_of(w, i)?,
            };
        }
        Ok(out)
    }

    /// Input intensities in W/cm².
    pub fn input_intensities(&self) -> Result<[f64; 3]> {
        let g = self.input_rabi()?;
        let mut out = [0.0; 3];
        for w in Wave::ALL {
            out[w.index()] = self.medium.intensity_of(w, g[w.index()])?;
        }
        Ok(out)
    }

    /// Field state at the entrance of the medium.
    pub fn initial_fields(&self) -> Result<FieldState> {
        let [g31, g32, gt] = self.input_rabi()?;
        let mut f = FieldState::from_amplitudes(g31, g32, gt, self.phi);
        f.delta31 = self.delta31;
        f.delta32 = self.delta32;
        Ok(f)
    }

    /// Deterministic SHA-256 of the resolved key/value set.
    pub fn config_hash(&self) -> String {
        let mut r = self.resolved.clone();
        r.preset = None;
        sha256_hex(serde_json::to_string(&r).expect("config serializes").as_bytes())
    }

    /// The resolved configuration as TOML text.
    pub fn to_toml(&self) -> String {
        toml::to_string(&self.resolved).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_checksums() {
        for p in PRESETS {
            assert_eq!(sha256_hex(p.text.as_bytes()), p.sha256, "preset {} drifted", p.name);
        }
    }

    #[test]
    fn presets_hold_expected_parameters() {
        for p in PRESETS {
            let c = ScenarioConfig::preset(p.name).unwrap();
            let m = &c.medium;
            assert!((m.lambda_cm(Wave::Optical31) / 517.27e-7 - 1.0).abs() < 1e-15);
            assert!((m.lambda_cm(Wave::Optical32) / 518.36e-7 - 1.0).abs() < 1e-15);
            assert_eq!(m.gamma31(), 3.46e7);
            assert_eq!(m.gamma32(), 1.66 * 3.46e7);
            assert_eq!(m.gamma21(), 2.6e-14 * 3.46e7);
            assert_eq!(m.mass_amu(), 24.0);
            assert_eq!((c.delta31, c.delta32), (0.0, 0.0));
            assert_eq!(c.fields[2], FieldSpec::Rabi(0.0));
        }
        let expect = [
            ("mg-fig2", 1e-3, 0.0, 10.0, 0.1),
            ("mg-fig3", 800.0, 1e-4, 60.0, 20.0),
            ("mg-fig4a", 800.0, 2e-3, 60.0, 20.0),
            ("mg-fig4b", 800.0, 2e-3, 300.0, 100.0),
        ];
        for (name, t, g, g31, g32) in expect {
            let c = ScenarioConfig::preset(name).unwrap();
            assert_eq!(c.medium.temperature_k(), t);
            assert_eq!(c.medium.dephasing(), g * 3.46e7);
            assert_eq!(c.fields[0], FieldSpec::Rabi(g31));
            assert_eq!(c.fields[1], FieldSpec::Rabi(g32));
        }
    }

    #[test]
    fn minimal_preset_config() {
        let c = ScenarioConfig::from_toml("preset = \"mg-fig2\"\n").unwrap();
        assert_eq!(c.name, "mg-fig2");
        assert_eq!(c.config_hash(), ScenarioConfig::preset("mg-fig2").unwrap().config_hash());
    }

    #[test]
    fn override_only_touches_given_key() {
        let base = ScenarioConfig::preset("mg-fig3").unwrap();
        let c = ScenarioConfig::from_toml("preset = \"mg-fig3\"\n[medium]\ndephasing_rel = 2e-3\n").unwrap();
        assert_eq!(c.medium.dephasing(), 2e-3 * 3.46e7);
        let mut a = c.resolved.clone();
        a.medium.dephasing_rel = base.resolved.medium.dephasing_rel;
        let mut b = base.resolved.clone();
        a.preset = None;
        b.preset = None;
        assert_eq!(a, b);
    }

    #[test]
    fn intensity_replaces_preset_rabi() {
        let c = ScenarioConfig::from_toml("preset = \"mg-fig3\"\n[fields]\ni31_w_cm2 = 18.8\n").unwrap();
        assert_eq!(c.fields[0], FieldSpec::Intensity(18.8));
        let g = c.input_rabi().unwrap()[0];
        assert!((g - 60.0).abs() < 0.3, "{g}");
    }

    #[test]
    fn both_field_specs_rejected() {
        let e = ScenarioConfig::from_toml("preset = \"mg-fig3\"\n[fields]\ng31 = 1.0\ni31_w_cm2 = 2.0\n");
        assert!(matches!(e, Err(SimError::Config(_))));
    }

    #[test]
    fn unknown_key_rejected_with_context() {
        let e = ScenarioConfig::from_toml("preset = \"mg-fig3\"\n[medium]\ngama31 = 1.0\n").unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("gama31") && msg.contains("line"), "{msg}");
    }

    #[test]
    fn multiphoton_violation_surfaces() {
        let e = ScenarioConfig::from_toml(
            "preset = \"mg-fig3\"\n[medium]\nomega_t_rad_s = 1.0e13\n",
        )
        .unwrap_err();
        assert!(matches!(e, SimError::MultiphotonResonance { .. }), "{e}");
    }

    #[test]
    fn validation_errors() {
        for text in [
            "preset = \"mg-fig3\"\n[propagation]\nsamples = 1\n",
            "preset = \"mg-fig3\"\n[propagation]\nspan_tau = -1.0\n",
            "preset = \"mg-fig3\"\n[propagation]\nvelocity_nodes = 0\n",
            "preset = \"nope\"\n",
            "[medium]\nlambda31_nm = 500.0\n",
        ] {
            assert!(ScenarioConfig::from_toml(text).is_err(), "{text}");
        }
    }

    #[test]
    fn zero_span_has_one_sample() {
        let c = ScenarioConfig::from_toml("preset = \"mg-fig2\"\n[propagation]\nspan_tau = 0.0\n").unwrap();
        assert_eq!(c.samples, 1);
    }

    #[test]
    fn hash_changes_with_content() {
        let a = ScenarioConfig::preset("mg-fig4a").unwrap();
        let b = ScenarioConfig::preset("mg-fig4b").unwrap();
        assert_ne!(a.config_hash(), b.config_hash());
        assert_eq!(a.config_hash(), ScenarioConfig::preset("mg-fig4a").unwrap().config_hash());
    }

    #[test]
    fn resolved_toml_roundtrips() {
        let c = ScenarioConfig::preset("mg-fig3").unwrap();
        let again = ScenarioConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(again.resolved, c.resolved);
    }
}
