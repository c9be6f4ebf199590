use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use thzmix::config::{RawConfig, PRESETS};
use thzmix::output::{Format, RunManifest};
use thzmix::run::{failed_manifest, run_scenario, Mode};
use thzmix::{ScenarioConfig, SimError};

#[derive(Parser)]
#[command(name = "thzmix", version, about = "THz generation in a closed-loop Lambda medium")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario (or several with --batch).
    Run {
        /// Config file, or the name of a built-in preset.
        #[arg(required = true)]
        configs: Vec<String>,
        #[arg(long, value_enum, default_value = "full")]
        mode: Mode,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        /// Override the number of velocity nodes.
        #[arg(long)]
        velocity_nodes: Option<usize>,
        /// Override the relative tolerance of the selected path.
        #[arg(long)]
        rtol: Option<f64>,
        /// Run every config concurrently, each in its own subdirectory.
        #[arg(long)]
        batch: bool,
    },
    /// Built-in scenarios.
    Presets {
        #[command(subcommand)]
        command: PresetCommand,
    },
}

#[derive(Subcommand)]
enum PresetCommand {
    /// List preset names.
    List,
    /// Print a preset's resolved configuration.
    Show { name: String },
}

fn load(spec: &str, mode: Mode, velocity_nodes: Option<usize>, rtol: Option<f64>) -> Result<ScenarioConfig, SimError> {
    let path = Path::new(spec);
    let config = if path.exists() {
        ScenarioConfig::load(path)?
    } else if thzmix::config::find_preset(spec).is_some() {
        ScenarioConfig::preset(spec)?
    } else {
        return Err(SimError::Config(format!("no such config file or preset: {spec}")));
    };
    let mut top = RawConfig::default();
    top.propagation.velocity_nodes = velocity_nodes;
    if let Some(r) = rtol {
        match mode {
            Mode::Reduced => top.propagation.rtol_reduced = Some(r),
            _ => top.propagation.rtol_full = Some(r),
        }
    }
    config.with_overrides(&top)
}

fn report(m: &RunManifest) {
    match &m.error {
        Some(e) => eprintln!("{}: error: {e}", m.info.scenario),
        None => {
            println!("{} ({})", m.info.scenario, m.info.mode);
            if let Some(s) = &m.info.summary {
                println!(
                    "  peak I_T = {:.4e} W/cm2 at tau = {:.4e} (z = {:.3} cm), efficiency {:.4e} (bound {:.4e})",
                    s.peak_thz_w_cm2, s.tau_at_peak, s.z_cm_at_peak, s.peak_efficiency, s.efficiency_bound
                );
            }
            if let Some(c) = &m.info.compare {
                println!(
                    "  max relative I_T deviation from closed form: {:.3e} (u20^2 = {:.4e}); fitted u20^2 = {:.4e}: {:.3e}",
                    c.max_rel_thz_deviation, c.u20sq, c.fitted_u20sq, c.fitted_max_rel_thz_deviation
                );
            }
            for o in &m.outputs {
                println!("  wrote {o}");
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Presets { command: PresetCommand::List } => {
            for p in PRESETS {
                println!("{}", p.name);
            }
            ExitCode::SUCCESS
        }
        Command::Presets { command: PresetCommand::Show { name } } => match ScenarioConfig::preset(&name) {
            Ok(c) => {
                print!("{}", c.to_toml());
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::FAILURE
            }
        },
        Command::Run { configs, mode, out, format, velocity_nodes, rtol, batch } => {
            if configs.len() > 1 && !batch {
                eprintln!("error: several configs given; pass --batch to run them concurrently");
                return ExitCode::from(2);
            }
            let run_one = |spec: &String| -> RunManifest {
                match load(spec, mode, velocity_nodes, rtol) {
                    Ok(config) => {
                        let dir = if batch { out.join(&config.name) } else { out.clone() };
                        run_scenario(&config, mode, &dir, format)
                    }
                    Err(e) => {
                        let label = Path::new(spec)
                            .file_stem()
                            .map(|s| s.to_string_lossy().into_owned())
                            .unwrap_or_else(|| spec.clone());
                        let dir = if batch { out.join(&label) } else { out.clone() };
                        failed_manifest(spec, mode, format, &dir, &e)
                    }
                }
            };
            let manifests: Vec<RunManifest> = if batch {
                configs.par_iter().map(run_one).collect()
            } else {
                configs.iter().map(run_one).collect()
            };
            manifests.iter().for_each(report);
            if manifests.iter().any(|m| m.error.is_some()) {
                ExitCode::FAILURE
            } else {
                ExitCode::SUCCESS
            }
        }
    }
}
