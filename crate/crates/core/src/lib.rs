//! Continuous-wave THz generation by three-wave mixing in a closed-loop Λ
//! medium under electromagnetically induced transparency.
//!
//! The crate solves the steady-state density matrix of the driven atom
//! ([`bloch`]), averages it over the thermal velocity distribution
//! ([`doppler`]), propagates the three field envelopes through the medium
//! ([`full`], [`reduced`]) and checks the numerics against the closed-form
//! Jacobi-elliptic solution ([`elliptic`]).

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bloch;
pub mod config;
pub mod constants;
pub mod doppler;
pub mod elliptic;
pub mod error;
pub mod full;
pub mod medium;
pub mod ode;
pub mod output;
pub mod reduced;
pub mod run;
pub mod trajectory;

pub use config::ScenarioConfig;
pub use error::{Result, SimError};
pub use medium::{AtomicMedium, FieldState, Wave};
pub use run::{run_scenario, Mode};
