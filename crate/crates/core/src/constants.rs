//! Physical constants in Gaussian (CGS) units.

/// Reduced Planck constant, erg·s.
pub const HBAR: f64 = 1.054_571_817e-27;
/// Speed of light, cm/s.
pub const C_LIGHT: f64 = 2.997_924_58e10;
/// Boltzmann constant, erg/K.
pub const K_BOLTZMANN: f64 = 1.380_649e-16;
/// Atomic mass unit, g.
pub const AMU: f64 = 1.660_539_066_60e-24;
/// erg/(s·cm²) per W/cm².
pub const ERG_PER_S_PER_WATT: f64 = 1.0e7;
