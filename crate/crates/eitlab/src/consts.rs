//! Physical constants and unit helpers.

/// Boltzmann constant [J/K].
pub const BOLTZMANN: f64 = 1.380649e-23;

/// Mass of a ⁸⁷Rb atom \[kg\].
pub const RB87_MASS_KG: f64 = 1.443e-25;

/// Speed of light [m/s].
pub const SPEED_OF_LIGHT_M_PER_S: f64 = 2.99792458e8;

/// Speed of light [m/µs].
pub const SPEED_OF_LIGHT_M_PER_US: f64 = SPEED_OF_LIGHT_M_PER_S * 1e-6;

/// Angular rate [rad/µs] of a frequency given in MHz.
///
/// 1 MHz is one cycle per µs, so `f` MHz corresponds to `2π f` rad/µs.
pub fn angular_mhz(f_mhz: f64) -> f64 {
    std::f64::consts::TAU * f_mhz
}
