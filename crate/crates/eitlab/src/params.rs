//! Atomic and optical parameters in fixed internal units.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::consts;

/// Validation errors for physical parameters.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamsError {
    #[error("{name} must be positive (got {value})")]
    NonPositive { name: &'static str, value: f64 },
    #[error("{name} must be non-negative (got {value})")]
    Negative { name: &'static str, value: f64 },
    #[error("{name} must be finite")]
    NonFinite { name: &'static str },
}

/// Atomic/optical constants and rates of the three-level medium.
///
/// Rates are angular, in rad/µs. `od` is the amplitude optical depth: with
/// the spinwave switched off a resonant probe is attenuated in amplitude by
/// `exp(-od)` over the full ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Excited-state coherence decay Γ [rad/µs].
    #[serde(rename = "gamma_e_rad_per_us")]
    pub gamma_e: f64,
    /// Spinwave decay γ [rad/µs].
    #[serde(rename = "gamma_s_rad_per_us")]
    pub gamma_s: f64,
    /// Standing-wave coherence decay γ̃ [rad/µs].
    #[serde(rename = "gamma_sw_rad_per_us")]
    pub gamma_sw: f64,
    /// Amplitude optical depth d (dimensionless).
    pub od: f64,
    /// Ensemble length L \[m\].
    #[serde(rename = "length_m")]
    pub length: f64,
    /// Probe transition wavelength λ \[m\].
    #[serde(rename = "wavelength_m")]
    pub wavelength: f64,
    /// Ensemble temperature T \[K\].
    #[serde(rename = "temperature_k")]
    pub temperature: f64,
    /// Atomic mass m \[kg\].
    #[serde(rename = "atom_mass_kg")]
    pub atom_mass: f64,
}

impl PhysicalParams {
    /// Parameters for a ⁸⁷Rb elongated-MOT ensemble: d = 190, L = 4 cm,
    /// T = 100 µK, probe on the D1 line.
    ///
    /// Γ defaults to 2π×5.75 rad/µs (Rb-87 D1 linewidth) and γ to
    /// 2π×500 Hz; both are configuration defaults, not measured inputs.
    /// γ̃ is computed from the thermal motion via [`motional_decay_rate`].
    pub fn rb87_defaults() -> Self {
        let temperature = 100e-6;
        let wavelength = 795e-9;
        let atom_mass = consts::RB87_MASS_KG;
        let gamma_sw =
            motional_decay_rate(temperature, atom_mass, wavelength).expect("positive defaults");
        Self {
            gamma_e: consts::angular_mhz(5.75),
            gamma_s: consts::angular_mhz(500e-6),
            gamma_sw,
            od: 190.0,
            length: 0.04,
            wavelength,
            temperature,
            atom_mass,
        }
    }

    pub fn validate(&self) -> Result<(), ParamsError> {
        let positives = [
            ("gamma_e", self.gamma_e),
            ("od", self.od),
            ("length", self.length),
            ("wavelength", self.wavelength),
            ("temperature", self.temperature),
            ("atom_mass", self.atom_mass),
        ];
        for (name, value) in positives {
            if !value.is_finite() {
                return Err(ParamsError::NonFinite { name });
            }
            if value <= 0.0 {
                return Err(ParamsError::NonPositive { name, value });
            }
        }
        for (name, value) in [("gamma_s", self.gamma_s), ("gamma_sw", self.gamma_sw)] {
            if !value.is_finite() {
                return Err(ParamsError::NonFinite { name });
            }
            if value < 0.0 {
                return Err(ParamsError::Negative { name, value });
            }
        }
        Ok(())
    }

    /// `√d`, the coupling that appears throughout the compact equations.
    pub fn sqrt_od(&self) -> f64 {
        self.od.sqrt()
    }
}

/// Decay rate of the standing-wave coherences due to thermal motion:
/// `γ̃ = 4π √(k_B T / m) / λ`, returned in rad/µs.
pub fn motional_decay_rate(
    temperature: f64,
    atom_mass: f64,
    wavelength: f64,
) -> Result<f64, ParamsError> {
    for (name, value) in [
        ("temperature", temperature),
        ("atom_mass", atom_mass),
        ("wavelength", wavelength),
    ] {
        if !value.is_finite() {
            return Err(ParamsError::NonFinite { name });
        }
        if value <= 0.0 {
            return Err(ParamsError::NonPositive { name, value });
        }
    }
    let thermal_speed = (consts::BOLTZMANN * temperature / atom_mass).sqrt();
    let rad_per_s = 4.0 * std::f64::consts::PI * thermal_speed / wavelength;
    Ok(rad_per_s * 1e-6)
}

/// Effective standing-wave decay under bichromatic driving with symmetric
/// detuning ±δ: `γ̃_eff = γ̃ + 2δ`.
pub fn effective_sw_decay(gamma_sw: f64, detuning: f64) -> f64 {
    debug_assert!(gamma_sw >= 0.0 && detuning >= 0.0);
    gamma_sw + 2.0 * detuning
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::consts::angular_mhz;
    use approx::assert_relative_eq;

    #[test]
    fn motional_rate_matches_quoted_mot_value() {
        // 100 µK Rb-87 at 795 nm comes out near 2π×0.25 MHz.
        let g = motional_decay_rate(100e-6, consts::RB87_MASS_KG, 795e-9).unwrap();
        let quoted = angular_mhz(0.25);
        assert!(
            (g - quoted).abs() / quoted < 0.05,
            "γ̃ = {g}, quoted {quoted}"
        );
    }

    #[test]
    fn motional_rate_zero_temperature_limit() {
        let g = motional_decay_rate(1e-30, consts::RB87_MASS_KG, 795e-9).unwrap();
        assert!(g < 1e-12);
        assert!(motional_decay_rate(0.0, consts::RB87_MASS_KG, 795e-9).is_err());
    }

    #[test]
    fn motional_rate_sqrt_t_scaling() {
        let g1 = motional_decay_rate(50e-6, consts::RB87_MASS_KG, 795e-9).unwrap();
        let g4 = motional_decay_rate(200e-6, consts::RB87_MASS_KG, 795e-9).unwrap();
        assert_relative_eq!(g4 / g1, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn motional_rate_inverse_wavelength_scaling() {
        let a = motional_decay_rate(100e-6, consts::RB87_MASS_KG, 795e-9).unwrap();
        let b = motional_decay_rate(100e-6, consts::RB87_MASS_KG, 2.0 * 795e-9).unwrap();
        assert_relative_eq!(a / b, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn motional_rate_rejects_nonpositive() {
        assert!(motional_decay_rate(1e-4, -1.0, 795e-9).is_err());
        assert!(motional_decay_rate(1e-4, consts::RB87_MASS_KG, 0.0).is_err());
    }

    #[test]
    fn effective_decay_examples() {
        let g = angular_mhz(0.25);
        let d = angular_mhz(4.0);
        assert_relative_eq!(
            effective_sw_decay(g, d),
            angular_mhz(8.25),
            max_relative = 1e-14
        );
        assert_eq!(effective_sw_decay(1.7, 0.0), 1.7);
        assert_eq!(effective_sw_decay(0.0, d), 2.0 * d);
    }

    #[test]
    fn defaults_validate() {
        PhysicalParams::rb87_defaults().validate().unwrap();
    }

    #[test]
    fn validation_catches_bad_fields() {
        let mut p = PhysicalParams::rb87_defaults();
        p.od = 0.0;
        assert!(matches!(
            p.validate(),
            Err(ParamsError::NonPositive { name: "od", .. })
        ));
        let mut p = PhysicalParams::rb87_defaults();
        p.gamma_s = -1.0;
        assert!(matches!(
            p.validate(),
            Err(ParamsError::Negative {
                name: "gamma_s",
                ..
            })
        ));
    }
}
