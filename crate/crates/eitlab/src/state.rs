//! Instantaneous field and coherence arrays on the ξ grid.

use ndarray::Array1;
use num_complex::Complex64;

/// Complex envelopes at one instant: probe fields `E±`, excited-state
/// coherences `P±`, the spinwave `S0`, and the ±2k standing-wave
/// coherences `S±`. All arrays share the same length.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub e_plus: Array1<Complex64>,
    pub e_minus: Array1<Complex64>,
    pub p_plus: Array1<Complex64>,
    pub p_minus: Array1<Complex64>,
    pub s0: Array1<Complex64>,
    pub s_plus: Array1<Complex64>,
    pub s_minus: Array1<Complex64>,
}

impl FieldState {
    pub fn zeros(n_xi: usize) -> Self {
        Self {
            e_plus: Array1::zeros(n_xi),
            e_minus: Array1::zeros(n_xi),
            p_plus: Array1::zeros(n_xi),
            p_minus: Array1::zeros(n_xi),
            s0: Array1::zeros(n_xi),
            s_plus: Array1::zeros(n_xi),
            s_minus: Array1::zeros(n_xi),
        }
    }

    pub fn n_xi(&self) -> usize {
        self.s0.len()
    }

    /// Largest magnitude over every array; NaN entries propagate to NaN.
    pub fn max_abs(&self) -> f64 {
        [
            &self.e_plus,
            &self.e_minus,
            &self.p_plus,
            &self.p_minus,
            &self.s0,
            &self.s_plus,
            &self.s_minus,
        ]
        .iter()
        .flat_map(|a| a.iter())
        .map(|c| c.norm_sqr())
        .fold(0.0f64, |acc, v| {
            if acc.is_nan() || v.is_nan() {
                f64::NAN
            } else {
                acc.max(v)
            }
        })
        .sqrt()
    }
}
