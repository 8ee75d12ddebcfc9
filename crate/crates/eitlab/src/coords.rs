//! Density-weighted coordinate rescaling z → ξ.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoordsError {
    #[error("empty ensemble: density profile is identically zero")]
    EmptyEnsemble,
    #[error("density and position arrays must have equal length >= 2")]
    BadShape,
    #[error("density must be non-negative and finite")]
    BadDensity,
    #[error("z samples must be strictly increasing")]
    BadAxis,
}

/// Sampled map from physical position z to the normalized coordinate
/// ξ ∈ [0, 1] in which equal intervals contain equal numbers of atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateMap {
    pub z: Vec<f64>,
    pub xi: Vec<f64>,
}

impl CoordinateMap {
    /// ξ at an arbitrary z by linear interpolation (clamped to [0, 1]).
    pub fn lookup(&self, z: f64) -> f64 {
        if z <= self.z[0] {
            return 0.0;
        }
        if z >= *self.z.last().unwrap() {
            return 1.0;
        }
        let k = self.z.partition_point(|&zk| zk <= z) - 1;
        let frac = (z - self.z[k]) / (self.z[k + 1] - self.z[k]);
        self.xi[k] + frac * (self.xi[k + 1] - self.xi[k])
    }
}

/// Normalized cumulative integral of a sampled density profile η(z),
/// computed with the trapezoid rule: ξ(z) = ∫₀^z η dz' / ∫₀^L η dz'.
pub fn xi_from_density(density: &[f64], z: &[f64]) -> Result<CoordinateMap, CoordsError> {
    if density.len() != z.len() || density.len() < 2 {
        return Err(CoordsError::BadShape);
    }
    if density.iter().any(|&d| !d.is_finite() || d < 0.0) {
        return Err(CoordsError::BadDensity);
    }
    if z.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(CoordsError::BadAxis);
    }
    let mut cumulative = Vec::with_capacity(z.len());
    cumulative.push(0.0);
    let mut acc = 0.0;
    for k in 1..z.len() {
        acc += 0.5 * (density[k] + density[k - 1]) * (z[k] - z[k - 1]);
        cumulative.push(acc);
    }
    let total = *cumulative.last().unwrap();
    if total <= 0.0 {
        return Err(CoordsError::EmptyEnsemble);
    }
    let mut xi: Vec<f64> = cumulative.iter().map(|&c| (c / total).min(1.0)).collect();
    *xi.last_mut().unwrap() = 1.0;
    Ok(CoordinateMap { z: z.to_vec(), xi })
}
