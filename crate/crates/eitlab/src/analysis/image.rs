//! Absorption-image processing: transverse optical depth from an image
//! pair.

use ndarray::Array2;

use super::AnalysisError;

/// A non-negative intensity image with its spatial calibration along the
/// propagation (column) axis.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityImage {
    pub pixels: Array2<f64>,
    /// Metres per pixel along z.
    pub m_per_px: f64,
}

impl IntensityImage {
    pub fn new(pixels: Array2<f64>, m_per_px: f64) -> Result<Self, AnalysisError> {
        if pixels.iter().any(|&p| !p.is_finite() || p < 0.0) {
            return Err(AnalysisError::BadPixels);
        }
        Ok(Self { pixels, m_per_px })
    }
}

/// Optical depth map with per-pixel saturation flags.
#[derive(Debug, Clone, PartialEq)]
pub struct OpticalDepthImage {
    pub od: Array2<f64>,
    pub saturated: Array2<bool>,
    pub n_saturated: usize,
}

impl OpticalDepthImage {
    /// Column profile integrated over a row range (the transverse region
    /// containing the pulse).
    pub fn column_profile(&self, rows: Option<(usize, usize)>) -> Vec<f64> {
        let (r0, r1) = rows.unwrap_or((0, self.od.nrows()));
        let r1 = r1.min(self.od.nrows());
        (0..self.od.ncols())
            .map(|c| (r0..r1).map(|r| self.od[(r, c)]).sum())
            .collect()
    }
}

/// Intensity ratios below this floor saturate the optical depth.
pub const RATIO_FLOOR: f64 = 1e-6;

/// Transverse amplitude optical depth from an image pair:
/// `d = −ln(I_out/I_0)/2`. Pixels where the ratio falls below
/// [`RATIO_FLOOR`] (or where the reference vanishes) are clamped to the
/// floor value and flagged.
pub fn optical_depth_image(
    i_out: &IntensityImage,
    i_0: &IntensityImage,
) -> Result<OpticalDepthImage, AnalysisError> {
    let shape_out = (i_out.pixels.nrows(), i_out.pixels.ncols());
    let shape_ref = (i_0.pixels.nrows(), i_0.pixels.ncols());
    if shape_out != shape_ref {
        return Err(AnalysisError::ShapeMismatch(shape_out, shape_ref));
    }
    if i_0.pixels.iter().all(|&p| p == 0.0) {
        return Err(AnalysisError::ZeroReference);
    }
    let clamp_od = -RATIO_FLOOR.ln() / 2.0;
    let mut od = Array2::zeros(shape_out);
    let mut saturated = Array2::from_elem(shape_out, false);
    let mut n_saturated = 0;
    for r in 0..shape_out.0 {
        for c in 0..shape_out.1 {
            let reference = i_0.pixels[(r, c)];
            if reference <= 0.0 {
                od[(r, c)] = clamp_od;
                saturated[(r, c)] = true;
                n_saturated += 1;
                continue;
            }
            let ratio = i_out.pixels[(r, c)] / reference;
            if ratio < RATIO_FLOOR {
                od[(r, c)] = clamp_od;
                saturated[(r, c)] = true;
                n_saturated += 1;
            } else {
                od[(r, c)] = -ratio.ln() / 2.0;
            }
        }
    }
    Ok(OpticalDepthImage {
        od,
        saturated,
        n_saturated,
    })
}
