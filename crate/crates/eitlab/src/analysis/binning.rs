//! Equal-atom binning along the propagation axis.

use ndarray::Array2;

use super::AnalysisError;

/// A partition of pixel columns into bins holding roughly equal cumulative
/// density. `edges` has `n_bins + 1` entries; bin `b` covers pixel columns
/// `edges[b]..edges[b+1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinningTransform {
    pub edges: Vec<usize>,
}

impl BinningTransform {
    pub fn n_bins(&self) -> usize {
        self.edges.len() - 1
    }

    /// Sum a 1-D profile into the bins. The partition property makes the
    /// binned total equal the unbinned total exactly.
    pub fn apply_profile(&self, profile: &[f64]) -> Vec<f64> {
        self.edges
            .windows(2)
            .map(|w| profile[w[0]..w[1]].iter().sum())
            .collect()
    }

    /// Sum image columns into the bins, row by row.
    pub fn apply_image(&self, image: &Array2<f64>) -> Array2<f64> {
        let rows = image.nrows();
        let mut out = Array2::zeros((rows, self.n_bins()));
        for r in 0..rows {
            for (b, w) in self.edges.windows(2).enumerate() {
                out[(r, b)] = (w[0]..w[1]).map(|c| image[(r, c)]).sum();
            }
        }
        out
    }
}

/// Choose bin edges so each bin holds an equal share of the cumulative
/// density, to within one pixel.
pub fn equal_atom_binning(
    profile: &[f64],
    n_bins: usize,
) -> Result<BinningTransform, AnalysisError> {
    if n_bins == 0 || n_bins > profile.len() {
        return Err(AnalysisError::TooManyBins {
            requested: n_bins,
            available: profile.len(),
        });
    }
    let mut cumulative = Vec::with_capacity(profile.len() + 1);
    cumulative.push(0.0);
    let mut acc = 0.0;
    for &p in profile {
        acc += p.max(0.0);
        cumulative.push(acc);
    }
    let total = acc;
    if total <= 0.0 {
        return Err(AnalysisError::DegenerateDensity);
    }
    let mut edges = Vec::with_capacity(n_bins + 1);
    edges.push(0usize);
    for b in 1..n_bins {
        let target = total * b as f64 / n_bins as f64;
        let mut k = cumulative.partition_point(|&c| c < target);
        k = k.clamp(*edges.last().unwrap(), profile.len());
        edges.push(k);
    }
    edges.push(profile.len());
    Ok(BinningTransform { edges })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    #[test]
    fn uniform_density_gives_near_equal_widths() {
        // 1384 pixels into 200 bins: widths may differ by at most one pixel.
        let profile = vec![1.0; 1384];
        let t = equal_atom_binning(&profile, 200).unwrap();
        assert_eq!(t.n_bins(), 200);
        let widths: Vec<usize> = t.edges.windows(2).map(|w| w[1] - w[0]).collect();
        let min = *widths.iter().min().unwrap();
        let max = *widths.iter().max().unwrap();
        assert!(max - min <= 1, "widths range {min}..{max}");
    }

    #[test]
    fn concentrated_density_concentrates_bins() {
        let mut profile = vec![0.0; 100];
        for p in profile.iter_mut().take(50) {
            *p = 1.0;
        }
        let t = equal_atom_binning(&profile, 10).unwrap();
        // All interior edges fall in the populated left half.
        for &e in &t.edges[1..10] {
            assert!(e <= 50, "edge {e} beyond the populated region");
        }
    }

    #[test]
    fn binned_total_is_exact() {
        let profile: Vec<f64> = (0..517).map(|i| ((i as f64) * 0.13).sin().abs()).collect();
        let t = equal_atom_binning(&profile, 37).unwrap();
        let binned = t.apply_profile(&profile);
        let total: f64 = profile.iter().sum();
        let binned_total: f64 = binned.iter().sum();
        // Partition property: every pixel lands in exactly one bin, so the
        // totals agree to summation-order rounding.
        assert!((total - binned_total).abs() <= 1e-12 * total);
    }

    #[test]
    fn per_bin_share_within_one_pixel() {
        let profile: Vec<f64> = (0..997)
            .map(|i| 1.0 + 0.8 * ((i as f64) * 0.05).cos())
            .collect();
        let t = equal_atom_binning(&profile, 100).unwrap();
        let binned = t.apply_profile(&profile);
        let total: f64 = profile.iter().sum();
        let target = total / 100.0;
        let max_pixel = profile.iter().cloned().fold(0.0f64, f64::max);
        for &b in &binned {
            assert!((b - target).abs() <= max_pixel + 1e-12);
        }
    }

    #[test]
    fn image_binning_preserves_totals_per_row() {
        let image = Array2::from_shape_fn((3, 60), |(r, c)| (r + 1) as f64 * (c as f64 + 0.5));
        let profile: Vec<f64> = (0..60).map(|c| image[(0, c)]).collect();
        let t = equal_atom_binning(&profile, 12).unwrap();
        let binned = t.apply_image(&image);
        for r in 0..3 {
            let row_total: f64 = (0..60).map(|c| image[(r, c)]).sum();
            let binned_total: f64 = (0..12).map(|b| binned[(r, b)]).sum();
            assert!((row_total - binned_total).abs() < 1e-9);
        }
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(
            equal_atom_binning(&[0.0; 10], 5),
            Err(AnalysisError::DegenerateDensity)
        ));
        assert!(matches!(
            equal_atom_binning(&[1.0; 10], 11),
            Err(AnalysisError::TooManyBins { .. })
        ));
    }
}
