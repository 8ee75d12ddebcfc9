//! Frame-by-frame record analysis: centroid tracking, velocity fits, and
//! width series.

use super::fit::{gaussian_profile_fit, linear_fit, FitResult};
use super::AnalysisError;
use crate::record::SpinwaveRecord;

/// First moment ⟨ξ⟩ per strobe frame. Frames whose integrated signal falls
/// below the threshold are marked invalid.
#[derive(Debug, Clone, PartialEq)]
pub struct CentroidTrack {
    pub times: Vec<f64>,
    pub centroid: Vec<f64>,
    /// Integrated |S| per frame.
    pub total: Vec<f64>,
    pub valid: Vec<bool>,
}

impl CentroidTrack {
    /// (t, ⟨ξ⟩) pairs of the valid frames inside a time window.
    pub fn valid_in_window(&self, t0: f64, t1: f64) -> (Vec<f64>, Vec<f64>) {
        let mut ts = Vec::new();
        let mut cs = Vec::new();
        for i in 0..self.times.len() {
            if self.valid[i] && self.times[i] >= t0 && self.times[i] <= t1 {
                ts.push(self.times[i]);
                cs.push(self.centroid[i]);
            }
        }
        (ts, cs)
    }
}

/// Track `⟨ξ⟩ = Σ ξ|S| / Σ|S|` over the record. `threshold` is an absolute
/// floor on the frame-integrated |S| below which a frame is invalid.
pub fn centroid_track(record: &SpinwaveRecord, threshold: f64) -> CentroidTrack {
    let n_frames = record.n_frames();
    let mut centroid = Vec::with_capacity(n_frames);
    let mut total = Vec::with_capacity(n_frames);
    let mut valid = Vec::with_capacity(n_frames);
    for i in 0..n_frames {
        let frame = record.frame(i);
        let sum: f64 = frame.sum();
        let first: f64 = frame.iter().zip(&record.xi).map(|(&s, &x)| s * x).sum();
        total.push(sum);
        if sum > threshold && sum > 0.0 {
            centroid.push(first / sum);
            valid.push(true);
        } else {
            centroid.push(f64::NAN);
            valid.push(false);
        }
    }
    CentroidTrack {
        times: record.times.clone(),
        centroid,
        total,
        valid,
    }
}

/// Least-squares slope of the centroid over a window: the measured group
/// velocity with its 1σ uncertainty. Needs at least three valid frames.
pub fn group_velocity_fit(
    track: &CentroidTrack,
    window: (f64, f64),
) -> Result<FitResult, AnalysisError> {
    let (ts, cs) = track.valid_in_window(window.0, window.1);
    if ts.len() < 3 {
        return Err(AnalysisError::InsufficientFrames {
            needed: 3,
            found: ts.len(),
        });
    }
    linear_fit(&ts, &cs)
}

/// Gaussian FWHM per strobe frame; frames whose fit does not converge are
/// omitted.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FwhmSeries {
    pub times: Vec<f64>,
    pub fwhm: Vec<f64>,
    pub sigma: Vec<f64>,
    pub amplitude: Vec<f64>,
}

pub fn fwhm_series(record: &SpinwaveRecord) -> FwhmSeries {
    let mut out = FwhmSeries::default();
    for i in 0..record.n_frames() {
        let frame = record.frame(i);
        let y: Vec<f64> = frame.to_vec();
        let fit = gaussian_profile_fit(&record.xi, &y);
        if fit.converged {
            let fwhm = fit.param("fwhm").unwrap();
            out.times.push(record.times[i]);
            out.fwhm.push(fwhm.value);
            out.sigma.push(fwhm.sigma);
            out.amplitude.push(fit.value("amplitude").unwrap());
        }
    }
    out
}

/// Scale a record so its maximum |S| is 1 (see
/// [`SpinwaveRecord::normalized`]); an all-zero record passes through with
/// its `zero_signal` flag set.
pub fn normalize_record(record: SpinwaveRecord) -> SpinwaveRecord {
    record.normalized()
}
