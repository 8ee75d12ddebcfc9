//! Stroboscopic space–time records of the spinwave and detector traces.

use ndarray::{Array2, ArrayView1};
use num_complex::Complex64;
use thiserror::Error;

/// Space–time record of `|S0|` plus the boundary detector traces
/// `E+(ξ=1, t)` and `E−(ξ=0, t)`.
///
/// `s_mag` is scaled so its maximum is 1; the factor divided out is kept in
/// `normalization` (0 together with `zero_signal` for an all-zero record).
/// Detector traces are kept in raw field units.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinwaveRecord {
    /// `|S0|` frames, shape `[n_frames, n_xi]`.
    pub s_mag: Array2<f64>,
    /// Strobe times of the frames \[µs\].
    pub times: Vec<f64>,
    /// ξ coordinate of each column.
    pub xi: Vec<f64>,
    /// Sample times of the detector traces \[µs\].
    pub detector_times: Vec<f64>,
    /// `E+(ξ=1, t)` per detector sample.
    pub out_forward: Vec<Complex64>,
    /// `E−(ξ=0, t)` per detector sample.
    pub out_backward: Vec<Complex64>,
    /// Max `|S0|` divided out of `s_mag`.
    pub normalization: f64,
    /// Set when the record carried no signal at all.
    pub zero_signal: bool,
}

impl SpinwaveRecord {
    /// Build a record from raw `|S0|` frames, scaling to max 1.
    pub fn from_raw(
        s_mag: Array2<f64>,
        times: Vec<f64>,
        xi: Vec<f64>,
        detector_times: Vec<f64>,
        out_forward: Vec<Complex64>,
        out_backward: Vec<Complex64>,
    ) -> Self {
        let mut record = Self {
            s_mag,
            times,
            xi,
            detector_times,
            out_forward,
            out_backward,
            normalization: 1.0,
            zero_signal: false,
        };
        let max = record.peak();
        if max > 0.0 {
            record.s_mag.mapv_inplace(|v| v / max);
            record.normalization = max;
        } else {
            record.normalization = 0.0;
            record.zero_signal = true;
        }
        record
    }

    pub fn n_frames(&self) -> usize {
        self.s_mag.nrows()
    }

    pub fn n_xi(&self) -> usize {
        self.s_mag.ncols()
    }

    pub fn frame(&self, i: usize) -> ArrayView1<'_, f64> {
        self.s_mag.row(i)
    }

    /// Current maximum of `s_mag`.
    pub fn peak(&self) -> f64 {
        self.s_mag.iter().fold(0.0f64, |a, &b| a.max(b))
    }

    /// Rescale `s_mag` to max 1, accumulating the factor into
    /// `normalization`. Idempotent; an all-zero record passes through with
    /// `zero_signal` set.
    pub fn normalized(mut self) -> Self {
        let max = self.peak();
        if max > 0.0 {
            self.s_mag.mapv_inplace(|v| v / max);
            self.normalization *= max;
        } else {
            self.zero_signal = true;
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CompareError {
    #[error("records have different n_xi ({0} vs {1})")]
    SpatialMismatch(usize, usize),
    #[error("records share no strobe times")]
    NoCommonFrames,
}

/// Frame-by-frame difference of two records over their common strobe times.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordDiff {
    /// RMS of the elementwise difference of the normalized matrices.
    pub rms: f64,
    /// Largest absolute elementwise difference.
    pub max_abs: f64,
    /// Per-frame (time, RMS difference).
    pub per_frame: Vec<(f64, f64)>,
    pub frames_compared: usize,
}

/// Align two records on common strobe times (within 1 ns), renormalize each
/// aligned sub-matrix to max 1, and report RMS / max-abs differences.
pub fn compare(a: &SpinwaveRecord, b: &SpinwaveRecord) -> Result<RecordDiff, CompareError> {
    if a.n_xi() != b.n_xi() {
        return Err(CompareError::SpatialMismatch(a.n_xi(), b.n_xi()));
    }
    const TOL: f64 = 1e-3;
    let mut pairs = Vec::new();
    let mut j = 0usize;
    for (i, &ta) in a.times.iter().enumerate() {
        while j < b.times.len() && b.times[j] < ta - TOL {
            j += 1;
        }
        if j < b.times.len() && (b.times[j] - ta).abs() <= TOL {
            pairs.push((i, j, ta));
        }
    }
    if pairs.is_empty() {
        return Err(CompareError::NoCommonFrames);
    }
    let mut scale_a = 0.0f64;
    let mut scale_b = 0.0f64;
    for &(ia, ib, _) in &pairs {
        scale_a = a.frame(ia).iter().fold(scale_a, |m, &v| m.max(v));
        scale_b = b.frame(ib).iter().fold(scale_b, |m, &v| m.max(v));
    }
    let sa = if scale_a > 0.0 { scale_a } else { 1.0 };
    let sb = if scale_b > 0.0 { scale_b } else { 1.0 };

    let mut sum_sq = 0.0;
    let mut max_abs = 0.0f64;
    let mut per_frame = Vec::with_capacity(pairs.len());
    let n_cols = a.n_xi();
    for &(ia, ib, t) in &pairs {
        let fa = a.frame(ia);
        let fb = b.frame(ib);
        let mut frame_sq = 0.0;
        for k in 0..n_cols {
            let d = fa[k] / sa - fb[k] / sb;
            frame_sq += d * d;
            max_abs = max_abs.max(d.abs());
        }
        sum_sq += frame_sq;
        per_frame.push((t, (frame_sq / n_cols as f64).sqrt()));
    }
    let rms = (sum_sq / (pairs.len() * n_cols) as f64).sqrt();
    Ok(RecordDiff {
        rms,
        max_abs,
        per_frame,
        frames_compared: pairs.len(),
    })
}
