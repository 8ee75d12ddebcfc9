//! Piecewise control-field schedules and probe pulse envelopes.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScheduleError {
    #[error("segment {index} is not time-ordered (t_start >= t_end)")]
    Unordered { index: usize },
    #[error("segments {prev} and {index} overlap")]
    Overlap { prev: usize, index: usize },
    #[error("segment {index} has a non-finite Rabi frequency")]
    NonFinite { index: usize },
    #[error("ramp time {ramp_time} exceeds the length of segment {index}")]
    RampTooLong { index: usize, ramp_time: f64 },
    #[error("detuning must be finite and non-negative")]
    BadDetuning,
}

/// Edge shape used when a control amplitude switches at a segment boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ramp {
    Step,
    Linear,
    Smooth,
}

/// One piecewise-constant interval of the control drive. The `ramp` shape
/// governs the transition into the segment at `t_start` and out of it when
/// it ends into a gap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlSegment {
    #[serde(rename = "t_start_us")]
    pub t_start: f64,
    #[serde(rename = "t_end_us")]
    pub t_end: f64,
    #[serde(rename = "omega_plus_rad_per_us")]
    pub omega_plus: Complex64,
    #[serde(rename = "omega_minus_rad_per_us")]
    pub omega_minus: Complex64,
    pub ramp: Ramp,
}

/// Time-ordered, non-overlapping control segments with an optional symmetric
/// detuning for bichromatic operation. Gaps between segments evaluate to
/// zero drive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlSchedule {
    pub segments: Vec<ControlSegment>,
    /// Symmetric control detuning δ [rad/µs]; how it is applied is selected
    /// by the solver's bichromatic mode.
    #[serde(rename = "detuning_rad_per_us", default)]
    pub detuning: f64,
    /// Duration of ramped edges \[µs\].
    #[serde(rename = "ramp_time_us", default = "default_ramp_time")]
    pub ramp_time: f64,
}

fn default_ramp_time() -> f64 {
    0.2
}

impl ControlSchedule {
    pub fn new(segments: Vec<ControlSegment>, detuning: f64) -> Result<Self, ScheduleError> {
        let schedule = Self {
            segments,
            detuning,
            ramp_time: default_ramp_time(),
        };
        schedule.validate()?;
        Ok(schedule)
    }

    pub fn validate(&self) -> Result<(), ScheduleError> {
        if !self.detuning.is_finite() || self.detuning < 0.0 {
            return Err(ScheduleError::BadDetuning);
        }
        for (index, seg) in self.segments.iter().enumerate() {
            if !(seg.t_start < seg.t_end) {
                return Err(ScheduleError::Unordered { index });
            }
            let finite = seg.omega_plus.re.is_finite()
                && seg.omega_plus.im.is_finite()
                && seg.omega_minus.re.is_finite()
                && seg.omega_minus.im.is_finite();
            if !finite {
                return Err(ScheduleError::NonFinite { index });
            }
            if seg.ramp != Ramp::Step && self.ramp_time > seg.t_end - seg.t_start {
                return Err(ScheduleError::RampTooLong {
                    index,
                    ramp_time: self.ramp_time,
                });
            }
            if index > 0 && self.segments[index - 1].t_end > seg.t_start {
                return Err(ScheduleError::Overlap {
                    prev: index - 1,
                    index,
                });
            }
        }
        Ok(())
    }

    /// Earliest start and latest end over all segments (0..0 when empty).
    pub fn span(&self) -> (f64, f64) {
        match (self.segments.first(), self.segments.last()) {
            (Some(a), Some(b)) => (a.t_start, b.t_end),
            _ => (0.0, 0.0),
        }
    }

    /// Times at which the drive switches (segment starts and ends).
    pub fn switch_times(&self) -> Vec<f64> {
        let mut times = Vec::with_capacity(2 * self.segments.len());
        for (i, seg) in self.segments.iter().enumerate() {
            times.push(seg.t_start);
            // A contiguous follow-on segment shares the boundary.
            let contiguous_next = self
                .segments
                .get(i + 1)
                .is_some_and(|n| n.t_start == seg.t_end);
            if !contiguous_next {
                times.push(seg.t_end);
            }
        }
        times.dedup();
        times
    }

    fn raw(&self, t: f64) -> (Complex64, Complex64) {
        for seg in &self.segments {
            if t >= seg.t_start && t < seg.t_end {
                return (seg.omega_plus, seg.omega_minus);
            }
        }
        (Complex64::ZERO, Complex64::ZERO)
    }

    /// Drive pair (Ω+, Ω−) at time `t`, with segment edges shaped by the
    /// segment's ramp over `ramp_time`.
    pub fn eval(&self, t: f64) -> (Complex64, Complex64) {
        // Locate the most recent switch boundary at or before t.
        let mut boundary: Option<(f64, Ramp)> = None;
        for (i, seg) in self.segments.iter().enumerate() {
            if seg.t_start <= t && boundary.is_none_or(|(b, _)| seg.t_start >= b) {
                boundary = Some((seg.t_start, seg.ramp));
            }
            if seg.t_end <= t {
                let contiguous_next = self
                    .segments
                    .get(i + 1)
                    .is_some_and(|n| n.t_start == seg.t_end);
                if !contiguous_next && boundary.is_none_or(|(b, _)| seg.t_end >= b) {
                    boundary = Some((seg.t_end, seg.ramp));
                }
            }
        }
        let target = self.raw(t);
        let Some((t_b, ramp)) = boundary else {
            return target;
        };
        let x = (t - t_b) / self.ramp_time;
        if ramp == Ramp::Step || x >= 1.0 {
            return target;
        }
        let w = match ramp {
            Ramp::Step => 1.0,
            Ramp::Linear => x,
            Ramp::Smooth => 0.5 * (1.0 - (std::f64::consts::PI * x).cos()),
        };
        let before = self.raw(t_b - 1e-9);
        (
            before.0 + (target.0 - before.0) * w,
            before.1 + (target.1 - before.1) * w,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeDirection {
    Forward,
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeShape {
    Gaussian,
}

/// Probe pulse injected at one boundary of the ensemble, in the
/// dimensionless field units of the compact equations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbePulse {
    pub peak_amplitude: f64,
    #[serde(rename = "center_time_us")]
    pub center_time: f64,
    #[serde(rename = "fwhm_us")]
    pub fwhm: f64,
    pub direction: ProbeDirection,
    pub shape: ProbeShape,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProbeError {
    #[error("probe fwhm must be positive (got {0})")]
    BadFwhm(f64),
    #[error("probe amplitude must be non-negative and finite (got {0})")]
    BadAmplitude(f64),
}

impl ProbePulse {
    pub fn gaussian(
        peak_amplitude: f64,
        center_time: f64,
        fwhm: f64,
        direction: ProbeDirection,
    ) -> Self {
        Self {
            peak_amplitude,
            center_time,
            fwhm,
            direction,
            shape: ProbeShape::Gaussian,
        }
    }

    pub fn validate(&self) -> Result<(), ProbeError> {
        if !(self.fwhm > 0.0) {
            return Err(ProbeError::BadFwhm(self.fwhm));
        }
        if !self.peak_amplitude.is_finite() || self.peak_amplitude < 0.0 {
            return Err(ProbeError::BadAmplitude(self.peak_amplitude));
        }
        Ok(())
    }

    pub fn envelope(&self, t: f64) -> f64 {
        let dt = t - self.center_time;
        self.peak_amplitude
            * (-4.0 * std::f64::consts::LN_2 * dt * dt / (self.fwhm * self.fwhm)).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn seg(t0: f64, t1: f64, op: f64, om: f64, ramp: Ramp) -> ControlSegment {
        ControlSegment {
            t_start: t0,
            t_end: t1,
            omega_plus: Complex64::new(op, 0.0),
            omega_minus: Complex64::new(om, 0.0),
            ramp,
        }
    }

    #[test]
    fn gaps_evaluate_to_zero() {
        let s = ControlSchedule::new(
            vec![
                seg(0.0, 2.0, 1.0, 0.0, Ramp::Step),
                seg(4.0, 6.0, 0.0, 2.0, Ramp::Step),
            ],
            0.0,
        )
        .unwrap();
        assert_eq!(s.eval(3.0), (Complex64::ZERO, Complex64::ZERO));
        assert_eq!(s.eval(1.0).0.re, 1.0);
        assert_eq!(s.eval(5.0).1.re, 2.0);
        assert_eq!(s.eval(10.0), (Complex64::ZERO, Complex64::ZERO));
    }

    #[test]
    fn overlap_rejected() {
        let r = ControlSchedule::new(
            vec![
                seg(0.0, 2.0, 1.0, 0.0, Ramp::Step),
                seg(1.5, 3.0, 1.0, 0.0, Ramp::Step),
            ],
            0.0,
        );
        assert!(matches!(r, Err(ScheduleError::Overlap { .. })));
    }

    #[test]
    fn unordered_rejected() {
        let r = ControlSchedule::new(vec![seg(2.0, 1.0, 1.0, 0.0, Ramp::Step)], 0.0);
        assert!(matches!(r, Err(ScheduleError::Unordered { index: 0 })));
    }

    #[test]
    fn smooth_ramp_is_continuous_and_settles() {
        let s = ControlSchedule::new(vec![seg(1.0, 5.0, 2.0, 0.0, Ramp::Smooth)], 0.0).unwrap();
        assert_eq!(s.eval(0.999).0.re, 0.0);
        assert!(s.eval(1.0).0.re.abs() < 1e-12);
        let mid = s.eval(1.0 + 0.5 * s.ramp_time).0.re;
        assert_relative_eq!(mid, 1.0, max_relative = 1e-12);
        assert_eq!(s.eval(1.0 + s.ramp_time).0.re, 2.0);
        assert_eq!(s.eval(3.0).0.re, 2.0);
    }

    #[test]
    fn ramp_out_into_gap() {
        let s = ControlSchedule::new(vec![seg(0.0, 4.0, 2.0, 0.0, Ramp::Linear)], 0.0).unwrap();
        let half = s.eval(4.0 + 0.5 * s.ramp_time).0.re;
        assert_relative_eq!(half, 1.0, max_relative = 1e-12);
        assert_eq!(s.eval(4.0 + 2.0 * s.ramp_time).0.re, 0.0);
    }

    #[test]
    fn contiguous_segments_switch_directly() {
        let s = ControlSchedule::new(
            vec![
                seg(0.0, 2.0, 1.0, 0.0, Ramp::Step),
                seg(2.0, 4.0, 0.0, 3.0, Ramp::Step),
            ],
            0.0,
        )
        .unwrap();
        assert_eq!(s.eval(2.0).1.re, 3.0);
        assert_eq!(s.switch_times(), vec![0.0, 2.0, 4.0]);
    }

    #[test]
    fn probe_envelope_fwhm() {
        let p = ProbePulse::gaussian(2.0, 5.0, 2.0, ProbeDirection::Forward);
        assert_eq!(p.envelope(5.0), 2.0);
        assert_relative_eq!(p.envelope(4.0), 1.0, max_relative = 1e-12);
        assert_relative_eq!(p.envelope(6.0), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn probe_validation() {
        assert!(ProbePulse::gaussian(1.0, 0.0, 0.0, ProbeDirection::Forward)
            .validate()
            .is_err());
        assert!(
            ProbePulse::gaussian(-1.0, 0.0, 1.0, ProbeDirection::Forward)
                .validate()
                .is_err()
        );
    }
}
