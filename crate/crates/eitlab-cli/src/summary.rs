//! Analysis summary: per-window velocity and decay fits, the width series,
//! and solver diagnostics, serialized as TOML.

use serde::{Deserialize, Serialize};

use eitlab::analysis::{centroid_track, decay_fit, fwhm_series, group_velocity_fit};
use eitlab::control::ControlSchedule;
use eitlab::mb::ExcitationBalance;
use eitlab::record::SpinwaveRecord;
use eitlab::scenarios::Scenario;

/// Decay fits exclude this long after every control switch.
pub const SWITCH_EXCLUSION_US: f64 = 1.0;
/// Velocity fits start once the ramp has settled and stop short of the
/// window end.
pub const VELOCITY_SETTLE_US: f64 = 0.4;
pub const VELOCITY_TAIL_US: f64 = 0.2;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitEntry {
    pub value: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WindowSummary {
    pub t_start_us: f64,
    pub t_end_us: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub velocity_xi_per_us: Option<FitEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analytic_velocity_xi_per_us: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decay_tau_us: Option<FitEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FwhmEntry {
    pub t_us: f64,
    pub fwhm_xi: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct Diagnostics {
    pub warnings: Vec<String>,
    pub flux_in: f64,
    pub flux_out: f64,
    pub p_loss: f64,
    pub decay_loss: f64,
    pub spin_norm_initial: f64,
    pub spin_norm_final: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SummaryDoc {
    pub scenario: String,
    pub description: String,
    pub n_xi: usize,
    pub dt_us: f64,
    pub t_max_us: f64,
    pub normalization: f64,
    pub zero_signal: bool,
    #[serde(default)]
    pub windows: Vec<WindowSummary>,
    #[serde(default)]
    pub fwhm_series: Vec<FwhmEntry>,
    #[serde(default)]
    pub diagnostics: Diagnostics,
}

impl SummaryDoc {
    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("summary serializes")
    }
}

/// Constant-control windows of the schedule inside [0, t_max].
pub fn analysis_windows(schedule: &ControlSchedule, t_max: f64) -> Vec<(f64, f64)> {
    let mut switches = schedule.switch_times();
    switches.retain(|&t| t > 0.0 && t < t_max);
    switches.insert(0, 0.0);
    switches.push(t_max);
    let mut windows = Vec::new();
    for w in switches.windows(2) {
        if w[1] - w[0] >= 1.0 {
            windows.push((w[0], w[1]));
        }
    }
    windows
}

/// Fit each analysis window of a record and assemble the summary document.
pub fn summarize(
    scenario: &Scenario,
    record: &SpinwaveRecord,
    diagnostics: Diagnostics,
) -> SummaryDoc {
    let mut max_total = 0.0f64;
    for i in 0..record.n_frames() {
        max_total = max_total.max(record.frame(i).sum());
    }
    let track = centroid_track(record, 0.05 * max_total);
    let widths = fwhm_series(record);

    let mut windows = Vec::new();
    for (t0, t1) in analysis_windows(&scenario.schedule, scenario.grid.t_max) {
        let mut entry = WindowSummary {
            t_start_us: t0,
            t_end_us: t1,
            velocity_xi_per_us: None,
            analytic_velocity_xi_per_us: None,
            decay_tau_us: None,
            note: None,
        };
        let coeffs = eitlab::advection::coefficients_from_schedule(
            &scenario.schedule,
            &scenario.params,
            0.5 * (t0 + t1),
        );
        entry.analytic_velocity_xi_per_us = Some(coeffs.velocity);
        let settle = VELOCITY_SETTLE_US.max(2.0 * scenario.schedule.ramp_time);
        match group_velocity_fit(&track, (t0 + settle, t1 - VELOCITY_TAIL_US)) {
            Ok(fit) => {
                let p = fit.param("slope").unwrap();
                entry.velocity_xi_per_us = Some(FitEntry {
                    value: p.value,
                    sigma: p.sigma,
                });
            }
            Err(e) => entry.note = Some(e.to_string()),
        }
        // Amplitude decay from the Gaussian fits inside the window, with
        // the post-switch transient excluded.
        let mut t = Vec::new();
        let mut a = Vec::new();
        for i in 0..widths.times.len() {
            if widths.times[i] >= t0 + SWITCH_EXCLUSION_US
                && widths.times[i] <= t1
                && widths.amplitude[i] > 0.0
            {
                t.push(widths.times[i]);
                a.push(widths.amplitude[i]);
            }
        }
        if t.len() >= 3 {
            if let Ok(fit) = decay_fit(&t, &a) {
                let p = fit.param("tau").unwrap();
                if p.value.is_finite() {
                    entry.decay_tau_us = Some(FitEntry {
                        value: p.value,
                        sigma: p.sigma,
                    });
                }
            }
        }
        windows.push(entry);
    }

    let fwhm_entries = widths
        .times
        .iter()
        .zip(widths.fwhm.iter().zip(&widths.sigma))
        .map(|(&t, (&w, &s))| FwhmEntry {
            t_us: t,
            fwhm_xi: w,
            sigma: s,
        })
        .collect();

    SummaryDoc {
        scenario: scenario.name.clone(),
        description: scenario.description.clone(),
        n_xi: scenario.grid.n_xi,
        dt_us: scenario.grid.dt,
        t_max_us: scenario.grid.t_max,
        normalization: record.normalization,
        zero_signal: record.zero_signal,
        windows,
        fwhm_series: fwhm_entries,
        diagnostics,
    }
}

pub fn diagnostics_from(
    balance: &ExcitationBalance,
    warnings: &[String],
    norm0: f64,
    norm1: f64,
) -> Diagnostics {
    Diagnostics {
        warnings: warnings.to_vec(),
        flux_in: balance.flux_in,
        flux_out: balance.flux_out,
        p_loss: balance.p_loss,
        decay_loss: balance.decay_loss,
        spin_norm_initial: norm0,
        spin_norm_final: norm1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use eitlab::scenarios;

    #[test]
    fn windows_follow_the_switches() {
        let s = scenarios::forward_slow_light_storage();
        let windows = analysis_windows(&s.schedule, s.grid.t_max);
        // Segments [0,9], gap [9,19], [19,32]: three constant-control
        // windows.
        assert_eq!(windows, vec![(0.0, 9.0), (9.0, 19.0), (19.0, 32.0)]);
    }
}
