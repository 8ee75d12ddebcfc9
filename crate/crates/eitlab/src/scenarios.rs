//! Named presets assembling parameters, control schedules, probe pulses and
//! grids for each experiment class: slow light with storage and forward or
//! backward retrieval, quasi-stationary and stationary light, bichromatic
//! pairs, reflection, and group-velocity sweeps.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::consts::angular_mhz;
use crate::control::{ControlSchedule, ControlSegment, ProbeDirection, ProbePulse, Ramp};
use crate::grid::Grid;
use crate::mb::{BichromaticMode, SolverOptions};
use crate::params::PhysicalParams;

/// A complete, deterministic run setup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub description: String,
    pub params: PhysicalParams,
    pub schedule: ControlSchedule,
    pub probe: ProbePulse,
    pub grid: Grid,
    pub options: SolverOptions,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("unknown scenario '{0}'")]
    Unknown(String),
    #[error("scenario '{0}' requires a ratio argument")]
    MissingRatio(String),
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

impl Scenario {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        self.params
            .validate()
            .map_err(|e| ScenarioError::Invalid(e.to_string()))?;
        self.schedule
            .validate()
            .map_err(|e| ScenarioError::Invalid(e.to_string()))?;
        self.probe
            .validate()
            .map_err(|e| ScenarioError::Invalid(e.to_string()))?;
        self.grid
            .validate()
            .map_err(|e| ScenarioError::Invalid(e.to_string()))?;
        // The schedule must cover the whole run; a trailing control-free
        // interval is expressed as an explicit zero-amplitude segment.
        let (_, end) = self.schedule.span();
        if end + 1e-9 < self.grid.t_max {
            return Err(ScenarioError::Invalid(format!(
                "schedule ends at {end} µs but the run lasts t_max = {} µs",
                self.grid.t_max
            )));
        }
        Ok(())
    }
}

/// Write-in mixing angle tan²θ shared by the slow-light presets. At
/// Γ = 2π×5.75 rad/µs this gives a traversal time of ~14 µs, so a 2 µs
/// probe compresses to roughly a seventh of the ensemble.
pub const WRITE_TAN2_THETA: f64 = 0.002;

/// Measurement-phase tan²θ of the velocity sweep.
pub const SWEEP_TAN2_THETA: f64 = 0.01;

/// Rabi magnitude that realizes a given tan²θ with a single control.
pub fn rabi_for_tan2_theta(tan2_theta: f64, params: &PhysicalParams) -> f64 {
    params.gamma_e * (params.od * tan2_theta).sqrt()
}

fn seg(t0: f64, t1: f64, omega_plus: f64, omega_minus: f64) -> ControlSegment {
    ControlSegment {
        t_start: t0,
        t_end: t1,
        omega_plus: Complex64::new(omega_plus, 0.0),
        omega_minus: Complex64::new(omega_minus, 0.0),
        ramp: Ramp::Smooth,
    }
}

fn schedule(segments: Vec<ControlSegment>) -> ControlSchedule {
    ControlSchedule {
        segments,
        detuning: 0.0,
        ramp_time: 0.2,
    }
}

fn write_probe() -> ProbePulse {
    ProbePulse::gaussian(1.0, 3.5, 2.0, ProbeDirection::Forward)
}

/// Forward slow light, a 10 µs storage window, then forward retrieval.
pub fn forward_slow_light_storage() -> Scenario {
    let params = PhysicalParams::rb87_defaults();
    let omega = rabi_for_tan2_theta(WRITE_TAN2_THETA, &params);
    Scenario {
        name: "forward_slow_light_storage".into(),
        description: "slow light, storage, and forward retrieval on the forward detector".into(),
        params,
        schedule: schedule(vec![seg(0.0, 9.0, omega, 0.0), seg(19.0, 32.0, omega, 0.0)]),
        probe: write_probe(),
        grid: Grid {
            n_xi: 400,
            dt: 0.01,
            t_max: 32.0,
            strobe_interval: 1.0,
        },
        options: SolverOptions::default(),
    }
}

/// Forward write-in, storage, then readout with the backward control only;
/// the pulse leaves through the backward detector.
pub fn backward_retrieval() -> Scenario {
    let params = PhysicalParams::rb87_defaults();
    let omega = rabi_for_tan2_theta(WRITE_TAN2_THETA, &params);
    Scenario {
        name: "backward_retrieval".into(),
        description: "storage followed by backward retrieval with the counter-propagating control"
            .into(),
        params,
        schedule: schedule(vec![seg(0.0, 9.0, omega, 0.0), seg(19.0, 28.0, 0.0, omega)]),
        probe: write_probe(),
        grid: Grid {
            n_xi: 400,
            dt: 0.01,
            t_max: 28.0,
            strobe_interval: 1.0,
        },
        options: SolverOptions::default(),
    }
}

/// Both controls on after write-in with amplitude ratio |Ω+|/|Ω−| at the
/// write-in total power, slowing or reversing the propagation.
pub fn quasi_stationary(ratio: f64) -> Scenario {
    let params = PhysicalParams::rb87_defaults();
    let omega = rabi_for_tan2_theta(WRITE_TAN2_THETA, &params);
    let (op, om) = split_by_ratio(omega, ratio);
    Scenario {
        name: "quasi_stationary".into(),
        description: format!(
            "imbalanced counter-propagating controls (|omega+|/|omega-| = {ratio}) after write-in"
        ),
        params,
        schedule: schedule(vec![seg(0.0, 9.0, omega, 0.0), seg(9.0, 22.0, op, om)]),
        probe: write_probe(),
        grid: Grid {
            n_xi: 400,
            dt: 0.01,
            t_max: 22.0,
            strobe_interval: 1.0,
        },
        options: SolverOptions::default(),
    }
}

/// Stationary light formed directly from slow light: the backward control
/// turns on at the write-in amplitude while the forward control stays on.
pub fn stationary_from_slow() -> Scenario {
    let params = PhysicalParams::rb87_defaults();
    let omega = rabi_for_tan2_theta(WRITE_TAN2_THETA, &params);
    Scenario {
        name: "stationary_from_slow".into(),
        description: "stationary light formed from slow light by adding the backward control"
            .into(),
        params,
        schedule: schedule(vec![
            seg(0.0, 9.5, omega, 0.0),
            seg(9.5, 22.0, omega, omega),
        ]),
        probe: write_probe(),
        grid: Grid {
            n_xi: 400,
            dt: 0.01,
            t_max: 22.0,
            strobe_interval: 1.0,
        },
        options: SolverOptions::default(),
    }
}

/// Stationary light formed from stopped light: store, then drive both
/// controls at half the write-in intensity (amplitude/√2 each), so the
/// total power — and hence the diffusion — is half that of
/// [`stationary_from_slow`].
pub fn stationary_from_stopped() -> Scenario {
    let params = PhysicalParams::rb87_defaults();
    let omega = rabi_for_tan2_theta(WRITE_TAN2_THETA, &params);
    let half = omega / std::f64::consts::SQRT_2;
    Scenario {
        name: "stationary_from_stopped".into(),
        description: "storage followed by stationary light at half-intensity controls".into(),
        params,
        schedule: schedule(vec![seg(0.0, 9.5, omega, 0.0), seg(11.5, 24.0, half, half)]),
        probe: write_probe(),
        grid: Grid {
            n_xi: 400,
            dt: 0.01,
            t_max: 24.0,
            strobe_interval: 1.0,
        },
        options: SolverOptions::default(),
    }
}

/// Base configuration for the monochromatic/bichromatic comparison:
/// stationary light from stopped light with both holds at half the write
/// amplitude. At this hold power the standing-wave channel is strong in the
/// cold limit yet washed out by the thermal γ̃, which is the regime the
/// comparison probes.
pub fn bichromatic_base() -> Scenario {
    let params = PhysicalParams::rb87_defaults();
    let omega = rabi_for_tan2_theta(WRITE_TAN2_THETA, &params);
    let half = 0.5 * omega;
    Scenario {
        name: "stationary_bichromatic_base".into(),
        description: "storage followed by stationary light at half-amplitude controls, for single- vs two-color comparison".into(),
        params,
        schedule: schedule(vec![seg(0.0, 9.5, omega, 0.0), seg(11.5, 22.0, half, half)]),
        probe: write_probe(),
        grid: Grid { n_xi: 400, dt: 0.01, t_max: 22.0, strobe_interval: 1.0 },
        options: SolverOptions::default(),
    }
}

/// Hold window of [`bichromatic_base`], for width-growth analysis.
pub const BICHROMATIC_HOLD_WINDOW: (f64, f64) = (12.0, 22.0);

/// Clone a base scenario into a (monochromatic, detuned) pair: the detuned
/// clone drives the controls at symmetric ±4 MHz with the explicit relative
/// phase, the monochromatic clone ignores the detuning.
pub fn bichromatic_pair(base: &Scenario) -> (Scenario, Scenario) {
    let mut mono = base.clone();
    mono.name = format!("{}_mono", base.name);
    mono.options.bichromatic_mode = BichromaticMode::Off;
    let mut detuned = base.clone();
    detuned.name = format!("{}_detuned", base.name);
    detuned.schedule.detuning = angular_mhz(4.0);
    detuned.options.bichromatic_mode = BichromaticMode::ExplicitPhase;
    (mono, detuned)
}

/// Both controls on before and during probe arrival, reflecting part of the
/// pulse into the backward detector.
pub fn reflection(ratio: f64) -> Scenario {
    let params = PhysicalParams::rb87_defaults();
    let total = rabi_for_tan2_theta(0.004, &params);
    let (op, om) = split_by_ratio(total, ratio);
    Scenario {
        name: "reflection".into(),
        description: format!(
            "controls on at probe arrival (|omega+|/|omega-| = {ratio}); reflection off the ensemble"
        ),
        params,
        schedule: schedule(vec![seg(0.0, 18.0, op, om)]),
        probe: ProbePulse::gaussian(1.0, 3.0, 1.5, ProbeDirection::Forward),
        grid: Grid { n_xi: 400, dt: 0.005, t_max: 18.0, strobe_interval: 0.5 },
        options: SolverOptions::default(),
    }
}

/// One point of the group-velocity sweep: forward write-in at
/// [`WRITE_TAN2_THETA`], then a measurement phase at fixed total power
/// ([`SWEEP_TAN2_THETA`]) with the given |Ω+|/|Ω−| ratio.
pub fn velocity_sweep_point(ratio: f64) -> Scenario {
    let params = PhysicalParams::rb87_defaults();
    let omega_write = rabi_for_tan2_theta(WRITE_TAN2_THETA, &params);
    let omega_total = rabi_for_tan2_theta(SWEEP_TAN2_THETA, &params);
    let (op, om) = split_by_ratio(omega_total, ratio);
    let t_switch = SWEEP_SWITCH_TIME;
    let t_max = 11.4;
    Scenario {
        name: "velocity_sweep_point".into(),
        description: format!(
            "velocity measurement at fixed total power, |omega+|/|omega-| = {ratio}"
        ),
        params,
        schedule: schedule(vec![
            seg(0.0, t_switch, omega_write, 0.0),
            seg(t_switch, t_max, op, om),
        ]),
        probe: write_probe(),
        grid: Grid {
            n_xi: 400,
            dt: 0.0025,
            t_max,
            strobe_interval: 0.05,
        },
        options: SolverOptions::default(),
    }
}

/// The write-to-measure switch time of the sweep preset.
pub const SWEEP_SWITCH_TIME: f64 = 10.4;
/// Centroid-fit window of the sweep preset: after the ramp settles, before
/// the fastest pulses reach a boundary.
pub const SWEEP_FIT_WINDOW: (f64, f64) = (10.6, 11.2);

/// Scenarios for a list of control ratios at fixed total power.
pub fn group_velocity_sweep(ratios: &[f64]) -> Vec<Scenario> {
    ratios.iter().map(|&r| velocity_sweep_point(r)).collect()
}

/// Split a total Rabi magnitude into (Ω+, Ω−) with |Ω+|/|Ω−| = ratio and
/// |Ω+|² + |Ω−|² = total². `ratio = 0` is backward-only and an infinite
/// ratio is forward-only.
pub fn split_by_ratio(total: f64, ratio: f64) -> (f64, f64) {
    assert!(ratio >= 0.0, "ratio must be non-negative");
    if ratio.is_infinite() {
        return (total, 0.0);
    }
    let om = total / (1.0 + ratio * ratio).sqrt();
    (ratio * om, om)
}

/// Names and descriptions of the named presets.
pub fn preset_catalog() -> Vec<(&'static str, bool, &'static str)> {
    vec![
        (
            "forward_slow_light_storage",
            false,
            "slow light, storage, forward retrieval",
        ),
        (
            "backward_retrieval",
            false,
            "storage then backward retrieval",
        ),
        (
            "quasi_stationary",
            true,
            "imbalanced controls after write-in (takes ratio)",
        ),
        (
            "stationary_from_slow",
            false,
            "stationary light formed from slow light",
        ),
        (
            "stationary_from_stopped",
            false,
            "stationary light formed from stopped light",
        ),
        (
            "stationary_bichromatic",
            false,
            "half-amplitude stationary light with symmetrically detuned controls",
        ),
        (
            "stationary_monochromatic",
            false,
            "single-color partner of stationary_bichromatic",
        ),
        (
            "reflection",
            true,
            "controls on at probe arrival (takes ratio)",
        ),
        (
            "velocity_sweep_point",
            true,
            "one group-velocity sweep point (takes ratio)",
        ),
    ]
}

/// Build a preset by name. `ratio` is required for the parameterized
/// presets and ignored by the rest.
pub fn preset(name: &str, ratio: Option<f64>) -> Result<Scenario, ScenarioError> {
    let need_ratio = || ratio.ok_or_else(|| ScenarioError::MissingRatio(name.to_string()));
    let scenario = match name {
        "forward_slow_light_storage" => forward_slow_light_storage(),
        "backward_retrieval" => backward_retrieval(),
        "quasi_stationary" => quasi_stationary(need_ratio()?),
        "stationary_from_slow" => stationary_from_slow(),
        "stationary_from_stopped" => stationary_from_stopped(),
        "stationary_bichromatic" => bichromatic_pair(&bichromatic_base()).1,
        "stationary_monochromatic" => bichromatic_pair(&bichromatic_base()).0,
        "reflection" => reflection(need_ratio()?),
        "velocity_sweep_point" => velocity_sweep_point(need_ratio()?),
        _ => return Err(ScenarioError::Unknown(name.to_string())),
    };
    Ok(scenario)
}
