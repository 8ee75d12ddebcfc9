//! A 1-D numerical laboratory for EIT polaritons driven by counter-propagating
//! control fields.
//!
//! The crate provides:
//!
//! * [`mb`] — time-domain integration of the compact counter-propagating
//!   Maxwell–Bloch system for the probe envelopes `E±`, excited-state
//!   coherences `P±`, the spinwave `S0`, and the standing-wave coherences
//!   `S±`, producing stroboscopic space–time records of `|S|` together with
//!   boundary detector traces.
//! * [`advection`] — the reduced advection–diffusion model for the spinwave,
//!   used as a semi-analytic oracle for the full solver.
//! * [`scenarios`] — named presets (slow light, storage, backward retrieval,
//!   quasi-stationary and stationary light, bichromatic pairs, reflection,
//!   group-velocity sweeps) that assemble parameters, control schedules,
//!   probe pulses and grids for each experiment class.
//! * [`analysis`] — absorption-image optical depth maps, equal-atom binning,
//!   centroid tracking, and Gaussian / exponential-decay / linear
//!   least-squares fits that turn records into derived quantities.
//!
//! Internal unit conventions: time in µs, rates and Rabi frequencies in
//! rad/µs, the spatial coordinate ξ dimensionless on `[0, 1]`, field
//! envelopes dimensionless.

pub mod advection;
pub mod analysis;
pub mod consts;
pub mod control;
pub mod coords;
pub mod grid;
pub mod mb;
pub mod mixing;
pub mod params;
pub mod record;
pub mod scenarios;
pub mod state;

pub use control::{ControlSchedule, ControlSegment, ProbeDirection, ProbePulse, Ramp};
pub use grid::Grid;
pub use mixing::MixingAngles;
pub use params::PhysicalParams;
pub use record::SpinwaveRecord;
pub use scenarios::Scenario;
pub use state::FieldState;
