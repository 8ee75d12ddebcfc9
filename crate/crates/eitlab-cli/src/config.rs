//! Run configuration: scenario selection, typed overrides, emit flags, and
//! sweep grids. Keys carry their units explicitly.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use eitlab::control::ProbeDirection;
use eitlab::mb::{BichromaticMode, SpinIntegrator};
use eitlab::scenarios::{self, Scenario};

use crate::error::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScenarioRef {
    /// A named preset.
    Name(String),
    /// A full inline scenario table.
    Inline(Box<Scenario>),
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ScenarioArgs {
    /// |Ω+|/|Ω−| for the parameterized presets.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct EmitFlags {
    pub record_matrix: bool,
    pub detectors: bool,
    pub analysis_summary: bool,
    pub plot_data: bool,
    /// Also evolve the reduced advection model from the handoff time and
    /// write its record for comparison.
    pub advection_record: bool,
}

impl Default for EmitFlags {
    fn default() -> Self {
        Self {
            record_matrix: true,
            detectors: true,
            analysis_summary: true,
            plot_data: false,
            advection_record: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSpec {
    /// Override key to sweep (any valid override path, e.g. "args.ratio").
    pub key: String,
    pub values: Vec<toml::Value>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub scenario: ScenarioRef,
    #[serde(default)]
    pub scenario_args: ScenarioArgs,
    #[serde(default)]
    pub out_dir: Option<String>,
    #[serde(default)]
    pub emit: EmitFlags,
    /// Key/value overrides applied after the scenario is built.
    #[serde(default)]
    pub overrides: BTreeMap<String, toml::Value>,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    /// Handoff time for the optional advection record \[µs\]; defaults to
    /// the end of the first control segment.
    #[serde(default)]
    pub advection_handoff_us: Option<f64>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("config parse error: {e}")))
    }

    /// Build the scenario, apply config overrides, then CLI overrides.
    pub fn build_scenario(
        &self,
        cli_overrides: &[(String, toml::Value)],
    ) -> Result<Scenario, CliError> {
        let mut ratio = self.scenario_args.ratio;
        // args.* overrides act on the preset arguments before the build.
        for (key, value) in self
            .overrides
            .iter()
            .map(|(k, v)| (k.as_str(), v))
            .chain(cli_overrides.iter().map(|(k, v)| (k.as_str(), v)))
        {
            if key == "args.ratio" {
                ratio = Some(value_as_f64(key, value)?);
            }
        }
        let mut scenario = match &self.scenario {
            ScenarioRef::Name(name) => scenarios::preset(name, ratio)
                .map_err(|e| CliError::Config(format!("scenario: {e}")))?,
            ScenarioRef::Inline(s) => {
                if ratio.is_some() {
                    return Err(CliError::Config(
                        "args.ratio cannot be applied to an inline scenario".into(),
                    ));
                }
                (**s).clone()
            }
        };
        for (key, value) in &self.overrides {
            apply_override(&mut scenario, key, value)?;
        }
        for (key, value) in cli_overrides {
            apply_override(&mut scenario, key, value)?;
        }
        scenario
            .validate()
            .map_err(|e| CliError::Config(format!("invalid scenario after overrides: {e}")))?;
        Ok(scenario)
    }
}

pub fn parse_cli_override(spec: &str) -> Result<(String, toml::Value), CliError> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override '{spec}' is not KEY=VALUE")))?;
    // Try the TOML scalar grammar first, falling back to a bare string.
    let value = raw
        .parse::<f64>()
        .map(toml::Value::from)
        .ok()
        .or_else(|| raw.parse::<bool>().map(toml::Value::from).ok())
        .unwrap_or_else(|| toml::Value::from(raw.to_string()));
    Ok((key.trim().to_string(), value))
}

fn value_as_f64(key: &str, value: &toml::Value) -> Result<f64, CliError> {
    match value {
        toml::Value::Float(f) => Ok(*f),
        toml::Value::Integer(i) => Ok(*i as f64),
        toml::Value::String(s) if s == "inf" => Ok(f64::INFINITY),
        _ => Err(CliError::Config(format!(
            "field '{key}' expects a number, got {value}"
        ))),
    }
}

fn value_as_usize(key: &str, value: &toml::Value) -> Result<usize, CliError> {
    match value {
        toml::Value::Integer(i) if *i >= 0 => Ok(*i as usize),
        _ => Err(CliError::Config(format!(
            "field '{key}' expects a non-negative integer, got {value}"
        ))),
    }
}

fn value_as_bool(key: &str, value: &toml::Value) -> Result<bool, CliError> {
    match value {
        toml::Value::Boolean(b) => Ok(*b),
        _ => Err(CliError::Config(format!(
            "field '{key}' expects a boolean, got {value}"
        ))),
    }
}

fn value_as_str<'v>(key: &str, value: &'v toml::Value) -> Result<&'v str, CliError> {
    match value {
        toml::Value::String(s) => Ok(s.as_str()),
        _ => Err(CliError::Config(format!(
            "field '{key}' expects a string, got {value}"
        ))),
    }
}

/// Apply one typed override; unknown keys and type mismatches are config
/// errors naming the field.
pub fn apply_override(
    scenario: &mut Scenario,
    key: &str,
    value: &toml::Value,
) -> Result<(), CliError> {
    match key {
        "args.ratio" => {} // consumed during the preset build
        "params.gamma_e_rad_per_us" => scenario.params.gamma_e = value_as_f64(key, value)?,
        "params.gamma_s_rad_per_us" => scenario.params.gamma_s = value_as_f64(key, value)?,
        "params.gamma_sw_rad_per_us" => scenario.params.gamma_sw = value_as_f64(key, value)?,
        "params.od" => scenario.params.od = value_as_f64(key, value)?,
        "params.length_m" => scenario.params.length = value_as_f64(key, value)?,
        "params.wavelength_m" => scenario.params.wavelength = value_as_f64(key, value)?,
        "params.temperature_k" => scenario.params.temperature = value_as_f64(key, value)?,
        "params.atom_mass_kg" => scenario.params.atom_mass = value_as_f64(key, value)?,
        "grid.n_xi" => scenario.grid.n_xi = value_as_usize(key, value)?,
        "grid.dt_us" => scenario.grid.dt = value_as_f64(key, value)?,
        "grid.t_max_us" => scenario.grid.t_max = value_as_f64(key, value)?,
        "grid.strobe_interval_us" => scenario.grid.strobe_interval = value_as_f64(key, value)?,
        "probe.peak_amplitude" => scenario.probe.peak_amplitude = value_as_f64(key, value)?,
        "probe.center_time_us" => scenario.probe.center_time = value_as_f64(key, value)?,
        "probe.fwhm_us" => scenario.probe.fwhm = value_as_f64(key, value)?,
        "probe.direction" => {
            scenario.probe.direction = match value_as_str(key, value)? {
                "forward" => ProbeDirection::Forward,
                "backward" => ProbeDirection::Backward,
                other => {
                    return Err(CliError::Config(format!(
                        "field '{key}': unknown direction '{other}'"
                    )))
                }
            }
        }
        "options.include_standing_wave" => {
            scenario.options.include_standing_wave = value_as_bool(key, value)?
        }
        "options.bichromatic_mode" => {
            scenario.options.bichromatic_mode = match value_as_str(key, value)? {
                "off" => BichromaticMode::Off,
                "explicit_phase" => BichromaticMode::ExplicitPhase,
                "effective_decay" => BichromaticMode::EffectiveDecay,
                other => {
                    return Err(CliError::Config(format!(
                        "field '{key}': unknown mode '{other}'"
                    )))
                }
            }
        }
        "options.spin_integrator" => {
            scenario.options.spin_integrator = match value_as_str(key, value)? {
                "rk4" => SpinIntegrator::Rk4,
                "semi_implicit" => SpinIntegrator::SemiImplicit,
                other => {
                    return Err(CliError::Config(format!(
                        "field '{key}': unknown integrator '{other}'"
                    )))
                }
            }
        }
        "options.picard_iterations" => {
            scenario.options.picard_iterations = value_as_usize(key, value)? as u32
        }
        "schedule.detuning_rad_per_us" => scenario.schedule.detuning = value_as_f64(key, value)?,
        "schedule.ramp_time_us" => scenario.schedule.ramp_time = value_as_f64(key, value)?,
        other => {
            return Err(CliError::Config(format!(
                "unknown override field '{other}'"
            )));
        }
    }
    Ok(())
}
