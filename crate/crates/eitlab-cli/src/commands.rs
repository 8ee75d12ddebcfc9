//! Subcommand implementations: run, sweep, compare, analyze,
//! list-scenarios.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use eitlab::advection::run_reduced;
use eitlab::analysis::{
    equal_atom_binning, gaussian_profile_fit, optical_depth_image, IntensityImage,
};
use eitlab::mb::{self, MbOutput};
use eitlab::record;
use eitlab::scenarios::{self, Scenario};

use crate::config::{parse_cli_override, RunConfig, SweepSpec};
use crate::error::CliError;
use crate::matio;
use crate::summary;

pub struct CommonArgs {
    pub out: Option<PathBuf>,
    pub overrides: Vec<String>,
    pub binary: bool,
}

fn out_root() -> PathBuf {
    std::env::var_os("EITLAB_OUT_ROOT")
        .map(PathBuf::from)
        .unwrap_or_else(|| "out".into())
}

fn resolve_out_dir(config: &RunConfig, cli_out: &Option<PathBuf>, name: &str) -> PathBuf {
    cli_out
        .clone()
        .or_else(|| config.out_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| out_root().join(name))
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(&dir.display().to_string(), e))
}

fn read_config(path: &Path) -> Result<RunConfig, CliError> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::io(&path.display().to_string(), e))?;
    RunConfig::parse(&text)
}

fn cli_overrides(args: &CommonArgs) -> Result<Vec<(String, toml::Value)>, CliError> {
    args.overrides
        .iter()
        .map(|s| parse_cli_override(s))
        .collect()
}

fn execute(scenario: &Scenario) -> Result<MbOutput, CliError> {
    Ok(mb::run(
        &scenario.params,
        &scenario.schedule,
        &scenario.probe,
        &scenario.grid,
        &scenario.options,
    )?)
}

/// Run one scenario and write its outputs. Returns the summary document.
fn run_and_emit(
    scenario: &Scenario,
    config: &RunConfig,
    dir: &Path,
    binary: bool,
) -> Result<summary::SummaryDoc, CliError> {
    ensure_dir(dir)?;
    let out = execute(scenario)?;
    for w in &out.warnings {
        eprintln!("warning: {w}");
    }
    if config.emit.record_matrix {
        if binary {
            matio::write_record_binary(&dir.join("record.bin"), &out.record)?;
        } else {
            matio::write_record_csv(&dir.join("record.csv"), &out.record)?;
        }
    }
    if config.emit.detectors {
        matio::write_detectors_csv(&dir.join("detectors.csv"), &out.record)?;
    }
    if config.emit.advection_record {
        let handoff = config
            .advection_handoff_us
            .or_else(|| scenario.schedule.segments.first().map(|s| s.t_end))
            .unwrap_or(0.0);
        let grid_handoff = eitlab::grid::Grid {
            t_max: handoff,
            ..scenario.grid
        };
        let at_handoff = mb::run(
            &scenario.params,
            &scenario.schedule,
            &scenario.probe,
            &grid_handoff,
            &scenario.options,
        )?;
        let reduced = run_reduced(
            &scenario.params,
            &scenario.schedule,
            &at_handoff.final_state.s0,
            &scenario.grid,
            handoff,
        );
        if binary {
            matio::write_record_binary(&dir.join("record_advection.bin"), &reduced)?;
        } else {
            matio::write_record_csv(&dir.join("record_advection.csv"), &reduced)?;
        }
    }
    let diagnostics = summary::diagnostics_from(
        &out.balance,
        &out.warnings,
        out.spin_norm_initial,
        out.spin_norm_final,
    );
    let doc = summary::summarize(scenario, &out.record, diagnostics);
    if config.emit.analysis_summary {
        fs::write(dir.join("summary.toml"), doc.to_toml())
            .map_err(|e| CliError::io("summary.toml", e))?;
    }
    if config.emit.plot_data {
        fs::write(dir.join("plot.gp"), plot_script(scenario, binary))
            .map_err(|e| CliError::io("plot.gp", e))?;
    }
    Ok(doc)
}

fn plot_script(scenario: &Scenario, binary: bool) -> String {
    let record = if binary { "record.bin" } else { "record.csv" };
    format!(
        "# gnuplot script: spinwave space-time map and detector traces\n\
         set datafile separator ','\n\
         set term pngcairo size 1200,500\n\
         set output '{name}.png'\n\
         set multiplot layout 1,2\n\
         set title '|S| ({name})'\n\
         set xlabel 'xi'\n\
         set ylabel 't [us]'\n\
         plot '{record}' matrix nonuniform with image notitle\n\
         set title 'detectors'\n\
         set xlabel 't [us]'\n\
         set ylabel '|E|'\n\
         plot 'detectors.csv' using 1:4 with lines title 'forward', \\\n\
              'detectors.csv' using 1:7 with lines title 'backward'\n\
         unset multiplot\n",
        name = scenario.name,
        record = record,
    )
}

pub fn cmd_run(config_path: &Path, args: &CommonArgs) -> Result<(), CliError> {
    let config = read_config(config_path)?;
    if config.sweep.is_some() {
        return Err(CliError::Config(
            "config contains a [sweep] table; use the sweep subcommand".into(),
        ));
    }
    let overrides = cli_overrides(args)?;
    let scenario = config.build_scenario(&overrides)?;
    let dir = resolve_out_dir(&config, &args.out, &scenario.name);
    let doc = run_and_emit(&scenario, &config, &dir, args.binary)?;
    println!(
        "wrote {} (scenario {}, normalization {:.4e})",
        dir.display(),
        doc.scenario,
        doc.normalization
    );
    Ok(())
}

pub fn cmd_sweep(
    config_path: &Path,
    args: &CommonArgs,
    workers: Option<usize>,
) -> Result<(), CliError> {
    let config = read_config(config_path)?;
    let sweep: &SweepSpec = config
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("sweep config needs a [sweep] table".into()))?;
    if sweep.values.is_empty() {
        return Err(CliError::Config("sweep grid is empty".into()));
    }
    let base_overrides = cli_overrides(args)?;
    let dir = resolve_out_dir(&config, &args.out, "sweep");
    ensure_dir(&dir)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Config(format!("worker pool: {e}")))?;

    struct PointResult {
        index: usize,
        value: String,
        status: Result<(f64, f64, f64, f64), String>,
    }

    let results: Vec<PointResult> = pool.install(|| {
        sweep
            .values
            .par_iter()
            .enumerate()
            .map(|(index, value)| {
                let mut overrides = base_overrides.clone();
                overrides.push((sweep.key.clone(), value.clone()));
                let point_dir = dir.join(format!("point_{index:03}"));
                let status = (|| -> Result<(f64, f64, f64, f64), CliError> {
                    let scenario = config.build_scenario(&overrides)?;
                    let doc = run_and_emit(&scenario, &config, &point_dir, args.binary)?;
                    // The last window is the measurement phase.
                    let window = doc
                        .windows
                        .last()
                        .ok_or_else(|| CliError::Config("no analysis window".into()))?;
                    let fitted = window.velocity_xi_per_us.as_ref().ok_or_else(|| {
                        CliError::Config(
                            window
                                .note
                                .clone()
                                .unwrap_or_else(|| "no velocity fit".into()),
                        )
                    })?;
                    let analytic = window.analytic_velocity_xi_per_us.unwrap_or(0.0);
                    let fullscale = scenario.params.gamma_e
                        * eitlab::mixing::mixing_angles(
                            scenario
                                .schedule
                                .eval(0.5 * (window.t_start_us + window.t_end_us))
                                .0,
                            scenario
                                .schedule
                                .eval(0.5 * (window.t_start_us + window.t_end_us))
                                .1,
                            &scenario.params,
                        )
                        .tan2_theta;
                    let rel_err = (fitted.value - analytic).abs()
                        / analytic.abs().max(0.2 * fullscale.abs()).max(1e-300);
                    Ok((fitted.value, fitted.sigma, analytic, rel_err))
                })()
                .map_err(|e| e.to_string());
                PointResult {
                    index,
                    value: toml_value_to_string(value),
                    status,
                }
            })
            .collect()
    });

    let mut aggregate = String::from("index,value,status,v_fit,v_sigma,v_analytic,rel_err\n");
    let mut n_failed = 0;
    for r in &results {
        match &r.status {
            Ok((v, s, a, e)) => {
                aggregate.push_str(&format!("{},{},ok,{v},{s},{a},{e}\n", r.index, r.value));
            }
            Err(msg) => {
                n_failed += 1;
                let clean = msg.replace([',', '\n'], ";");
                aggregate.push_str(&format!("{},{},error:{clean},,,,\n", r.index, r.value));
            }
        }
    }
    fs::write(dir.join("aggregate.csv"), aggregate)
        .map_err(|e| CliError::io("aggregate.csv", e))?;
    println!(
        "sweep over {} points complete, {} failed; aggregate in {}",
        results.len(),
        n_failed,
        dir.join("aggregate.csv").display()
    );
    if n_failed > 0 {
        return Err(CliError::Config(format!(
            "{n_failed} sweep point(s) failed"
        )));
    }
    Ok(())
}

fn toml_value_to_string(v: &toml::Value) -> String {
    match v {
        toml::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

pub fn cmd_compare(a: &Path, b: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let rec_a = matio::read_record(a)?;
    let rec_b = matio::read_record(b)?;
    let diff = record::compare(&rec_a, &rec_b)
        .map_err(|e| CliError::Config(format!("incompatible records: {e}")))?;
    println!(
        "frames compared: {}\nrms: {:.6e}\nmax abs: {:.6e}",
        diff.frames_compared, diff.rms, diff.max_abs
    );
    if let Some(dir) = out {
        ensure_dir(dir)?;
        let mut csv = String::from("t_us,frame_rms\n");
        for (t, r) in &diff.per_frame {
            csv.push_str(&format!("{t},{r}\n"));
        }
        fs::write(dir.join("compare.csv"), csv).map_err(|e| CliError::io("compare.csv", e))?;
    }
    Ok(())
}

pub struct AnalyzeArgs {
    pub record: Option<PathBuf>,
    pub i_out: Option<PathBuf>,
    pub i_0: Option<PathBuf>,
    pub rows: Option<(usize, usize)>,
    pub bins: usize,
    pub m_per_px: f64,
    pub out: Option<PathBuf>,
}

pub fn cmd_analyze(args: &AnalyzeArgs) -> Result<(), CliError> {
    let dir = args
        .out
        .clone()
        .unwrap_or_else(|| out_root().join("analyze"));
    ensure_dir(&dir)?;
    match (&args.record, &args.i_out, &args.i_0) {
        (Some(record_path), None, None) => analyze_record(record_path, &dir),
        (None, Some(i_out), Some(i_0)) => analyze_images(i_out, i_0, args, &dir),
        _ => Err(CliError::Config(
            "analyze needs either --record or both --i-out and --i0".into(),
        )),
    }
}

fn analyze_record(path: &Path, dir: &Path) -> Result<(), CliError> {
    let record = matio::read_record(path)?;
    // Without the schedule, fit over the full span in one window.
    let track = eitlab::analysis::centroid_track(&record, 0.0);
    let t_span = (
        *record.times.first().unwrap_or(&0.0),
        *record.times.last().unwrap_or(&0.0),
    );
    let widths = eitlab::analysis::fwhm_series(&record);
    let mut out = String::new();
    out.push_str(&format!("record = \"{}\"\n", path.display()));
    out.push_str(&format!("frames = {}\n", record.n_frames()));
    match eitlab::analysis::group_velocity_fit(&track, t_span) {
        Ok(fit) => {
            let p = fit.param("slope").unwrap();
            out.push_str(&format!(
                "
[velocity]
slope_xi_per_us = {}
sigma = {}
",
                p.value, p.sigma
            ));
        }
        Err(e) => out.push_str(&format!("velocity_note = \"{e}\"\n")),
    }
    let amps: Vec<(f64, f64)> = widths
        .times
        .iter()
        .zip(&widths.amplitude)
        .filter(|(_, &a)| a > 0.0)
        .map(|(&t, &a)| (t, a))
        .collect();
    if amps.len() >= 3 {
        let (t, a): (Vec<f64>, Vec<f64>) = amps.into_iter().unzip();
        if let Ok(fit) = eitlab::analysis::decay_fit(&t, &a) {
            let p = fit.param("tau").unwrap();
            out.push_str(&format!(
                "\n[decay]\ntau_us = {}\nsigma = {}\n",
                p.value, p.sigma
            ));
        }
    }
    out.push_str("\n[[fwhm]]\n");
    let entries: Vec<String> = widths
        .times
        .iter()
        .zip(&widths.fwhm)
        .map(|(&t, &w)| format!("t_us = {t}\nfwhm_xi = {w}"))
        .collect();
    out.push_str(&entries.join("\n[[fwhm]]\n"));
    out.push('\n');
    fs::write(dir.join("analysis_summary.toml"), out)
        .map_err(|e| CliError::io("analysis_summary.toml", e))?;
    println!("wrote {}", dir.join("analysis_summary.toml").display());
    Ok(())
}

fn analyze_images(
    i_out_path: &Path,
    i_0_path: &Path,
    args: &AnalyzeArgs,
    dir: &Path,
) -> Result<(), CliError> {
    let i_out = IntensityImage::new(matio::read_image(i_out_path)?, args.m_per_px)
        .map_err(|e| CliError::Config(format!("{}: {e}", i_out_path.display())))?;
    let i_0 = IntensityImage::new(matio::read_image(i_0_path)?, args.m_per_px)
        .map_err(|e| CliError::Config(format!("{}: {e}", i_0_path.display())))?;
    let od = optical_depth_image(&i_out, &i_0)
        .map_err(|e| CliError::Config(format!("optical depth: {e}")))?;
    let profile = od.column_profile(args.rows);
    let n_bins = args.bins.min(profile.len());
    let binning = equal_atom_binning(&profile, n_bins)
        .map_err(|e| CliError::Config(format!("binning: {e}")))?;
    let binned = binning.apply_profile(&profile);

    // ξ centers of the bins from the cumulative profile.
    let total: f64 = profile.iter().sum();
    let mut cumulative = 0.0;
    let mut xi_edges = vec![0.0];
    let mut edge_iter = binning.edges.iter().skip(1).peekable();
    for (k, &p) in profile.iter().enumerate() {
        cumulative += p;
        while let Some(&&e) = edge_iter.peek() {
            if e == k + 1 {
                xi_edges.push(cumulative / total);
                edge_iter.next();
            } else {
                break;
            }
        }
    }
    let xi_centers: Vec<f64> = xi_edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();

    let mut csv = String::from("bin,xi_center,pixel_start,pixel_end,binned_od\n");
    for b in 0..binned.len() {
        csv.push_str(&format!(
            "{b},{},{},{},{}\n",
            xi_centers[b],
            binning.edges[b],
            binning.edges[b + 1],
            binned[b]
        ));
    }
    fs::write(dir.join("binned_profile.csv"), csv)
        .map_err(|e| CliError::io("binned_profile.csv", e))?;

    let fit = gaussian_profile_fit(&xi_centers, &binned);
    let mut out = String::new();
    out.push_str(&format!(
        "i_out = \"{}\"\ni_0 = \"{}\"\nn_saturated = {}\nbins = {}\nprofile_total_od = {}\n",
        i_out_path.display(),
        i_0_path.display(),
        od.n_saturated,
        n_bins,
        total
    ));
    out.push_str(&format!("\n[profile_fit]\nconverged = {}\n", fit.converged));
    for p in &fit.params {
        out.push_str(&format!(
            "{} = {}\n{}_sigma = {}\n",
            p.name, p.value, p.name, p.sigma
        ));
    }
    fs::write(dir.join("analysis_summary.toml"), out)
        .map_err(|e| CliError::io("analysis_summary.toml", e))?;
    println!("wrote {}", dir.join("analysis_summary.toml").display());
    Ok(())
}

pub fn cmd_list_scenarios() {
    println!("available scenarios (r = takes --override args.ratio=<value>):");
    for (name, takes_ratio, description) in scenarios::preset_catalog() {
        println!(
            "  {:32} {} {}",
            name,
            if takes_ratio { "r" } else { " " },
            description
        );
    }
}
