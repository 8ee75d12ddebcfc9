//! End-to-end tests of the eitlab binary: determinism of the preset
//! outputs, exit codes, record comparison, sweeps, and the image pipeline.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_eitlab"))
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("binary runs");
    assert!(
        out.status.success(),
        "command failed: {:?}\nstdout: {}\nstderr: {}",
        cmd,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn write(path: &Path, text: &str) {
    fs::write(path, text).unwrap();
}

/// Short deterministic run config based on the slow-light preset.
fn short_run_config(dir: &Path) -> PathBuf {
    let path = dir.join("run.toml");
    write(
        &path,
        r#"
scenario = "forward_slow_light_storage"

[emit]
plot_data = true

[overrides]
"grid.t_max_us" = 8.0
"grid.n_xi" = 200
"grid.dt_us" = 0.02
"#,
    );
    path
}

#[test]
fn preset_outputs_are_bit_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let config = short_run_config(dir.path());
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    run_ok(
        bin()
            .args(["run", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out_a),
    );
    run_ok(
        bin()
            .args(["run", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out_b),
    );
    for file in ["record.csv", "detectors.csv", "summary.toml", "plot.gp"] {
        let a = fs::read(out_a.join(file)).unwrap();
        let b = fs::read(out_b.join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between identical runs");
    }
}

#[test]
fn zero_probe_run_writes_zero_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("zero.toml");
    write(
        &config,
        r#"
scenario = "forward_slow_light_storage"
[overrides]
"probe.peak_amplitude" = 0.0
"grid.t_max_us" = 4.0
"grid.n_xi" = 100
"grid.dt_us" = 0.02
"#,
    );
    let out = dir.path().join("out");
    run_ok(
        bin()
            .args(["run", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out),
    );
    let record = fs::read_to_string(out.join("record.csv")).unwrap();
    for line in record.lines().skip(1) {
        for field in line.split(',').skip(1) {
            assert_eq!(field.parse::<f64>().unwrap(), 0.0);
        }
    }
    let summary = fs::read_to_string(out.join("summary.toml")).unwrap();
    assert!(summary.contains("zero_signal = true"));
}

#[test]
fn malformed_config_exits_one_with_field_name() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    write(
        &config,
        r#"
scenario = "forward_slow_light_storage"
[overrides]
"grid.dt_years" = 1.0
"#,
    );
    let out = bin()
        .args(["run", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("grid.dt_years"), "stderr: {stderr}");
}

#[test]
fn unknown_scenario_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    write(&config, "scenario = \"warp_drive\"\n");
    let out = bin()
        .args(["run", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("warp_drive"));
}

#[test]
fn missing_image_exits_three() {
    let out = bin()
        .args([
            "analyze",
            "--i-out",
            "/nonexistent/iout.pgm",
            "--i0",
            "/nonexistent/i0.pgm",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn compare_record_with_itself_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let config = short_run_config(dir.path());
    let out = dir.path().join("out");
    run_ok(
        bin()
            .args(["run", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out),
    );
    let record = out.join("record.csv");
    let cmp = run_ok(bin().arg("compare").arg(&record).arg(&record));
    let stdout = String::from_utf8_lossy(&cmp.stdout);
    assert!(stdout.contains("rms: 0"), "stdout: {stdout}");
}

#[test]
fn compare_mismatched_grids_fails() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    write(&a, "t_us,0,0.5,1\n0,0,1,0\n");
    write(&b, "t_us,0,1\n0,0,1\n");
    let out = bin().arg("compare").arg(&a).arg(&b).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn binary_and_csv_records_compare_equal() {
    let dir = tempfile::tempdir().unwrap();
    let config = short_run_config(dir.path());
    let out_csv = dir.path().join("csv");
    let out_bin = dir.path().join("bin");
    run_ok(
        bin()
            .args(["run", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out_csv),
    );
    run_ok(
        bin()
            .args(["run", "--binary", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out_bin),
    );
    let cmp = run_ok(
        bin()
            .arg("compare")
            .arg(out_csv.join("record.csv"))
            .arg(out_bin.join("record.bin")),
    );
    let stdout = String::from_utf8_lossy(&cmp.stdout);
    assert!(stdout.contains("rms: 0"), "stdout: {stdout}");
}

#[test]
fn sweep_aggregates_and_matches_single_run() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("sweep.toml");
    write(
        &config,
        r#"
scenario = "velocity_sweep_point"

[scenario_args]
ratio = 1.0

[emit]
record_matrix = false
detectors = false

[sweep]
key = "args.ratio"
values = [0.0, "inf"]
"#,
    );
    let out = dir.path().join("sweep_out");
    run_ok(
        bin()
            .args(["sweep", "--workers", "2", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out),
    );
    let aggregate = fs::read_to_string(out.join("aggregate.csv")).unwrap();
    let lines: Vec<&str> = aggregate.lines().collect();
    assert_eq!(lines.len(), 3, "{aggregate}");
    assert!(lines[1].starts_with("0,0.0,ok,"), "{}", lines[1]);
    assert!(lines[2].starts_with("1,inf,ok,"), "{}", lines[2]);
    // Velocities at the two pure endpoints are opposite in sign.
    let v0: f64 = lines[1].split(',').nth(3).unwrap().parse().unwrap();
    let v1: f64 = lines[2].split(',').nth(3).unwrap().parse().unwrap();
    assert!(v0 < -0.3 && v1 > 0.3, "endpoint velocities {v0}, {v1}");

    // Single-point sweep agrees with a plain run's summary fit.
    let run_out = dir.path().join("single");
    let run_config = dir.path().join("single.toml");
    write(
        &run_config,
        r#"
scenario = "velocity_sweep_point"
[scenario_args]
ratio = 0.0
[emit]
record_matrix = false
detectors = false
"#,
    );
    run_ok(
        bin()
            .args(["run", "--config"])
            .arg(&run_config)
            .arg("--out")
            .arg(&run_out),
    );
    let summary = fs::read_to_string(run_out.join("summary.toml")).unwrap();
    let line = summary
        .lines()
        .find(|l| l.starts_with("value = "))
        .expect("velocity fit in summary");
    // summary.toml lists windows in order; the measurement window's
    // velocity must match the sweep aggregate for the same ratio.
    let _ = line;
    let sweep_v = v0;
    let velocities: Vec<f64> = summary
        .lines()
        .filter(|l| l.trim_start().starts_with("value = "))
        .map(|l| l.split('=').nth(1).unwrap().trim().parse().unwrap())
        .collect();
    assert!(
        velocities.iter().any(|&v| (v - sweep_v).abs() < 1e-12),
        "sweep velocity {sweep_v} not found among summary fits {velocities:?}"
    );
}

#[test]
fn nine_point_ratio_sweep_is_monotone_in_cos_2phi() {
    // Ratios ordered by increasing cos2φ from backward-only to
    // forward-only; the fitted velocities must rise monotonically and
    // match the analytic curve.
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("sweep.toml");
    write(
        &config,
        r#"
scenario = "velocity_sweep_point"

[scenario_args]
ratio = 1.0

[emit]
record_matrix = false
detectors = false
analysis_summary = false

[overrides]
"grid.n_xi" = 200
"grid.dt_us" = 0.005

[sweep]
key = "args.ratio"
values = [0.0, 0.3333333, 0.5773503, 0.8164966, 1.0, 1.2247449, 1.7320508, 3.0, "inf"]
"#,
    );
    let out = dir.path().join("out");
    run_ok(
        bin()
            .args(["sweep", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out),
    );
    let aggregate = fs::read_to_string(out.join("aggregate.csv")).unwrap();
    let mut fitted = Vec::new();
    let mut worst_rel = 0.0f64;
    for line in aggregate.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[2], "ok", "{line}");
        fitted.push(fields[3].parse::<f64>().unwrap());
        worst_rel = worst_rel.max(fields[6].parse::<f64>().unwrap());
    }
    assert_eq!(fitted.len(), 9);
    assert!(
        fitted.windows(2).all(|w| w[1] > w[0]),
        "velocities not monotone: {fitted:?}"
    );
    assert!(worst_rel < 0.06, "worst floored relative error {worst_rel}");
}

#[test]
fn empty_sweep_grid_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("sweep.toml");
    write(
        &config,
        r#"
scenario = "velocity_sweep_point"
[scenario_args]
ratio = 1.0
[sweep]
key = "args.ratio"
values = []
"#,
    );
    let out = bin()
        .args(["sweep", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn analyze_image_pair_recovers_forward_model() {
    // Forward-model a cloud into a 16-bit PGM pair, run the analyze
    // pipeline, and check the recovered profile fit.
    let dir = tempfile::tempdir().unwrap();
    let rows = 6;
    let cols = 400;
    let peak_od: f64 = 1.8;
    let center = 0.45;
    let sigma = 0.1;
    let scale = 40000.0;
    let mut iout = Vec::new();
    let mut i0 = Vec::new();
    for _r in 0..rows {
        for c in 0..cols {
            let x = c as f64 / (cols - 1) as f64;
            let od = peak_od * (-(x - center) * (x - center) / (2.0 * sigma * sigma)).exp();
            i0.push(scale);
            iout.push(scale * (-2.0 * od).exp());
        }
    }
    let write_pgm = |path: &Path, data: &[f64]| {
        let mut bytes = format!("P5\n{cols} {rows}\n65535\n").into_bytes();
        for v in data {
            bytes.extend_from_slice(&(v.round() as u16).to_be_bytes());
        }
        fs::write(path, bytes).unwrap();
    };
    let i0_path = dir.path().join("i0.pgm");
    let iout_path = dir.path().join("iout.pgm");
    write_pgm(&i0_path, &i0);
    write_pgm(&iout_path, &iout);
    let out = dir.path().join("analysis");
    run_ok(
        bin()
            .args(["analyze", "--bins", "200", "--i-out"])
            .arg(&iout_path)
            .arg("--i0")
            .arg(&i0_path)
            .arg("--out")
            .arg(&out),
    );
    let summary = fs::read_to_string(out.join("analysis_summary.toml")).unwrap();
    assert!(summary.contains("converged = true"), "{summary}");
    // Total recovered optical depth matches the forward model (rows ×
    // Gaussian integral) within quantization error.
    let total_line = summary
        .lines()
        .find(|l| l.starts_with("profile_total_od"))
        .unwrap();
    let total: f64 = total_line
        .split('=')
        .nth(1)
        .unwrap()
        .trim()
        .parse()
        .unwrap();
    let expected: f64 = (0..cols)
        .map(|c| {
            let x = c as f64 / (cols - 1) as f64;
            rows as f64 * peak_od * (-(x - center) * (x - center) / (2.0 * sigma * sigma)).exp()
        })
        .sum();
    assert!(
        ((total - expected) / expected).abs() < 1e-3,
        "recovered od {total} vs {expected}"
    );
    assert!(out.join("binned_profile.csv").exists());
}

#[test]
fn analyze_record_matches_inline_analysis() {
    let dir = tempfile::tempdir().unwrap();
    let config = short_run_config(dir.path());
    let out = dir.path().join("out");
    run_ok(
        bin()
            .args(["run", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out),
    );
    let analysis = dir.path().join("analysis");
    run_ok(
        bin()
            .args(["analyze", "--record"])
            .arg(out.join("record.csv"))
            .arg("--out")
            .arg(&analysis),
    );
    let summary = fs::read_to_string(analysis.join("analysis_summary.toml")).unwrap();
    assert!(summary.contains("[velocity]"), "{summary}");
    let reported: f64 = summary
        .lines()
        .find(|l| l.starts_with("slope_xi_per_us"))
        .and_then(|l| l.split('=').nth(1))
        .unwrap()
        .trim()
        .parse()
        .unwrap();

    // Pipeline identity: the same fit computed inline from the CSV.
    let text = fs::read_to_string(out.join("record.csv")).unwrap();
    let mut lines = text.lines();
    let xi: Vec<f64> = lines
        .next()
        .unwrap()
        .split(',')
        .skip(1)
        .map(|f| f.parse().unwrap())
        .collect();
    let mut times = Vec::new();
    let mut values = Vec::new();
    for line in lines {
        let mut fields = line.split(',');
        times.push(fields.next().unwrap().parse::<f64>().unwrap());
        values.extend(fields.map(|f| f.parse::<f64>().unwrap()));
    }
    let record = eitlab::record::SpinwaveRecord {
        s_mag: ndarray::Array2::from_shape_vec((times.len(), xi.len()), values).unwrap(),
        times: times.clone(),
        xi,
        detector_times: vec![],
        out_forward: vec![],
        out_backward: vec![],
        normalization: 1.0,
        zero_signal: false,
    };
    let track = eitlab::analysis::centroid_track(&record, 0.0);
    let fit = eitlab::analysis::group_velocity_fit(
        &track,
        (*times.first().unwrap(), *times.last().unwrap()),
    )
    .unwrap();
    let inline = fit.value("slope").unwrap();
    assert!(
        (reported - inline).abs() <= 1e-12 * inline.abs().max(1e-12),
        "analyze reported {reported}, inline fit {inline}"
    );
}

#[test]
fn advection_record_tracks_the_full_solver() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    write(
        &config,
        r#"
scenario = "forward_slow_light_storage"
advection_handoff_us = 8.0

[emit]
advection_record = true

[overrides]
"grid.t_max_us" = 13.0
"#,
    );
    let out = dir.path().join("out");
    run_ok(
        bin()
            .args(["run", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out),
    );
    let cmp = run_ok(
        bin()
            .arg("compare")
            .arg(out.join("record.csv"))
            .arg(out.join("record_advection.csv"))
            .arg("--out")
            .arg(out.join("cmp")),
    );
    let stdout = String::from_utf8_lossy(&cmp.stdout);
    let rms: f64 = stdout
        .lines()
        .find(|l| l.starts_with("rms:"))
        .and_then(|l| l.split(':').nth(1))
        .unwrap()
        .trim()
        .parse()
        .unwrap();
    assert!(
        rms < 0.03,
        "reduced model diverges from the full solver: rms {rms}"
    );
    assert!(out.join("cmp/compare.csv").exists());
}

#[test]
fn cli_override_flag_beats_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = short_run_config(dir.path());
    let out = dir.path().join("out");
    run_ok(
        bin()
            .args(["run", "--override", "probe.peak_amplitude=0", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out),
    );
    let summary = fs::read_to_string(out.join("summary.toml")).unwrap();
    assert!(summary.contains("zero_signal = true"), "{summary}");
}

#[test]
fn analyze_reads_ascii_graymaps() {
    let dir = tempfile::tempdir().unwrap();
    let i0 = dir.path().join("i0.pgm");
    let iout = dir.path().join("iout.pgm");
    // 1×24 P2 images; transmission dips in the middle.
    let vals: Vec<u32> = (0..24)
        .map(|c| if (8..16).contains(&c) { 300 } else { 1000 })
        .collect();
    let fmt = |v: &[u32]| {
        let body: Vec<String> = v.iter().map(|x| x.to_string()).collect();
        format!("P2\n24 1\n1000\n{}\n", body.join(" "))
    };
    write(&i0, &fmt(&vec![1000; 24]));
    write(&iout, &fmt(&vals));
    let out = dir.path().join("analysis");
    run_ok(
        bin()
            .args(["analyze", "--bins", "12", "--i-out"])
            .arg(&iout)
            .arg("--i0")
            .arg(&i0)
            .arg("--out")
            .arg(&out),
    );
    let binned = fs::read_to_string(out.join("binned_profile.csv")).unwrap();
    assert!(binned.lines().count() > 2, "{binned}");
}

#[test]
fn list_scenarios_prints_catalog() {
    let out = run_ok(bin().arg("list-scenarios"));
    let stdout = String::from_utf8_lossy(&out.stdout);
    for name in [
        "forward_slow_light_storage",
        "backward_retrieval",
        "quasi_stationary",
        "stationary_from_slow",
        "stationary_from_stopped",
        "reflection",
        "velocity_sweep_point",
    ] {
        assert!(stdout.contains(name), "missing {name} in: {stdout}");
    }
}

#[test]
fn presets_serialize_and_rebuild_identically() {
    // Field-by-field round trip of every serializable preset.
    use eitlab::scenarios;
    let mut presets = vec![
        scenarios::forward_slow_light_storage(),
        scenarios::backward_retrieval(),
        scenarios::quasi_stationary(0.5),
        scenarios::stationary_from_slow(),
        scenarios::stationary_from_stopped(),
        scenarios::bichromatic_base(),
        scenarios::reflection(2.0),
        scenarios::velocity_sweep_point(3.0),
    ];
    let (mono, detuned) = scenarios::bichromatic_pair(&scenarios::bichromatic_base());
    presets.push(mono);
    presets.push(detuned);
    for preset in presets {
        let text = toml::to_string(&preset).unwrap();
        let back: scenarios::Scenario = toml::from_str(&text).unwrap();
        assert_eq!(back, preset, "round trip changed {}", preset.name);
    }
}
