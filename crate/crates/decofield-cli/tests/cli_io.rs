//! End-to-end CLI behavior: config round-trips, artifact layout, exit
//! codes, and byte-identical reruns across thread counts.

use decofield_cli::config::{
    EnergyConfig, FaureSettings, ModelParams, PurityDecayConfig, QmcSelftestConfig, TimeGrid,
    TimeUnit,
};
use std::fs;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_decofield"))
}

fn small_model() -> ModelParams {
    ModelParams {
        gamma_over_omega: 1.0,
        sigma_g_sq_l: 0.32,
        sigma_x_over_l: 1.0,
        v_over_l_omega: 0.01,
        n_modes: 8,
        x_nodes: None,
        t_nodes_per_period: 8,
    }
}

fn small_purity_config() -> PurityDecayConfig {
    PurityDecayConfig {
        alpha: [2.0, 2.0],
        beta: [-2.0, -2.0],
        model: small_model(),
        times: TimeGrid {
            start: 0.0,
            stop: 3.0,
            count: 4,
            unit: TimeUnit::GammaT,
        },
        n_points: 1 << 10,
        faure: FaureSettings::default(),
    }
}

#[test]
fn config_round_trip_is_lossless() {
    let cfg = small_purity_config();
    let text = serde_json::to_string_pretty(&cfg).unwrap();
    let back: PurityDecayConfig = serde_json::from_str(&text).unwrap();
    assert_eq!(cfg, back);
    let again = serde_json::to_string_pretty(&back).unwrap();
    assert_eq!(text, again);
}

#[test]
fn unknown_fields_are_rejected() {
    let mut doc: serde_json::Value =
        serde_json::to_value(small_purity_config()).unwrap();
    doc.as_object_mut()
        .unwrap()
        .insert("surprise".into(), serde_json::json!(1));
    assert!(serde_json::from_value::<PurityDecayConfig>(doc).is_err());
}

#[test]
fn purity_decay_runs_are_byte_identical_across_threads() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("cfg.json");
    fs::write(
        &cfg_path,
        serde_json::to_string_pretty(&small_purity_config()).unwrap(),
    )
    .unwrap();

    let mut bodies = Vec::new();
    for (i, threads) in ["1", "4", "1"].iter().enumerate() {
        let out = dir.path().join(format!("out{i}"));
        let status = bin()
            .args(["purity-decay", "--config"])
            .arg(&cfg_path)
            .arg("--out")
            .arg(&out)
            .args(["--threads", threads, "--seed", "12345"])
            .status()
            .unwrap();
        assert!(status.success());
        bodies.push(fs::read(out.join("purity_decay.csv")).unwrap());
    }
    assert_eq!(bodies[0], bodies[1], "threads must not change the bytes");
    assert_eq!(bodies[0], bodies[2], "reruns must reproduce the bytes");
}

#[test]
fn purity_csv_has_expected_shape_and_unit_start() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("cfg.json");
    fs::write(
        &cfg_path,
        serde_json::to_string(&small_purity_config()).unwrap(),
    )
    .unwrap();
    let out = dir.path().join("out");
    assert!(bin()
        .args(["purity-decay", "--config"])
        .arg(&cfg_path)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap()
        .success());
    let text = fs::read_to_string(out.join("purity_decay.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "gamma_t,p_qmc,p_err,p_analytic,p_shorttime,p_longtime"
    );
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    let p0: f64 = first[1].parse().unwrap();
    let perr: f64 = first[2].parse().unwrap();
    assert!((p0 - 1.0).abs() < 3.0 * perr.max(0.02), "p(0) = {p0}");
    // sidecar carries provenance
    let sidecar: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("purity_decay.json")).unwrap()).unwrap();
    assert_eq!(sidecar["command"], "purity-decay");
    assert!(sidecar["created_unix_ms"].as_u64().unwrap() > 0);
}

#[test]
fn gamma_zero_keeps_purity_at_one() {
    let mut cfg = small_purity_config();
    cfg.model.gamma_over_omega = 0.0;
    cfg.times.unit = TimeUnit::OmegaT;
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("cfg.json");
    fs::write(&cfg_path, serde_json::to_string(&cfg).unwrap()).unwrap();
    let out = dir.path().join("out");
    assert!(bin()
        .args(["purity-decay", "--config"])
        .arg(&cfg_path)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap()
        .success());
    let text = fs::read_to_string(out.join("purity_decay.csv")).unwrap();
    for line in text.lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        let p: f64 = cells[1].parse().unwrap();
        let err: f64 = cells[2].parse().unwrap();
        assert!((p - 1.0).abs() < 3.0 * err.max(0.02), "{line}");
    }
}

#[test]
fn invalid_config_fails_with_single_line_diagnostic_and_no_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("bad.json");
    let mut doc: serde_json::Value =
        serde_json::to_value(small_purity_config()).unwrap();
    doc["model"]["sigma_g_sq_l"] = serde_json::json!(-1.0);
    fs::write(&cfg_path, serde_json::to_string(&doc).unwrap()).unwrap();
    let out = dir.path().join("out");
    let result = bin()
        .args(["purity-decay", "--config"])
        .arg(&cfg_path)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(!result.status.success());
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert_eq!(stderr.trim().lines().count(), 1, "{stderr}");
    assert!(!out.join("purity_decay.csv").exists());
}

#[test]
fn energy_command_emits_report() {
    let cfg = EnergyConfig {
        model: ModelParams {
            gamma_over_omega: 1.0,
            sigma_g_sq_l: 0.5,
            sigma_x_over_l: 0.02,
            v_over_l_omega: 0.0,
            n_modes: 512,
            x_nodes: None,
            t_nodes_per_period: 8,
        },
    };
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("cfg.json");
    fs::write(&cfg_path, serde_json::to_string(&cfg).unwrap()).unwrap();
    let out = dir.path().join("out");
    assert!(bin()
        .args(["energy", "--config"])
        .arg(&cfg_path)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap()
        .success());
    let text = fs::read_to_string(out.join("energy.csv")).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let gap: f64 = row[2].parse().unwrap();
    assert!(gap < 0.01, "v=0 large-size limit should match: gap {gap}");
}

#[test]
fn kernels_command_b_column_zero_at_t0() {
    let cfg = serde_json::json!({
        "model": {
            "gamma_over_omega": 1.0,
            "sigma_g_sq_l": 0.5,
            "sigma_x_over_l": 0.25,
            "v_over_l_omega": 0.2,
            "n_modes": 8,
            "t_nodes_per_period": 8
        },
        "times_omega_t": [0.0, 0.5]
    });
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("cfg.json");
    fs::write(&cfg_path, serde_json::to_string(&cfg).unwrap()).unwrap();
    let out = dir.path().join("out");
    assert!(bin()
        .args(["kernels", "--config"])
        .arg(&cfg_path)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap()
        .success());
    let text = fs::read_to_string(out.join("kernels.csv")).unwrap();
    for line in text.lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        let t: f64 = cells[0].parse().unwrap();
        if t == 0.0 {
            let b_re: f64 = cells[4].parse().unwrap();
            let b_im: f64 = cells[5].parse().unwrap();
            assert!(b_re.abs() < 1e-14 && b_im.abs() < 1e-14, "{line}");
        }
    }
}

#[test]
fn qmc_selftest_moments_within_tolerance() {
    let cfg = QmcSelftestConfig {
        dimension: 8,
        n_points_ladder: vec![1 << 12, 1 << 14],
        faure: FaureSettings::default(),
    };
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("cfg.json");
    fs::write(&cfg_path, serde_json::to_string(&cfg).unwrap()).unwrap();
    let out = dir.path().join("out");
    assert!(bin()
        .args(["qmc-selftest", "--config"])
        .arg(&cfg_path)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap()
        .success());
    let text = fs::read_to_string(out.join("qmc_selftest.csv")).unwrap();
    let last: Vec<&str> = text.lines().last().unwrap().split(',').collect();
    let unity: f64 = last[1].parse().unwrap();
    let m2: f64 = last[3].parse().unwrap();
    let gauss: f64 = last[5].parse().unwrap();
    assert_eq!(unity, 1.0);
    assert!((m2 - 1.0).abs() < 0.01);
    assert!((gauss - 0.5).abs() < 0.005);
}

#[test]
fn missing_config_flag_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let result = bin()
        .args(["energy", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(!result.status.success());
}
