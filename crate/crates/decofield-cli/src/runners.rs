//! One function per CLI subcommand: build the model, run the computation,
//! and emit the CSV + JSON sidecar pair into the output directory.

use crate::config::{
    EnergyConfig, InitialRateConfig, KernelsConfig, PurityDecayConfig, QmcSelftestConfig,
};
use crate::output::{csv_body, csv_body_blocks, fmt17, sidecar_json, RunOutputs};
use crate::parallel::integrate_many_parallel;
use anyhow::{Context, Result};
use decofield_core::energy::{heating_rate_closed, heating_rate_sum, EnergyError};
use decofield_core::model::ModeGrid;
use decofield_core::purity::{
    purity_analytic_narrow, purity_longtime_asymptote, InitialRateIntegrand, PurityCurveIntegrand,
};
use decofield_core::qmc::{discrepancy_proxy, QmcEstimate};
use decofield_core::semiclassical::{kernels_at, q_coefficients};
use std::path::{Path, PathBuf};

pub struct RunArtifacts {
    pub csv: PathBuf,
    pub sidecar: PathBuf,
}

fn artifact_paths(out_dir: &Path, stem: &str) -> (PathBuf, PathBuf) {
    (
        out_dir.join(format!("{stem}.csv")),
        out_dir.join(format!("{stem}.json")),
    )
}

/// Purity decay curve: columns
/// `gamma_t, p_qmc, p_err, p_analytic, p_shorttime, p_longtime`.
pub fn run_purity_decay(
    cfg: &PurityDecayConfig,
    out_dir: &Path,
    threads: usize,
    seed_override: Option<u64>,
) -> Result<RunArtifacts> {
    let ctx = cfg.model.rate_context()?;
    let state = cfg.state()?;
    let gamma = ctx.noise.gamma;
    let (times, gammat) = cfg.times.physical(gamma)?;
    let qmc_cfg = cfg.faure.to_config(2 * cfg.model.n_modes, seed_override)?;
    let integrand = PurityCurveIntegrand::new(&ctx, state, &times)
        .map_err(|e| anyhow::anyhow!("invalid purity request: {e}"))?;
    let estimates = integrate_many_parallel(&integrand, &qmc_cfg, cfg.n_points, threads)
        .context("purity integration failed")?;

    let sg2l = ctx.noise.sigma_g_sq * ctx.model.length;
    let rows: Vec<Vec<String>> = estimates
        .iter()
        .zip(gammat.iter())
        .zip(times.iter())
        .map(|((est, &gt), &t)| {
            let analytic = purity_analytic_narrow(&state, 4.0 * gt * sg2l);
            let shorttime = (-2.0 * gt).exp();
            let longtime = if gamma * t > 0.0 {
                purity_longtime_asymptote(&ctx.noise, &ctx.model, t)
            } else {
                f64::INFINITY
            };
            vec![
                fmt17(gt),
                fmt17(est.value),
                fmt17(est.error_estimate),
                fmt17(analytic),
                fmt17(shorttime),
                fmt17(longtime),
            ]
        })
        .collect();
    let body = csv_body(
        &[
            "gamma_t",
            "p_qmc",
            "p_err",
            "p_analytic",
            "p_shorttime",
            "p_longtime",
        ],
        &rows,
    );

    let (csv, sidecar) = artifact_paths(out_dir, "purity_decay");
    let mut outputs = RunOutputs::new();
    outputs.write(&csv, &body)?;
    let meta = sidecar_json(
        "purity-decay",
        cfg,
        threads,
        Some(qmc_cfg.scramble_seed),
        serde_json::json!({
            "n_points": cfg.n_points,
            "faure_base": qmc_cfg.base,
            "faure_skip": qmc_cfg.skip,
        }),
        &[&csv],
    )?;
    outputs.write(&sidecar, &meta)?;
    outputs.commit();
    Ok(RunArtifacts { csv, sidecar })
}

/// Initial decay rate vs separation, one blank-line-separated block per
/// offset: columns `separation, r0_qmc, r0_err, r0_analytic`.
pub fn run_initial_rate(
    cfg: &InitialRateConfig,
    out_dir: &Path,
    threads: usize,
    seed_override: Option<u64>,
) -> Result<RunArtifacts> {
    let ctx = cfg.model.rate_context()?;
    let separations = cfg.separations.values()?;
    let qmc_cfg = cfg.faure.to_config(2 * cfg.model.n_modes, seed_override)?;

    let mut blocks: Vec<Vec<Vec<String>>> = Vec::new();
    let mut estimates: Vec<Vec<(f64, QmcEstimate, f64)>> = Vec::new();
    for &offset in &cfg.offsets {
        let mut rows = Vec::new();
        let mut block_est = Vec::new();
        for &d in &separations {
            let state = InitialRateConfig::state(offset, d)?;
            let integrand = InitialRateIntegrand::new(&ctx, state);
            let est = integrate_many_parallel(&integrand, &qmc_cfg, cfg.n_points, threads)
                .context("initial-rate integration failed")?[0];
            let analytic =
                decofield_core::purity::initial_rate_analytic(&state, &ctx.noise, &ctx.model);
            rows.push(vec![
                fmt17(d),
                fmt17(est.value),
                fmt17(est.error_estimate),
                fmt17(analytic),
            ]);
            block_est.push((d, est, analytic));
        }
        blocks.push(rows);
        estimates.push(block_est);
    }
    let body = csv_body_blocks(&["separation", "r0_qmc", "r0_err", "r0_analytic"], &blocks);

    let (csv, sidecar) = artifact_paths(out_dir, "initial_rate");
    let mut outputs = RunOutputs::new();
    outputs.write(&csv, &body)?;
    let meta = sidecar_json(
        "initial-rate",
        cfg,
        threads,
        Some(qmc_cfg.scramble_seed),
        serde_json::json!({
            "block_offsets": cfg.offsets,
            "r_max": decofield_core::purity::r_max(&ctx.noise, &ctx.model),
            "faure_base": qmc_cfg.base,
            "faure_skip": qmc_cfg.skip,
        }),
        &[&csv],
    )?;
    outputs.write(&sidecar, &meta)?;
    outputs.commit();
    Ok(RunArtifacts { csv, sidecar })
}

/// Heating report: columns `rate_sum, rate_closed, relative_gap`.
pub fn run_energy(cfg: &EnergyConfig, out_dir: &Path, threads: usize) -> Result<RunArtifacts> {
    let model = cfg.model.field_model()?;
    let noise = cfg.model.noise_model()?;
    let grid = ModeGrid::new(&model, &noise);
    let (rate_sum, truncation) = match heating_rate_sum(&model, &noise, &grid) {
        Ok(rate) => (rate, None),
        Err(EnergyError::Truncated {
            rate,
            tail_fraction,
        }) => (rate, Some(tail_fraction)),
    };
    let rate_closed = heating_rate_closed(&model, &noise);
    let gap = (rate_sum - rate_closed).abs() / rate_closed.max(f64::MIN_POSITIVE);
    let rows = vec![vec![fmt17(rate_sum), fmt17(rate_closed), fmt17(gap)]];
    let body = csv_body(&["rate_sum", "rate_closed", "relative_gap"], &rows);

    let (csv, sidecar) = artifact_paths(out_dir, "energy");
    let mut outputs = RunOutputs::new();
    outputs.write(&csv, &body)?;
    let meta = sidecar_json(
        "energy",
        cfg,
        threads,
        None,
        serde_json::json!({ "truncation_warning_tail_fraction": truncation }),
        &[&csv],
    )?;
    outputs.write(&sidecar, &meta)?;
    outputs.commit();
    Ok(RunArtifacts { csv, sidecar })
}

/// Kernel and diffusion-coefficient tables: one row per (time, offset).
pub fn run_kernels(cfg: &KernelsConfig, out_dir: &Path, threads: usize) -> Result<RunArtifacts> {
    let ctx = cfg.model.rate_context()?;
    let mut rows = Vec::new();
    for &t in &cfg.times_omega_t {
        if !t.is_finite() || t < 0.0 {
            anyhow::bail!("kernel times must be finite and nonnegative");
        }
        let kern = kernels_at(&ctx, t);
        let q = q_coefficients(&ctx, t);
        for i in 0..kern.a.len() {
            let offset = kern.dx * i as f64;
            let cells: Vec<String> = [
                t,
                offset,
                kern.a[i].re,
                kern.a[i].im,
                kern.b[i].re,
                kern.b[i].im,
                q.q_ll[i].re,
                q.q_ll[i].im,
                q.q_ll_star[i].re,
                q.q_ll_star[i].im,
                q.q_star_l[i].re,
                q.q_star_l[i].im,
                q.q_star_star[i].re,
                q.q_star_star[i].im,
            ]
            .iter()
            .map(|&v| fmt17(v))
            .collect();
            rows.push(cells);
        }
    }
    let body = csv_body(
        &[
            "omega_t",
            "offset",
            "a_re",
            "a_im",
            "b_re",
            "b_im",
            "q_ll_re",
            "q_ll_im",
            "q_ll_star_re",
            "q_ll_star_im",
            "q_star_l_re",
            "q_star_l_im",
            "q_star_star_re",
            "q_star_star_im",
        ],
        &rows,
    );

    let (csv, sidecar) = artifact_paths(out_dir, "kernels");
    let mut outputs = RunOutputs::new();
    outputs.write(&csv, &body)?;
    let meta = sidecar_json("kernels", cfg, threads, None, serde_json::json!({}), &[&csv])?;
    outputs.write(&sidecar, &meta)?;
    outputs.commit();
    Ok(RunArtifacts { csv, sidecar })
}

/// QMC diagnostic ladder: the three moment integrands with known values
/// plus the 2D discrepancy proxy, per point count.
pub fn run_qmc_selftest(
    cfg: &QmcSelftestConfig,
    out_dir: &Path,
    threads: usize,
    seed_override: Option<u64>,
) -> Result<RunArtifacts> {
    let qmc_cfg = cfg.faure.to_config(cfg.dimension, seed_override)?;
    struct Moments;
    impl decofield_core::qmc::MultiIntegrand for Moments {
        type Scratch = ();
        fn n_outputs(&self) -> usize {
            3
        }
        fn new_scratch(&self) {}
        fn eval(
            &self,
            p: &decofield_core::model::PhasePoint,
            _s: &mut (),
            out: &mut [f64],
        ) {
            let s = p.eta[0].norm_sqr();
            out[0] = 1.0;
            out[1] = s;
            out[2] = (-s).exp();
        }
    }
    let mut rows = Vec::new();
    for &n in &cfg.n_points_ladder {
        let ests = integrate_many_parallel(&Moments, &qmc_cfg, n, threads)?;
        let disc = discrepancy_proxy(&qmc_cfg, n, (0, 1.min(cfg.dimension - 1)), 32)
            .map_err(|e| anyhow::anyhow!("{e}"))?;
        rows.push(vec![
            n.to_string(),
            fmt17(ests[0].value),
            fmt17(ests[0].error_estimate),
            fmt17(ests[1].value),
            fmt17(ests[1].error_estimate),
            fmt17(ests[2].value),
            fmt17(ests[2].error_estimate),
            fmt17(disc),
        ]);
    }
    let body = csv_body(
        &[
            "n_points",
            "unity",
            "unity_err",
            "second_moment",
            "second_moment_err",
            "gaussian",
            "gaussian_err",
            "discrepancy_proxy",
        ],
        &rows,
    );

    let (csv, sidecar) = artifact_paths(out_dir, "qmc_selftest");
    let mut outputs = RunOutputs::new();
    outputs.write(&csv, &body)?;
    let meta = sidecar_json(
        "qmc-selftest",
        cfg,
        threads,
        Some(qmc_cfg.scramble_seed),
        serde_json::json!({
            "expected": { "unity": 1.0, "second_moment": 1.0, "gaussian": 0.5 },
            "faure_base": qmc_cfg.base,
            "faure_skip": qmc_cfg.skip,
        }),
        &[&csv],
    )?;
    outputs.write(&sidecar, &meta)?;
    outputs.commit();
    Ok(RunArtifacts { csv, sidecar })
}
