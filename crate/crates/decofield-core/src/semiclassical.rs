//! Position-basis semiclassical layer: interaction-picture kick kernels,
//! the diffusion (Fokker-Planck) coefficients built from them, and a
//! compound-Poisson trajectory sampler on the functional phase space.
//!
//! A phase-space point is a complex function `lambda(y)` on the periodic
//! grid. Between kicks nothing happens (interaction picture); at each kick
//! drawn from a Poisson stream of rate gamma, with center `x` uniform on
//! `[0, L)` and amplitude `xi` from the kick distribution, the field is
//! displaced by the kernel combination
//!
//! ```text
//! lambda(y) += (1/sqrt(L)) sum_k f_k [xi conj(A_k(t)) - xi* B_k(t)] e^{ik(x-y)}
//! ```
//!
//! where `a_t, b_t` have mode coefficients `A_k, B_k` as in [`kernels_at`].
//! The conjugation on `A_k` is fixed by requiring that the induced mode
//! displacement is exactly `e^{i w_k t} f_k e^{-ikx} (xi O+_k - xi* O-_k)`,
//! the displacement the master equation generates on the mode variables;
//! with the plain kernel pairing the per-kick second moment would acquire a
//! spurious time dependence and the heating cross-check fails.

use crate::decoherence::RateContext;
use crate::math;
use crate::qmc::QmcEstimate;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;
use num_complex::Complex64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// Interaction-picture kernel profiles over grid offsets `r_i = i L / n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernels {
    pub a: Vec<Complex64>,
    pub b: Vec<Complex64>,
    pub t: f64,
    pub dx: f64,
    pub length: f64,
}

/// Per-mode kernel coefficients at time `t`:
/// `A_k = cos(w_k t) - (i/2)(w/w_k + w_k/w) sin(w_k t)` and
/// `B_k = (i/2)(w/w_k - w_k/w) sin(w_k t)`, both multiplied by `f_k` in the
/// position profiles. `B_k` vanishes identically when the dispersion is
/// flat (`v = 0`), and at `t = 0` the `a` profile reduces to the spread
/// function itself.
fn mode_coefficients_at(ctx: &RateContext, t: f64) -> (Vec<Complex64>, Vec<Complex64>) {
    let grid = &ctx.grid;
    let omega = ctx.model.omega;
    let n = grid.len();
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    for i in 0..n {
        let wk = grid.omega_k[i];
        let (s, c) = (math::sin(wk * t), math::cos(wk * t));
        let sum = omega / wk + wk / omega;
        let diff = omega / wk - wk / omega;
        a.push(Complex64::new(c, -0.5 * sum * s));
        b.push(Complex64::new(0.0, 0.5 * diff * s));
    }
    (a, b)
}

/// Kernel profiles `a_t(r)`, `b_t(r)` by truncated mode sums on the context
/// grid; both depend on positions only through the offset `r = x - y`.
pub fn kernels_at(ctx: &RateContext, t: f64) -> Kernels {
    let (coef_a, coef_b) = mode_coefficients_at(ctx, t);
    let grid = &ctx.grid;
    let n_x = ctx.x_nodes;
    let length = ctx.model.length;
    let inv_sqrt_l = 1.0 / math::sqrt(length);
    let mut a = vec![Complex64::new(0.0, 0.0); n_x];
    let mut b = vec![Complex64::new(0.0, 0.0); n_x];
    for (i, (ai, bi)) in a.iter_mut().zip(b.iter_mut()).enumerate() {
        let r = length * i as f64 / n_x as f64;
        for m in 0..grid.len() {
            let phase = math::cis(grid.wavenumbers[m] * r) * grid.f_k[m] * inv_sqrt_l;
            *ai += coef_a[m] * phase;
            *bi += coef_b[m] * phase;
        }
    }
    Kernels {
        a,
        b,
        t,
        dx: length / n_x as f64,
        length,
    }
}

/// The four diffusion coefficients as offset profiles, common prefactor
/// `gamma sigma_g^2` included:
///
/// ```text
/// q_ll(r)        = -gamma sigma_g^2 <b(x) a*(x - r)>_x
/// q_ll_star(r)   =  gamma sigma_g^2 <b(x) b*(x - r)>_x
/// q_star_l(r)    =  gamma sigma_g^2 <a(x) a*(x - r)>_x
/// q_star_star(r) = -gamma sigma_g^2 <a(x) b*(x - r)>_x
/// ```
///
/// `q_star_l` is a positive-semidefinite convolution kernel and
/// `q_ll(r) = conj(q_star_star(-r))`.
#[derive(Debug, Clone, PartialEq)]
pub struct QCoefficients {
    pub q_ll: Vec<Complex64>,
    pub q_ll_star: Vec<Complex64>,
    pub q_star_l: Vec<Complex64>,
    pub q_star_star: Vec<Complex64>,
    pub prefactor: f64,
    pub t: f64,
    pub dx: f64,
}

/// Periodic-grid circular correlation `<u(x) v*(x - r)>_x`.
fn circular_correlation(u: &[Complex64], v: &[Complex64], out: &mut [Complex64]) {
    let n = u.len();
    for (shift, slot) in out.iter_mut().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, &uj) in u.iter().enumerate() {
            let idx = (j + n - shift) % n;
            acc += uj * v[idx].conj();
        }
        *slot = acc / n as f64;
    }
}

/// Diffusion coefficients at time `t` from the kernel profiles, by direct
/// quadrature of the defining spatial averages on the periodic grid.
pub fn q_coefficients(ctx: &RateContext, t: f64) -> QCoefficients {
    let kern = kernels_at(ctx, t);
    let pref = ctx.noise.gamma * ctx.noise.sigma_g_sq;
    let n = kern.a.len();
    let mut q_ll = vec![Complex64::new(0.0, 0.0); n];
    let mut q_ll_star = vec![Complex64::new(0.0, 0.0); n];
    let mut q_star_l = vec![Complex64::new(0.0, 0.0); n];
    let mut q_star_star = vec![Complex64::new(0.0, 0.0); n];
    circular_correlation(&kern.b, &kern.a, &mut q_ll);
    circular_correlation(&kern.b, &kern.b, &mut q_ll_star);
    circular_correlation(&kern.a, &kern.a, &mut q_star_l);
    circular_correlation(&kern.a, &kern.b, &mut q_star_star);
    for i in 0..n {
        q_ll[i] *= -pref;
        q_ll_star[i] *= pref;
        q_star_l[i] *= pref;
        q_star_star[i] *= -pref;
    }
    QCoefficients {
        q_ll,
        q_ll_star,
        q_star_l,
        q_star_star,
        prefactor: pref,
        t,
        dx: kern.dx,
    }
}

/// A point of the functional phase space: one complex amplitude per grid
/// node.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalField {
    pub lambda: Vec<Complex64>,
    pub length: f64,
}

impl ClassicalField {
    pub fn vacuum(ctx: &RateContext) -> Self {
        Self {
            lambda: vec![Complex64::new(0.0, 0.0); ctx.x_nodes],
            length: ctx.model.length,
        }
    }
}

/// One phase-space kick of the compound Poisson process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kick {
    pub t: f64,
    pub x: f64,
    pub xi: Complex64,
}

#[inline]
fn unit_open(r: &mut ChaCha12Rng) -> f64 {
    // 53-bit uniform in [0, 1)
    (r.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0)
}

/// Kick times, centers, and amplitudes over `[0, t_final]`, fully
/// determined by `(seed, stream)`: exponential inter-arrival times at rate
/// gamma, centers uniform on `[0, L)`, amplitudes complex Gaussian with the
/// kick distribution's per-quadrature variance.
pub fn draw_kicks(
    ctx: &RateContext,
    t_final: f64,
    seed: u64,
    stream: u64,
) -> Vec<Kick> {
    let gamma = ctx.noise.gamma;
    let mut kicks = Vec::new();
    if gamma <= 0.0 || t_final <= 0.0 {
        return kicks;
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let sigma = math::sqrt(ctx.noise.sigma_g_sq);
    let mut t = 0.0f64;
    loop {
        t += -math::ln(1.0 - unit_open(&mut rng)) / gamma;
        if t > t_final {
            break;
        }
        let x = unit_open(&mut rng) * ctx.model.length;
        // Box-Muller pair
        let r = math::sqrt(-2.0 * math::ln(1.0 - unit_open(&mut rng)));
        let phi = TAU * unit_open(&mut rng);
        let xi = Complex64::new(r * math::cos(phi), r * math::sin(phi)) * sigma;
        kicks.push(Kick { t, x, xi });
    }
    kicks
}

/// Apply a kick list to a field, each displacement evaluated from the
/// kernels at that kick's absolute interaction-picture time.
pub fn apply_kicks(ctx: &RateContext, field: &ClassicalField, kicks: &[Kick]) -> ClassicalField {
    let grid = &ctx.grid;
    let n_modes = grid.len();
    let n_x = field.lambda.len();
    let length = ctx.model.length;
    let inv_sqrt_l = 1.0 / math::sqrt(length);
    // e^{-i k y_i} tables, one row per mode
    let mut conj_phase = Vec::with_capacity(n_modes * n_x);
    for m in 0..n_modes {
        let k = grid.wavenumbers[m];
        for i in 0..n_x {
            let y = length * i as f64 / n_x as f64;
            conj_phase.push(math::cis(-k * y));
        }
    }
    let mut out = field.clone();
    let omega = ctx.model.omega;
    for kick in kicks {
        for m in 0..n_modes {
            let wk = grid.omega_k[m];
            let (s, c) = (math::sin(wk * kick.t), math::cos(wk * kick.t));
            let sum = omega / wk + wk / omega;
            let diff = omega / wk - wk / omega;
            let coef_a = Complex64::new(c, -0.5 * sum * s);
            let coef_b = Complex64::new(0.0, 0.5 * diff * s);
            let d = grid.f_k[m]
                * inv_sqrt_l
                * (kick.xi * coef_a.conj() - kick.xi.conj() * coef_b);
            if d.norm_sqr() < 1e-60 {
                continue;
            }
            let w = d * math::cis(grid.wavenumbers[m] * kick.x);
            let row = &conj_phase[m * n_x..(m + 1) * n_x];
            for (slot, ph) in out.lambda.iter_mut().zip(row.iter()) {
                *slot += w * ph;
            }
        }
    }
    out
}

/// One realization of the jump process: the field after all kicks of a
/// seeded Poisson stream. Identical `(seed, stream)` give bit-identical
/// trajectories.
pub fn sample_trajectory(
    ctx: &RateContext,
    initial: &ClassicalField,
    t_final: f64,
    seed: u64,
    stream: u64,
) -> ClassicalField {
    let kicks = draw_kicks(ctx, t_final, seed, stream);
    apply_kicks(ctx, initial, &kicks)
}

/// Fourier amplitudes `lhat_k = (1/sqrt(L)) int dy e^{-iky} lambda(y)` on
/// the grid, in mode-grid order.
pub fn field_fourier(ctx: &RateContext, field: &ClassicalField) -> Vec<Complex64> {
    let grid = &ctx.grid;
    let n_x = field.lambda.len();
    let length = field.length;
    let scale = math::sqrt(length) / n_x as f64;
    grid.wavenumbers
        .iter()
        .map(|&k| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, &l) in field.lambda.iter().enumerate() {
                let y = length * i as f64 / n_x as f64;
                acc += l * math::cis(-k * y);
            }
            acc * scale
        })
        .collect()
}

/// Mode coherent amplitudes `lambda_k = O+_k lhat_k - O-_k conj(lhat_{-k})`.
pub fn mode_amplitudes(ctx: &RateContext, field: &ClassicalField) -> Vec<Complex64> {
    let fourier = field_fourier(ctx, field);
    let grid = &ctx.grid;
    (0..grid.len())
        .map(|i| {
            let partner = grid
                .negated_index(i)
                .map(|n| fourier[n].conj())
                .unwrap_or_else(|| Complex64::new(0.0, 0.0));
            grid.omega_plus[i] * fourier[i] - grid.omega_minus[i] * partner
        })
        .collect()
}

/// Classical field energy `sum_k hbar w_k |lambda_k|^2`.
pub fn field_energy(ctx: &RateContext, field: &ClassicalField) -> f64 {
    let amps = mode_amplitudes(ctx, field);
    let grid = &ctx.grid;
    amps.iter()
        .enumerate()
        .map(|(i, a)| ctx.model.hbar * grid.omega_k[i] * a.norm_sqr())
        .sum()
}

/// Lab-frame quadratures `(Phi, Pi)` of an interaction-picture field at
/// time `t`: modes rotate by `e^{-i w_k t}`, then
/// `Phi = sqrt(2 hbar / mu w) Re lambda_lab`, `Pi = sqrt(2 hbar mu w) Im lambda_lab`.
pub fn lab_frame_quadratures(
    ctx: &RateContext,
    field: &ClassicalField,
    t: f64,
) -> (Vec<f64>, Vec<f64>) {
    let amps = mode_amplitudes(ctx, field);
    let grid = &ctx.grid;
    let n_x = field.lambda.len();
    let length = field.length;
    let inv_sqrt_l = 1.0 / math::sqrt(length);
    let model = &ctx.model;
    let phi_scale = math::sqrt(2.0 * model.hbar / (model.mass_density * model.omega));
    let pi_scale = math::sqrt(2.0 * model.hbar * model.mass_density * model.omega);
    let mut phi = vec![0.0; n_x];
    let mut pi = vec![0.0; n_x];
    for (i, (p, q)) in phi.iter_mut().zip(pi.iter_mut()).enumerate() {
        let y = length * i as f64 / n_x as f64;
        let mut lab = Complex64::new(0.0, 0.0);
        for m in 0..grid.len() {
            let rotated = amps[m] * math::cis(-grid.omega_k[m] * t);
            let phase = math::cis(grid.wavenumbers[m] * y);
            lab += inv_sqrt_l
                * (grid.omega_plus[m] * rotated * phase
                    + grid.omega_minus[m] * rotated.conj() * phase.conj());
        }
        *p = phi_scale * lab.re;
        *q = pi_scale * lab.im;
    }
    (phi, pi)
}

/// Diffusion-limit validation along the scaling family
/// `sigma_g^2 -> eps sigma_g^2`, `gamma -> gamma / eps`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionReport {
    pub epsilons: [f64; 3],
    /// worst relative mismatch of per-mode field covariance against the
    /// time-integrated diffusion coefficients (statistics-limited; does not
    /// scale with eps because second moments of the jump process are exact)
    pub covariance_rel_err: [f64; 3],
    /// mode-averaged fourth-moment excess over the Gaussian value; the
    /// genuine diffusion-limit deviation, proportional to eps
    pub gaussian_dev: [f64; 3],
    pub n_trajectories: u64,
}

/// Sample trajectories in mode-Fourier space (exactly equivalent to the
/// grid sampler, mode by mode) for the three scaled contexts and compare
/// their statistics with the prediction integrated from [`q_coefficients`].
pub fn diffusion_check(
    ctx: &RateContext,
    t: f64,
    n_trajectories: u64,
    seed: u64,
) -> Result<DiffusionReport, crate::decoherence::RateError> {
    let epsilons = [1.0, 0.25, 0.0625];
    let grid = &ctx.grid;
    let n_modes = grid.len();

    // Predicted per-mode variance of lhat_k: Fourier transform of the
    // time-integrated covariance profile 2 int_0^t [q_star_l(r) + q_ll_star(-r)] dtau.
    let (gl_x, gl_w) = math::gauss_legendre(16);
    let panels = (math::ceil(t / ctx.min_period() * 2.0) as usize).max(4);
    let width = t / panels as f64;
    let mut profile = vec![Complex64::new(0.0, 0.0); ctx.x_nodes];
    for p in 0..panels {
        let a = p as f64 * width;
        for (x, w) in gl_x.iter().zip(gl_w.iter()) {
            let tau = a + 0.5 * width * (x + 1.0);
            let q = q_coefficients(ctx, tau);
            for i in 0..ctx.x_nodes {
                let neg = (ctx.x_nodes - i) % ctx.x_nodes;
                profile[i] += 0.5 * width * w * 2.0 * (q.q_star_l[i] + q.q_ll_star[neg]);
            }
        }
    }
    // variance_k = L * k-th Fourier coefficient of the profile
    let length = ctx.model.length;
    let mut predicted = vec![0.0f64; n_modes];
    for (m, slot) in predicted.iter_mut().enumerate() {
        let k = grid.wavenumbers[m];
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, &c) in profile.iter().enumerate() {
            let r = length * i as f64 / ctx.x_nodes as f64;
            acc += c * math::cis(-k * r);
        }
        *slot = length * (acc / ctx.x_nodes as f64).re;
    }
    let max_pred = predicted.iter().fold(0.0f64, |a, &b| a.max(b));
    let significant: Vec<usize> = (0..n_modes)
        .filter(|&m| predicted[m] > 1e-3 * max_pred)
        .collect();

    let mut covariance_rel_err = [0.0f64; 3];
    let mut gaussian_dev = [0.0f64; 3];
    for (e_idx, &eps) in epsilons.iter().enumerate() {
        let noise = crate::model::NoiseModel::new(
            ctx.noise.gamma / eps,
            ctx.noise.sigma_g_sq * eps,
            ctx.noise.sigma_x,
        )
        .expect("scaled noise parameters remain valid");
        let scaled = RateContext::with_resolution(
            ctx.model,
            noise,
            ctx.x_nodes,
            ctx.t_nodes_per_period,
        )?;
        let mut second = vec![0.0f64; n_modes];
        let mut fourth = vec![0.0f64; n_modes];
        let mut amps = vec![Complex64::new(0.0, 0.0); n_modes];
        let omega = scaled.model.omega;
        for traj in 0..n_trajectories {
            amps.fill(Complex64::new(0.0, 0.0));
            let kicks = draw_kicks(&scaled, t, seed.wrapping_add(e_idx as u64), traj);
            for kick in &kicks {
                for m in 0..n_modes {
                    let wk = grid.omega_k[m];
                    let (s, c) = (math::sin(wk * kick.t), math::cos(wk * kick.t));
                    let sum = omega / wk + wk / omega;
                    let diff = omega / wk - wk / omega;
                    let coef_a = Complex64::new(c, -0.5 * sum * s);
                    let coef_b = Complex64::new(0.0, 0.5 * diff * s);
                    amps[m] += grid.f_k[m]
                        * math::cis(grid.wavenumbers[m] * kick.x)
                        * (kick.xi * coef_a.conj() - kick.xi.conj() * coef_b);
                }
            }
            for m in 0..n_modes {
                let sq = amps[m].norm_sqr();
                second[m] += sq;
                fourth[m] += sq * sq;
            }
        }
        let nt = n_trajectories as f64;
        let mut worst_cov = 0.0f64;
        let mut dev_acc = 0.0f64;
        for &m in &significant {
            let emp2 = second[m] / nt;
            let emp4 = fourth[m] / nt;
            worst_cov = worst_cov.max((emp2 - predicted[m]).abs() / predicted[m]);
            dev_acc += (emp4 / (2.0 * emp2 * emp2) - 1.0).abs();
        }
        covariance_rel_err[e_idx] = worst_cov;
        gaussian_dev[e_idx] = dev_acc / significant.len() as f64;
    }
    Ok(DiffusionReport {
        epsilons,
        covariance_rel_err,
        gaussian_dev,
        n_trajectories,
    })
}

/// Convenience: the sampler's own estimate of the heating rate from an
/// ensemble, as `(mean slope, standard error)`.
pub fn ensemble_heating_rate(
    ctx: &RateContext,
    initial: &ClassicalField,
    t_final: f64,
    n_trajectories: u64,
    seed: u64,
) -> QmcEstimate {
    let e0 = field_energy(ctx, initial);
    let mut sum = 0.0f64;
    let mut sum_sq = 0.0f64;
    for traj in 0..n_trajectories {
        let out = sample_trajectory(ctx, initial, t_final, seed, traj);
        let gain = (field_energy(ctx, &out) - e0) / t_final;
        sum += gain;
        sum_sq += gain * gain;
    }
    let n = n_trajectories as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0);
    QmcEstimate {
        value: mean,
        n_points: n_trajectories,
        error_estimate: math::sqrt(var / n),
    }
}
