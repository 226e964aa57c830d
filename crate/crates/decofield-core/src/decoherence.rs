//! The mode-space decoherence rate: the exact spatially averaged Hankel
//! form, its broad-spread approximation, and time-integrated exposures.
//!
//! For a displacement pattern `{eta_k}` the rate is
//!
//! ```text
//! Gamma_t = gamma - (gamma / L) int_0^L dx  g_hat( s_t(x) ),
//! s_t(x)  = 2 | sum_k O+_k f_k e^{ikx} e^{i w_k t} eta_k
//!                  + O-_k f_k e^{-ikx} e^{-i w_k t} eta_k* |,
//! ```
//!
//! with `g_hat` the Hankel transform of the kick distribution. The spatial
//! integrand is smooth and periodic, so a uniform grid converges
//! spectrally; the folded coefficients
//! `C_k(t) = f_k [O+_k eta_k e^{i w_k t} + O-_k eta_{-k}* e^{-i w_k t}]`
//! turn the argument into a single trigonometric sum
//! `s_t(x) = 2 |sum_k C_k e^{ikx}|`.

use crate::math;
use crate::model::{FieldModel, ModeGrid, ModelError, NoiseModel, PhasePoint};
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;
use core::fmt;
use num_complex::Complex64;

/// Modes whose coupling weight falls below this fraction of the largest one
/// are skipped in the hot loops; at double precision they cannot move the
/// spatial average.
const ACTIVE_MODE_CUTOFF: f64 = 1e-14;

const X_CONVERGENCE_TOL: f64 = 1e-6;
const T_CONVERGENCE_TOL: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateError {
    Model(ModelError),
    /// doubling the spatial grid moved the rate by more than 1e-6 gamma
    SpatialQuadrature { delta: f64 },
    /// doubling the time nodes moved the exposure by more than 1e-5 gamma t
    TimeQuadrature { delta: f64 },
    /// context invariants violated (grid sizes, node counts)
    InvalidContext(&'static str),
}

impl fmt::Display for RateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RateError::Model(e) => write!(f, "{e}"),
            RateError::SpatialQuadrature { delta } => {
                write!(f, "spatial quadrature unconverged (delta = {delta:e})")
            }
            RateError::TimeQuadrature { delta } => {
                write!(f, "time quadrature unconverged (delta = {delta:e})")
            }
            RateError::InvalidContext(what) => write!(f, "invalid rate context: {what}"),
        }
    }
}

impl core::error::Error for RateError {}

impl From<ModelError> for RateError {
    fn from(e: ModelError) -> Self {
        RateError::Model(e)
    }
}

#[derive(Debug, Clone, Copy)]
struct ActiveMode {
    /// grid index of the mode carrying eta_k
    idx: usize,
    /// grid index of the -k partner, if inside the truncation
    neg_idx: Option<usize>,
    omega_k: f64,
    weight_plus: f64,
    weight_minus: f64,
}

/// Immutable evaluation context: model, noise, mode grid, quadrature sizes,
/// and precomputed per-mode phase tables. Safe to share across workers.
#[derive(Debug, Clone)]
pub struct RateContext {
    pub model: FieldModel,
    pub noise: NoiseModel,
    pub grid: ModeGrid,
    pub x_nodes: usize,
    pub t_nodes_per_period: usize,
    active: Vec<ActiveMode>,
    /// e^{i k x_i} for each active mode, row-major [active][x_node]
    phase_x: Vec<Complex64>,
    omega_max: f64,
    gl_nodes: Vec<f64>,
    gl_weights: Vec<f64>,
    gl4_nodes: Vec<f64>,
    gl4_weights: Vec<f64>,
}

impl RateContext {
    /// Build a context with the default spatial grid `max(256, 8 n_modes)`
    /// and eight time nodes per shortest mode period.
    pub fn new(model: FieldModel, noise: NoiseModel) -> Result<Self, RateError> {
        let x_nodes = (8 * model.n_modes).max(256);
        Self::with_resolution(model, noise, x_nodes, 8)
    }

    pub fn with_resolution(
        model: FieldModel,
        noise: NoiseModel,
        x_nodes: usize,
        t_nodes_per_period: usize,
    ) -> Result<Self, RateError> {
        if x_nodes < 4 * model.n_modes {
            return Err(RateError::InvalidContext("x_nodes must be >= 4 n_modes"));
        }
        if t_nodes_per_period < 8 {
            return Err(RateError::InvalidContext("t_nodes_per_period must be >= 8"));
        }
        let grid = ModeGrid::new(&model, &noise);
        let weight = |i: usize| grid.f_k[i] * (grid.omega_plus[i] + grid.omega_minus[i].abs());
        let max_weight = (0..grid.len()).map(weight).fold(0.0f64, f64::max);
        let mut active = Vec::new();
        for i in 0..grid.len() {
            if weight(i) >= ACTIVE_MODE_CUTOFF * max_weight {
                active.push(ActiveMode {
                    idx: i,
                    neg_idx: grid.negated_index(i),
                    omega_k: grid.omega_k[i],
                    weight_plus: grid.f_k[i] * grid.omega_plus[i],
                    weight_minus: grid.f_k[i] * grid.omega_minus[i],
                });
            }
        }
        // layout: [x_node][active_mode], contiguous per spatial node
        let mut phase_x = Vec::with_capacity(active.len() * x_nodes);
        for i in 0..x_nodes {
            let x = model.length * i as f64 / x_nodes as f64;
            for mode in &active {
                let k = grid.wavenumbers[mode.idx];
                phase_x.push(math::cis(k * x));
            }
        }
        let omega_max = grid.omega_k.iter().fold(model.omega, |a, &b| a.max(b));
        let (gl_nodes, gl_weights) = math::gauss_legendre(8);
        let (gl4_nodes, gl4_weights) = math::gauss_legendre(4);
        Ok(Self {
            model,
            noise,
            grid,
            x_nodes,
            t_nodes_per_period,
            active,
            phase_x,
            omega_max,
            gl_nodes,
            gl_weights,
            gl4_nodes,
            gl4_weights,
        })
    }

    /// Shortest mode period, `2 pi / omega_max`.
    #[inline]
    pub fn min_period(&self) -> f64 {
        TAU / self.omega_max
    }

    /// Folded coefficients `C_k(t)` for the active modes.
    fn fold_coefficients(&self, point: &PhasePoint, t: f64, out: &mut [Complex64]) {
        debug_assert_eq!(point.len(), self.grid.len());
        debug_assert_eq!(out.len(), self.active.len());
        for (slot, mode) in out.iter_mut().zip(self.active.iter()) {
            let rot = math::cis(mode.omega_k * t);
            let plus = point.eta[mode.idx] * rot * mode.weight_plus;
            let minus = match mode.neg_idx {
                Some(n) => point.eta[n].conj() * rot.conj() * mode.weight_minus,
                None => Complex64::new(0.0, 0.0),
            };
            *slot = plus + minus;
        }
    }

    /// Mean over the spatial grid of `g_hat(s(x))`, with
    /// `g_hat(2|u|) = exp(-2 sigma_g^2 |u|^2)` evaluated from `|u|^2`.
    fn spatial_average(&self, coeffs: &[Complex64]) -> f64 {
        let two_sg2 = 2.0 * self.noise.sigma_g_sq;
        let m = self.active.len();
        let mut acc = 0.0f64;
        for row in self.phase_x.chunks_exact(m) {
            let mut u = Complex64::new(0.0, 0.0);
            for (&c, &ph) in coeffs.iter().zip(row.iter()) {
                u += c * ph;
            }
            acc += math::exp(-two_sg2 * u.norm_sqr());
        }
        acc / self.x_nodes as f64
    }

    /// Same average on a grid of `2 x_nodes` points, phases computed on the
    /// fly; used by the convergence guard.
    fn spatial_average_refined(&self, coeffs: &[Complex64]) -> f64 {
        let two_sg2 = 2.0 * self.noise.sigma_g_sq;
        let n = 2 * self.x_nodes;
        let mut acc = 0.0f64;
        for i in 0..n {
            let x = self.model.length * i as f64 / n as f64;
            let mut u = Complex64::new(0.0, 0.0);
            for (a, mode) in self.active.iter().enumerate() {
                let k = self.grid.wavenumbers[mode.idx];
                u += coeffs[a] * math::cis(k * x);
            }
            acc += math::exp(-two_sg2 * u.norm_sqr());
        }
        acc / n as f64
    }

    #[inline]
    pub(crate) fn n_active(&self) -> usize {
        self.active.len()
    }

    /// Unguarded rate value used by the exposure quadratures. The public
    /// [`gamma_exact`] wraps this with the grid-doubling check.
    pub(crate) fn gamma_unguarded(&self, coeffs: &[Complex64]) -> f64 {
        self.noise.gamma * (1.0 - self.spatial_average(coeffs))
    }

    pub(crate) fn fold_into(&self, point: &PhasePoint, t: f64, coeffs: &mut Vec<Complex64>) {
        coeffs.resize(self.active.len(), Complex64::new(0.0, 0.0));
        self.fold_coefficients(point, t, coeffs);
    }
}

/// The argument of the Hankel transform at one spacetime location,
/// `s_t(x) = 2 |sum_k C_k(t) e^{ikx}|`.
pub fn s_arg(ctx: &RateContext, point: &PhasePoint, t: f64, x: f64) -> f64 {
    let mut coeffs = vec![Complex64::new(0.0, 0.0); ctx.n_active()];
    ctx.fold_coefficients(point, t, &mut coeffs);
    let mut u = Complex64::new(0.0, 0.0);
    for (c, mode) in coeffs.iter().zip(ctx.active.iter()) {
        let k = ctx.grid.wavenumbers[mode.idx];
        u += c * math::cis(k * x);
    }
    2.0 * u.norm()
}

/// Exact decoherence rate `gamma - (gamma/L) int dx g_hat(s_t(x))`.
///
/// Evaluates the spatial average on the context grid and once more on a
/// doubled grid; disagreement beyond `1e-6 gamma` is reported instead of
/// silently returned. The result lies in `[0, gamma]`.
pub fn gamma_exact(ctx: &RateContext, point: &PhasePoint, t: f64) -> Result<f64, RateError> {
    let mut coeffs = vec![Complex64::new(0.0, 0.0); ctx.n_active()];
    ctx.fold_coefficients(point, t, &mut coeffs);
    let coarse = ctx.spatial_average(&coeffs);
    let fine = ctx.spatial_average_refined(&coeffs);
    let delta = ctx.noise.gamma * (coarse - fine).abs();
    if delta > X_CONVERGENCE_TOL * ctx.noise.gamma.max(f64::MIN_POSITIVE) {
        return Err(RateError::SpatialQuadrature { delta });
    }
    Ok(ctx.noise.gamma * (1.0 - coarse))
}

/// Broad-spread limit of the rate: only the zero mode couples, and
/// `Gamma = gamma (1 - exp(-2 L sigma_g^2 |eta_0|^2))`, time-independent.
#[inline]
pub fn gamma_broad(noise: &NoiseModel, model: &FieldModel, eta0: Complex64) -> f64 {
    noise.gamma * (1.0 - math::exp(-2.0 * model.length * noise.sigma_g_sq * eta0.norm_sqr()))
}

/// Internal workspace for exposure quadratures.
#[derive(Debug, Clone, Default)]
pub struct ExposureScratch {
    coeffs: Vec<Complex64>,
}

/// Time-integrated rate `int_0^t Gamma_tau dtau` accumulated on a sorted
/// grid of times sharing all rate evaluations. `times` must be nondecreasing
/// and nonnegative; `out[i]` receives the exposure up to `times[i]`.
pub fn exposure_grid(
    ctx: &RateContext,
    point: &PhasePoint,
    times: &[f64],
    scratch: &mut ExposureScratch,
    out: &mut [f64],
) {
    debug_assert_eq!(times.len(), out.len());
    let mut acc = 0.0f64;
    let mut t_prev = 0.0f64;
    for (slot, &t) in out.iter_mut().zip(times.iter()) {
        debug_assert!(t >= t_prev);
        acc += exposure_segment(ctx, point, t_prev, t, scratch);
        *slot = acc;
        t_prev = t;
    }
}

/// Composite Gauss-Legendre integral of the rate over `[t0, t1]`, sized so
/// every shortest-period oscillation sees at least `t_nodes_per_period`
/// nodes. Segments shorter than half a period use a single 4-point panel,
/// which already exceeds the per-period node contract there.
fn exposure_segment(
    ctx: &RateContext,
    point: &PhasePoint,
    t0: f64,
    t1: f64,
    scratch: &mut ExposureScratch,
) -> f64 {
    if t1 <= t0 {
        return 0.0;
    }
    let periods = (t1 - t0) / ctx.min_period();
    let nodes_wanted = periods * ctx.t_nodes_per_period as f64;
    let (nodes, weights, panels): (&[f64], &[f64], usize) = if nodes_wanted <= 4.0 {
        (&ctx.gl4_nodes, &ctx.gl4_weights, 1)
    } else {
        (
            &ctx.gl_nodes,
            &ctx.gl_weights,
            math::ceil(nodes_wanted / 8.0).max(1.0) as usize,
        )
    };
    let width = (t1 - t0) / panels as f64;
    let mut acc = 0.0f64;
    for p in 0..panels {
        let a = t0 + p as f64 * width;
        for (x, w) in nodes.iter().zip(weights.iter()) {
            let tau = a + 0.5 * width * (x + 1.0);
            ctx.fold_into(point, tau, &mut scratch.coeffs);
            acc += 0.5 * width * w * ctx.gamma_unguarded(&scratch.coeffs);
        }
    }
    acc
}

/// `int_0^t Gamma_tau dtau`, with a node-doubling convergence guard:
/// a shift beyond `1e-5 gamma t` is reported as an error.
pub fn gamma_time_integral(ctx: &RateContext, point: &PhasePoint, t: f64) -> Result<f64, RateError> {
    if t < 0.0 {
        return Err(RateError::InvalidContext("t must be >= 0"));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let mut scratch = ExposureScratch::default();
    let coarse = exposure_segment(ctx, point, 0.0, t, &mut scratch);
    // doubled resolution: two half-segments double the panel count
    let fine = exposure_segment(ctx, point, 0.0, 0.5 * t, &mut scratch)
        + exposure_segment(ctx, point, 0.5 * t, t, &mut scratch);
    let scale = (ctx.noise.gamma * t).max(f64::MIN_POSITIVE);
    let delta = (coarse - fine).abs();
    if delta > T_CONVERGENCE_TOL * scale {
        return Err(RateError::TimeQuadrature { delta });
    }
    Ok(coarse)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CatStateSpec, PhasePoint};

    fn ctx() -> RateContext {
        let model = FieldModel::dimensionless(8, 0.01).unwrap();
        let noise = NoiseModel::new(1.0, 0.32, 1.0).unwrap();
        RateContext::new(model, noise).unwrap()
    }

    fn zero_point(n: usize) -> PhasePoint {
        PhasePoint::new(vec![Complex64::new(0.0, 0.0); n])
    }

    #[test]
    fn zero_point_has_zero_rate_and_exposure() {
        let ctx = ctx();
        let p = zero_point(8);
        assert_eq!(s_arg(&ctx, &p, 0.3, 0.2), 0.0);
        assert!(gamma_exact(&ctx, &p, 0.0).unwrap().abs() < 1e-15);
        assert!(gamma_time_integral(&ctx, &p, 2.5).unwrap().abs() < 1e-12);
    }

    #[test]
    fn huge_displacement_saturates_at_gamma() {
        let ctx = ctx();
        let mut p = zero_point(8);
        p.eta[4] = Complex64::new(1e3, 0.0);
        let g = gamma_exact(&ctx, &p, 0.7).unwrap();
        assert!((g - ctx.noise.gamma).abs() < 1e-6 * ctx.noise.gamma, "{g}");
    }

    #[test]
    fn single_zero_mode_matches_broad_spread() {
        // at sigma_x/L = 1 only the zero mode (and its 1e-9 neighbors) couple
        let ctx = ctx();
        let mut p = zero_point(8);
        p.eta[4] = Complex64::new(0.8, -0.4);
        let exact = gamma_exact(&ctx, &p, 1.3).unwrap();
        let broad = gamma_broad(&ctx.noise, &ctx.model, p.eta[4]);
        assert!((exact - broad).abs() < 1e-6, "{exact} vs {broad}");
        let _ = CatStateSpec::new(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)).unwrap();
    }

    #[test]
    fn exposure_matches_time_independent_rate() {
        let ctx = ctx();
        let mut p = zero_point(8);
        p.eta[4] = Complex64::new(0.5, 0.2);
        let g = gamma_exact(&ctx, &p, 0.0).unwrap();
        let t = 3.7;
        let x = gamma_time_integral(&ctx, &p, t).unwrap();
        assert!((x - g * t).abs() < 1e-8 * g * t, "{x} vs {}", g * t);
    }
}
