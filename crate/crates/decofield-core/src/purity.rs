//! Purity decay of a bipartite coherent superposition in the zero mode:
//! quasi-Monte Carlo estimates over the full mode phase space, closed-form
//! and asymptotic expressions, and low-dimensional quadrature references.
//!
//! The functional measure is `prod_k d^2 eta_k / pi`, fixed by requiring
//! `p = 1` for pure states. The QMC path absorbs every vacuum Gaussian into
//! the point mapping; the zero mode is importance-sampled from a three-center
//! Gaussian mixture at `{0, +(alpha-beta), -(alpha-beta)}` so that the
//! coherence lobes of `|chi|^2` are represented no matter how far the
//! superposed amplitudes sit apart. The leftover integrand is bounded by
//! `16 N^4`.

use crate::decoherence::{ExposureScratch, RateContext};
use crate::math;
use crate::model::{
    cat_char_fn_unchecked, CatStateSpec, FieldModel, ModelError, NoiseModel, PhasePoint,
};
use crate::qmc::{self, FaureConfig, MultiIntegrand, QmcEstimate, QmcError};
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};
use core::fmt;
use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq)]
pub enum PurityError {
    Model(ModelError),
    Rate(crate::decoherence::RateError),
    Qmc(QmcError),
    /// 2D quadrature failed to reach its absolute tolerance
    Quadrature { delta: f64 },
    /// times must be finite, nonnegative, and nondecreasing
    BadTimes,
}

impl fmt::Display for PurityError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PurityError::Model(e) => write!(f, "{e}"),
            PurityError::Rate(e) => write!(f, "{e}"),
            PurityError::Qmc(e) => write!(f, "{e}"),
            PurityError::Quadrature { delta } => {
                write!(f, "2D quadrature unconverged (delta = {delta:e})")
            }
            PurityError::BadTimes => write!(f, "times must be nonnegative and nondecreasing"),
        }
    }
}

impl core::error::Error for PurityError {}

impl From<ModelError> for PurityError {
    fn from(e: ModelError) -> Self {
        PurityError::Model(e)
    }
}
impl From<crate::decoherence::RateError> for PurityError {
    fn from(e: crate::decoherence::RateError) -> Self {
        PurityError::Rate(e)
    }
}
impl From<QmcError> for PurityError {
    fn from(e: QmcError) -> Self {
        PurityError::Qmc(e)
    }
}

fn eq18_kernel(d2: f64, im: f64, m_sq: f64, norm_sq: f64) -> f64 {
    let c = 1.0 + m_sq;
    let bracket = 1.0
        + math::exp(-d2 / c)
        + 4.0 * math::exp(-0.5 * d2) * math::cos(im)
        + math::exp(-d2 * m_sq / c)
        + math::exp(-d2) * math::cos(2.0 * im);
    2.0 * norm_sq * norm_sq / c * bracket
}

/// Exact Gaussian-weighted purity integral
/// `int (d^2 eta / pi) |chi(eta)|^2 exp(-m^2 |eta|^2)` in closed form.
///
/// This is the building block behind both the narrow-kick purity formula
/// and the analytic initial decay rate; it uses the physical normalization
/// `N^2 = 1/(2 + 2 e^{-d^2/2} cos(Im alpha beta*))` and agrees with direct
/// quadrature to machine precision for any amplitudes.
pub fn gaussian_weighted_purity(state: &CatStateSpec, m_sq: f64) -> f64 {
    let d2 = state.separation().norm_sqr();
    let im = (state.alpha * state.beta.conj()).im;
    eq18_kernel(d2, im, m_sq, state.norm_sq())
}

/// Closed-form narrow-kick purity with `m_sq = 4 gamma t sigma_g^2 L`.
///
/// Evaluated verbatim, including its published normalization whose
/// interference cosine carries a doubled phase, `cos(2 Im alpha beta*)`.
/// For `Im(alpha beta*) = 0` — every benchmarked configuration — this
/// coincides with [`gaussian_weighted_purity`]. For `Im(alpha beta*) != 0`
/// the doubled phase makes the expression inconsistent with the physical
/// normalization (it does not even return 1 at `m_sq = 0`); prefer the
/// physical variant there.
pub fn purity_analytic_narrow(state: &CatStateSpec, m_sq: f64) -> f64 {
    let d2 = state.separation().norm_sqr();
    let im = (state.alpha * state.beta.conj()).im;
    let norm_verbatim = 1.0 / (2.0 + 2.0 * math::exp(-0.5 * d2) * math::cos(2.0 * im));
    eq18_kernel(d2, im, m_sq, norm_verbatim)
}

/// Long-time purity asymptote `1 / (4 gamma t L sigma_g^2)`.
pub fn purity_longtime_asymptote(noise: &NoiseModel, model: &FieldModel, t: f64) -> f64 {
    debug_assert!(noise.gamma * t > 0.0);
    1.0 / (4.0 * noise.gamma * t * model.length * noise.sigma_g_sq)
}

/// Exact broad-spread purity as a Poisson-weighted sum of Gaussian-weighted
/// purities:
/// `p(t) = e^{-2 gamma t} sum_n (2 gamma t)^n / n!  E(2 n sigma_g^2 L)`.
///
/// This is an algebraic route to the same quantity as [`purity_oracle_2d`];
/// keeping both lets each validate the other.
pub fn purity_broad_exact(
    state: &CatStateSpec,
    noise: &NoiseModel,
    model: &FieldModel,
    t: f64,
) -> f64 {
    let lambda = 2.0 * noise.gamma * t;
    if lambda == 0.0 {
        return 1.0;
    }
    let m_step = 2.0 * noise.sigma_g_sq * model.length;
    // Poisson weights accumulated outward from the bulk of the distribution
    // so the sum stays well-scaled for any lambda.
    let center = lambda as u64;
    let span = (12.0 * math::sqrt(lambda) + 30.0) as u64;
    let lo = center.saturating_sub(span);
    let hi = center + span;
    let mut upper = Vec::with_capacity((hi - center + 1) as usize);
    let mut w = 1.0f64;
    upper.push(w);
    for n in (center + 1)..=hi {
        w *= lambda / n as f64;
        upper.push(w);
    }
    let mut lower = Vec::new();
    let mut w = 1.0f64;
    for n in (lo..center).rev() {
        w *= (n + 1) as f64 / lambda;
        lower.push(w);
    }
    let mut total_w = 0.0;
    let mut total = 0.0;
    for (i, &wi) in lower.iter().rev().chain(upper.iter()).enumerate() {
        let n = lo + i as u64;
        total_w += wi;
        total += wi * gaussian_weighted_purity(state, n as f64 * m_step);
    }
    total / total_w
}

/// Maximum initial purity decay rate, `gamma (2 - 1/(1 + 2 sigma_g^2 L))`,
/// approached for widely separated superpositions.
pub fn r_max(noise: &NoiseModel, model: &FieldModel) -> f64 {
    noise.gamma * (2.0 - 1.0 / (1.0 + 2.0 * noise.sigma_g_sq * model.length))
}

/// Analytic initial purity decay rate in the broad-spread regime:
/// `R0 = 2 gamma [1 - E(2 sigma_g^2 L)]` with `E` the exact
/// Gaussian-weighted purity integral.
///
/// The physical normalization is used throughout; the doubled-phase variant
/// produces negative rates for `Im(alpha beta*) != 0` and is not offered.
pub fn initial_rate_analytic(state: &CatStateSpec, noise: &NoiseModel, model: &FieldModel) -> f64 {
    let m_sq = 2.0 * noise.sigma_g_sq * model.length;
    2.0 * noise.gamma * (1.0 - gaussian_weighted_purity(state, m_sq))
}

// ---------------------------------------------------------------------------
// zero-mode importance mixture
// ---------------------------------------------------------------------------

/// Gaussian mixture for the zero mode: unit-width components at the origin
/// and at the two coherence lobes `±(alpha - beta)`, plus a narrow
/// component at the origin matched to the width of the late-time surviving
/// peak (`1/sqrt(1 + m^2)` for the largest exposure exponent in play).
/// Without the narrow component the half-set error estimate degenerates
/// once the peak gets thinner than the point spacing.
#[derive(Debug, Clone, Copy)]
struct Mixture {
    centers: [Complex64; 4],
    scales: [f64; 4],
    weights: [f64; 4],
}

impl Mixture {
    fn for_state(state: &CatStateSpec, peak_m_sq: f64) -> Self {
        let d = state.separation();
        let narrow = 1.0 / math::sqrt(1.0 + peak_m_sq.max(0.0));
        Self {
            centers: [Complex64::new(0.0, 0.0), d, -d, Complex64::new(0.0, 0.0)],
            scales: [1.0, 1.0, 1.0, narrow],
            weights: [0.4, 0.2, 0.2, 0.2],
        }
    }

    /// `pi q(eta) e^{-m*}` together with the dominant exponent
    /// `m* = max_j (-|eta - c_j|^2 / s_j^2)`, factored so the ratio below
    /// never degenerates to 0/0.
    fn density_scaled(&self, eta: Complex64) -> (f64, f64) {
        let mut expos = [0.0f64; 4];
        let mut m = f64::NEG_INFINITY;
        for j in 0..4 {
            let e = -(eta - self.centers[j]).norm_sqr() / (self.scales[j] * self.scales[j]);
            expos[j] = e;
            m = m.max(e);
        }
        let mut q = 0.0;
        for j in 0..4 {
            q += self.weights[j] / (self.scales[j] * self.scales[j]) * math::exp(expos[j] - m);
        }
        (q, m)
    }

    /// `|chi(eta)|^2 / (pi q(eta))`, with the dominant exponent cancelled
    /// analytically. Bounded: the unit-width components alone give
    /// `q >= 0.8^{-1}`-scaled cover of every lobe of `|chi|^2`, so the
    /// ratio never exceeds `20 N^4`.
    fn char_sq_over_density(&self, state: &CatStateSpec, eta: Complex64) -> f64 {
        let (q, m) = self.density_scaled(eta);
        let amps = [state.alpha, state.beta];
        let half_eta2 = 0.5 * eta.norm_sqr();
        let mut total = Complex64::new(0.0, 0.0);
        for &a in &amps {
            for &b in &amps {
                let mut expo = a.conj() * b + a.conj() * eta - eta.conj() * b
                    - Complex64::new(half_eta2 + 0.5 * a.norm_sqr() + 0.5 * b.norm_sqr(), 0.0);
                // Re(expo) = -|eta - (a-b)|^2 / 2 <= m*/2: the unit-scale
                // components sit exactly at the lobe centers, and the
                // narrow component never dominates m*
                expo.re -= 0.5 * m;
                total += expo.exp();
            }
        }
        let n2 = state.norm_sq();
        (n2 * n2) * total.norm_sqr() / q
    }
}

// ---------------------------------------------------------------------------
// QMC integrands
// ---------------------------------------------------------------------------

/// Integrand of the purity curve: one output per requested time, all times
/// sharing the rate evaluations of a common point set.
pub struct PurityCurveIntegrand<'a> {
    ctx: &'a RateContext,
    state: CatStateSpec,
    mixture: Mixture,
    times: &'a [f64],
    zero_mode: usize,
}

pub struct PurityScratch {
    shifted: PhasePoint,
    exposures: Vec<f64>,
    expo: ExposureScratch,
}

impl<'a> PurityCurveIntegrand<'a> {
    pub fn new(
        ctx: &'a RateContext,
        state: CatStateSpec,
        times: &'a [f64],
    ) -> Result<Self, PurityError> {
        validate_times(times)?;
        let t_max = times.last().copied().unwrap_or(0.0);
        let peak_m_sq =
            4.0 * ctx.noise.gamma * t_max * ctx.noise.sigma_g_sq * ctx.model.length;
        Ok(Self {
            ctx,
            state,
            mixture: Mixture::for_state(&state, peak_m_sq),
            times,
            zero_mode: ctx.grid.zero_mode(),
        })
    }
}

fn validate_times(times: &[f64]) -> Result<(), PurityError> {
    if times.is_empty() {
        return Err(PurityError::BadTimes);
    }
    let mut prev = 0.0f64;
    for &t in times {
        if !t.is_finite() || t < prev {
            return Err(PurityError::BadTimes);
        }
        prev = t;
    }
    Ok(())
}

impl MultiIntegrand for PurityCurveIntegrand<'_> {
    type Scratch = PurityScratch;

    fn n_outputs(&self) -> usize {
        self.times.len()
    }

    fn new_scratch(&self) -> PurityScratch {
        PurityScratch {
            shifted: PhasePoint::new(vec![Complex64::new(0.0, 0.0); self.ctx.grid.len()]),
            exposures: vec![0.0; self.times.len()],
            expo: ExposureScratch::default(),
        }
    }

    fn eval(&self, point: &PhasePoint, scratch: &mut PurityScratch, out: &mut [f64]) {
        out.fill(0.0);
        for ((w, c), s) in self
            .mixture
            .weights
            .iter()
            .zip(self.mixture.centers.iter())
            .zip(self.mixture.scales.iter())
        {
            scratch.shifted.eta.copy_from_slice(&point.eta);
            scratch.shifted.eta[self.zero_mode] =
                c + s * point.eta[self.zero_mode];
            let rho = self
                .mixture
                .char_sq_over_density(&self.state, scratch.shifted.eta[self.zero_mode]);
            crate::decoherence::exposure_grid(
                self.ctx,
                &scratch.shifted,
                self.times,
                &mut scratch.expo,
                &mut scratch.exposures,
            );
            for (o, &x) in out.iter_mut().zip(scratch.exposures.iter()) {
                *o += w * rho * math::exp(-2.0 * x);
            }
        }
    }
}

/// Integrand of the initial decay rate, `2 Gamma_0` under the same measure.
pub struct InitialRateIntegrand<'a> {
    ctx: &'a RateContext,
    state: CatStateSpec,
    mixture: Mixture,
    zero_mode: usize,
}

pub struct RateScratch {
    shifted: PhasePoint,
    coeffs: Vec<Complex64>,
}

impl<'a> InitialRateIntegrand<'a> {
    pub fn new(ctx: &'a RateContext, state: CatStateSpec) -> Self {
        let peak_m_sq = 2.0 * ctx.noise.sigma_g_sq * ctx.model.length;
        Self {
            ctx,
            state,
            mixture: Mixture::for_state(&state, peak_m_sq),
            zero_mode: ctx.grid.zero_mode(),
        }
    }
}

impl MultiIntegrand for InitialRateIntegrand<'_> {
    type Scratch = RateScratch;

    fn n_outputs(&self) -> usize {
        1
    }

    fn new_scratch(&self) -> RateScratch {
        RateScratch {
            shifted: PhasePoint::new(vec![Complex64::new(0.0, 0.0); self.ctx.grid.len()]),
            coeffs: Vec::new(),
        }
    }

    fn eval(&self, point: &PhasePoint, scratch: &mut RateScratch, out: &mut [f64]) {
        let mut acc = 0.0;
        for ((w, c), s) in self
            .mixture
            .weights
            .iter()
            .zip(self.mixture.centers.iter())
            .zip(self.mixture.scales.iter())
        {
            scratch.shifted.eta.copy_from_slice(&point.eta);
            scratch.shifted.eta[self.zero_mode] =
                c + s * point.eta[self.zero_mode];
            let rho = self
                .mixture
                .char_sq_over_density(&self.state, scratch.shifted.eta[self.zero_mode]);
            self.ctx
                .fold_into(&scratch.shifted, 0.0, &mut scratch.coeffs);
            let gamma0 = self.ctx.gamma_unguarded(&scratch.coeffs);
            acc += w * rho * 2.0 * gamma0;
        }
        out[0] = acc;
    }
}

/// QMC purity estimates at every requested time (sorted ascending), sharing
/// one point set across the whole curve.
pub fn purity_curve_qmc(
    state: &CatStateSpec,
    ctx: &RateContext,
    cfg: &FaureConfig,
    times: &[f64],
    n_points: u64,
) -> Result<Vec<QmcEstimate>, PurityError> {
    let integrand = PurityCurveIntegrand::new(ctx, *state, times)?;
    Ok(qmc::integrate_many(&integrand, cfg, n_points)?)
}

/// QMC purity estimate at a single time.
pub fn purity_qmc(
    state: &CatStateSpec,
    ctx: &RateContext,
    cfg: &FaureConfig,
    t: f64,
    n_points: u64,
) -> Result<QmcEstimate, PurityError> {
    Ok(purity_curve_qmc(state, ctx, cfg, &[t], n_points)?[0])
}

/// QMC estimate of the initial purity decay rate.
pub fn initial_rate_qmc(
    state: &CatStateSpec,
    ctx: &RateContext,
    cfg: &FaureConfig,
    n_points: u64,
) -> Result<QmcEstimate, PurityError> {
    let integrand = InitialRateIntegrand::new(ctx, *state);
    Ok(qmc::integrate_many(&integrand, cfg, n_points)?[0])
}

// ---------------------------------------------------------------------------
// 2D quadrature oracles (broad-spread reduction)
// ---------------------------------------------------------------------------

fn char_sq(state: &CatStateSpec, eta: Complex64) -> f64 {
    cat_char_fn_unchecked(state, eta).norm_sqr()
}

/// Polar integral `int_0^R dr r int dphi f(r e^{i phi}) / pi` with composite
/// Gauss-Legendre panels radially and a trapezoid rule (spectral for smooth
/// periodic integrands) in the angle.
fn polar_integral<F: Fn(Complex64) -> f64>(
    f: &F,
    radius: f64,
    radial_panels: usize,
    n_phi: usize,
    gl: (&[f64], &[f64]),
) -> f64 {
    let (nodes, weights) = gl;
    let width = radius / radial_panels as f64;
    let mut total = 0.0;
    for p in 0..radial_panels {
        let a = p as f64 * width;
        for (x, w) in nodes.iter().zip(weights.iter()) {
            let r = a + 0.5 * width * (x + 1.0);
            let mut ang = 0.0;
            for i in 0..n_phi {
                let phi = TAU * i as f64 / n_phi as f64;
                ang += f(Complex64::from_polar(r, phi));
            }
            total += 0.5 * width * w * r * ang * TAU / n_phi as f64;
        }
    }
    total / PI
}

/// Broad-spread purity by direct 2D quadrature over the zero-mode plane.
///
/// The unitary-floor split `p = e^{-2 gamma t} + int |chi|^2 (W - e^{-2 gamma t})`
/// confines the quadrature to the disk where the rate deviates from gamma,
/// which keeps the absolute target of 1e-6 reachable even when the
/// surviving purity is itself ~1e-4. Convergence is verified by doubling
/// both quadrature directions.
pub fn purity_oracle_2d(
    state: &CatStateSpec,
    noise: &NoiseModel,
    model: &FieldModel,
    t: f64,
) -> Result<f64, PurityError> {
    let lambda = 2.0 * noise.gamma * t;
    if lambda < 1e-14 {
        return Ok(1.0);
    }
    let m_tilde = 2.0 * noise.sigma_g_sq * model.length;
    let base = math::exp(-lambda);
    // the integrand needs both the rate to deviate from gamma and |chi|^2
    // to carry weight; the disk only has to cover the smaller support
    let rate_radius = math::sqrt(math::ln(lambda * 1e14).max(1.0) / m_tilde);
    let chi_radius = (state.alpha.norm() + state.beta.norm() + 6.5).max(8.0);
    let radius = rate_radius.min(chi_radius);
    let f = |eta: Complex64| {
        let w = math::exp(-lambda * (1.0 - math::exp(-m_tilde * eta.norm_sqr())));
        char_sq(state, eta) * (w - base)
    };
    let peak_width = 1.0 / math::sqrt(m_tilde * (1.0 + lambda));
    let panels = (math::ceil(radius / (0.25f64).min(peak_width)) as usize).max(8);
    let span = state.alpha.norm() + state.beta.norm();
    let n_phi = 64.max(((2.0 * span * radius) as usize).next_power_of_two());
    let gl = math::gauss_legendre(16);
    let coarse = polar_integral(&f, radius, panels, n_phi, (&gl.0, &gl.1));
    let fine = polar_integral(&f, radius, 2 * panels, 2 * n_phi, (&gl.0, &gl.1));
    let delta = (coarse - fine).abs();
    if delta > 5e-7 {
        return Err(PurityError::Quadrature { delta });
    }
    Ok(base + fine)
}

/// Broad-spread initial decay rate by direct 2D quadrature,
/// `R0 = 2 gamma [1 - int (d^2 eta / pi) |chi|^2 e^{-2 sigma_g^2 L |eta|^2}]`.
pub fn initial_rate_oracle_2d(
    state: &CatStateSpec,
    noise: &NoiseModel,
    model: &FieldModel,
) -> Result<f64, PurityError> {
    let m_tilde = 2.0 * noise.sigma_g_sq * model.length;
    let radius = (state.alpha.norm() + state.beta.norm() + 6.0).max(8.0);
    let f = |eta: Complex64| char_sq(state, eta) * math::exp(-m_tilde * eta.norm_sqr());
    let span = state.alpha.norm() + state.beta.norm();
    let panels = (4.0 * radius) as usize;
    let n_phi = 64.max(((2.0 * span * radius) as usize).next_power_of_two());
    let gl = math::gauss_legendre(16);
    let coarse = polar_integral(&f, radius, panels, n_phi, (&gl.0, &gl.1));
    let fine = polar_integral(&f, radius, 2 * panels, 2 * n_phi, (&gl.0, &gl.1));
    let delta = (coarse - fine).abs();
    if delta > 5e-7 {
        return Err(PurityError::Quadrature { delta });
    }
    Ok(2.0 * noise.gamma * (1.0 - fine))
}

/// True when the estimates are nonincreasing within `k` times the combined
/// half-set error bars of each adjacent pair.
pub fn nonincreasing_within(estimates: &[QmcEstimate], k: f64) -> bool {
    estimates.windows(2).all(|pair| {
        pair[1].value <= pair[0].value + k * (pair[0].error_estimate + pair[1].error_estimate)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cat(re: f64, im: f64) -> CatStateSpec {
        let a = Complex64::new(re, im);
        CatStateSpec::new(a, -a).unwrap()
    }

    #[test]
    fn narrow_formula_is_one_at_zero_exposure() {
        for state in [cat(2.0, 2.0), cat(0.3, 0.0), cat(0.0, 0.0)] {
            let p = purity_analytic_narrow(&state, 0.0);
            assert!((p - 1.0).abs() < 1e-12, "{p}");
        }
    }

    #[test]
    fn narrow_formula_long_time_tail() {
        // m^2 -> inf, d >> 1: p -> 1/m^2
        let state = cat(2.0, 2.0);
        let m_sq = 1e6;
        let p = purity_analytic_narrow(&state, m_sq);
        assert!((p * m_sq - 1.0).abs() < 1e-4, "{}", p * m_sq);
    }

    #[test]
    fn r_max_values() {
        let model = FieldModel::dimensionless(32, 0.01).unwrap();
        let n1 = NoiseModel::new(1.0, 0.08, 1.0).unwrap();
        assert!((r_max(&n1, &model) - (2.0 - 1.0 / 1.16)).abs() < 1e-14);
        let n2 = NoiseModel::new(2.0, 1e9, 1.0).unwrap();
        assert!((r_max(&n2, &model) / n2.gamma - 2.0).abs() < 1e-8);
        let n3 = NoiseModel::new(1.0, 1e-12, 1.0).unwrap();
        assert!((r_max(&n3, &model) - n3.gamma).abs() < 1e-10);
    }

    #[test]
    fn oracle_unitary_limits() {
        let model = FieldModel::dimensionless(32, 0.01).unwrap();
        let state = cat(2.0, 2.0);
        let free = NoiseModel::new(0.0, 0.32, 1.0).unwrap();
        assert_eq!(purity_oracle_2d(&state, &free, &model, 5.0).unwrap(), 1.0);
        let noise = NoiseModel::new(1.0, 0.32, 1.0).unwrap();
        assert_eq!(purity_oracle_2d(&state, &noise, &model, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn longtime_asymptote_scaling() {
        let model = FieldModel::dimensionless(32, 0.01).unwrap();
        let noise = NoiseModel::new(1.0, 32.0, 1.0).unwrap();
        let p10 = purity_longtime_asymptote(&noise, &model, 10.0);
        let p20 = purity_longtime_asymptote(&noise, &model, 20.0);
        assert!((p10 - 1.0 / 1280.0).abs() < 1e-15);
        assert!((p10 / p20 - 2.0).abs() < 1e-12);
    }
}
