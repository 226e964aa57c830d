//! Physical parameters and mode machinery: dispersion, Bogoliubov-style
//! mode coefficients, theta-normalized spread coefficients, the Gaussian
//! kick distribution, and the characteristic function of a two-component
//! coherent superposition in the ground mode.
//!
//! All quantities carry whatever consistent unit system the caller picks;
//! the CLI uses `hbar = omega = L = 1` and feeds the dimensionless ratios
//! `gamma/omega`, `sigma_g^2 L`, `sigma_x/L`, `v/(L omega)`.

use crate::math;
use crate::specfun;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};
use core::fmt;
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelError {
    /// a constructor argument was NaN or infinite
    NonFinite(&'static str),
    /// a constructor argument violated its sign/size constraint
    OutOfRange(&'static str),
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::NonFinite(what) => write!(f, "non-finite parameter: {what}"),
            ModelError::OutOfRange(what) => write!(f, "parameter out of range: {what}"),
        }
    }
}

impl core::error::Error for ModelError {}

fn check_finite(x: f64, what: &'static str) -> Result<(), ModelError> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(ModelError::NonFinite(what))
    }
}

/// Harmonic-field parameters: mass density, gap frequency, propagation
/// speed, periodic box length, Planck constant, and the mode truncation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldModel {
    pub mass_density: f64,
    pub omega: f64,
    pub speed: f64,
    pub length: f64,
    pub hbar: f64,
    pub n_modes: usize,
}

impl FieldModel {
    pub fn new(
        mass_density: f64,
        omega: f64,
        speed: f64,
        length: f64,
        hbar: f64,
        n_modes: usize,
    ) -> Result<Self, ModelError> {
        check_finite(mass_density, "mass_density")?;
        check_finite(omega, "omega")?;
        check_finite(speed, "speed")?;
        check_finite(length, "length")?;
        check_finite(hbar, "hbar")?;
        if mass_density <= 0.0 {
            return Err(ModelError::OutOfRange("mass_density must be > 0"));
        }
        if omega <= 0.0 {
            return Err(ModelError::OutOfRange("omega must be > 0"));
        }
        if speed < 0.0 {
            return Err(ModelError::OutOfRange("speed must be >= 0"));
        }
        if length <= 0.0 {
            return Err(ModelError::OutOfRange("length must be > 0"));
        }
        if hbar <= 0.0 {
            return Err(ModelError::OutOfRange("hbar must be > 0"));
        }
        if n_modes < 2 || n_modes % 2 != 0 {
            return Err(ModelError::OutOfRange("n_modes must be even and >= 2"));
        }
        Ok(Self {
            mass_density,
            omega,
            speed,
            length,
            hbar,
            n_modes,
        })
    }

    /// Dimensionless convention: `hbar = omega = L = mu = 1`, with the speed
    /// given as the ratio `v / (L omega)`.
    pub fn dimensionless(n_modes: usize, v_over_l_omega: f64) -> Result<Self, ModelError> {
        Self::new(1.0, 1.0, v_over_l_omega, 1.0, 1.0, n_modes)
    }

    /// Wavenumber of mode index `j` (signed), `k_j = 2 pi j / L`.
    #[inline]
    pub fn wavenumber(&self, j: i64) -> f64 {
        TAU * j as f64 / self.length
    }

    /// Signed mode indices `j = -n/2, ..., n/2 - 1` in grid order.
    pub fn mode_indices(&self) -> impl Iterator<Item = i64> {
        let half = self.n_modes as i64 / 2;
        -half..half
    }
}

/// Decoherence parameters: event rate, kick variance per quadrature, and the
/// spatial resolution of the generalized measurement, together with the
/// functional form choices (isotropic Gaussian kick, theta-normalized
/// Gaussian spread; the enums are extension points).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub gamma: f64,
    /// Per-quadrature variance of the kick distribution: `<|xi|^2> = 2 sigma_g^2`.
    pub sigma_g_sq: f64,
    pub sigma_x: f64,
    pub kick: KickDistribution,
    pub spread: SpreadFunction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KickDistribution {
    #[default]
    GaussianIsotropic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpreadFunction {
    #[default]
    ThetaNormalizedGaussian,
}

impl NoiseModel {
    pub fn new(gamma: f64, sigma_g_sq: f64, sigma_x: f64) -> Result<Self, ModelError> {
        check_finite(gamma, "gamma")?;
        check_finite(sigma_g_sq, "sigma_g_sq")?;
        check_finite(sigma_x, "sigma_x")?;
        if gamma < 0.0 {
            return Err(ModelError::OutOfRange("gamma must be >= 0"));
        }
        if sigma_g_sq <= 0.0 {
            return Err(ModelError::OutOfRange("sigma_g_sq must be > 0"));
        }
        if sigma_x <= 0.0 {
            return Err(ModelError::OutOfRange("sigma_x must be > 0"));
        }
        Ok(Self {
            gamma,
            sigma_g_sq,
            sigma_x,
            kick: KickDistribution::GaussianIsotropic,
            spread: SpreadFunction::ThetaNormalizedGaussian,
        })
    }
}

/// Mode frequency `omega_k = sqrt(omega^2 + v^2 k^2)`.
#[inline]
pub fn dispersion(model: &FieldModel, k: f64) -> f64 {
    math::sqrt(model.omega * model.omega + model.speed * model.speed * k * k)
}

/// The pair `(Omega_k^+, Omega_k^-)` with
/// `Omega_k^± = [(omega/omega_k)^{1/2} ± (omega_k/omega)^{1/2}] / 2`.
///
/// Satisfies `(Omega^+)^2 - (Omega^-)^2 = 1` exactly.
#[inline]
pub fn mode_coefficients(model: &FieldModel, k: f64) -> (f64, f64) {
    let r = math::sqrt(model.omega / dispersion(model, k));
    (0.5 * (r + 1.0 / r), 0.5 * (r - 1.0 / r))
}

/// Fourier coefficient of the theta-normalized Gaussian spread,
/// `f_k = sqrt(L) exp(-sigma_x^2 k^2 / 2) / theta_3(0, exp(-2 pi^2 sigma_x^2 / L^2))`.
///
/// Real, strictly positive, and even in `k`; the theta factor normalizes the
/// periodized spread profile to unit maximum.
pub fn spread_coefficient(model: &FieldModel, noise: &NoiseModel, k: f64) -> f64 {
    let sx = noise.sigma_x;
    let q = math::exp(-2.0 * PI * PI * sx * sx / (model.length * model.length));
    let theta = specfun::jacobi_theta3(q).expect("nome < 1 for sigma_x > 0");
    math::sqrt(model.length) * math::exp(-0.5 * sx * sx * k * k) / theta
}

/// Probability density of the isotropic Gaussian kick,
/// `g(xi) = exp(-|xi|^2 / 2 sigma_g^2) / (2 pi sigma_g^2)`.
#[inline]
pub fn kick_pdf(noise: &NoiseModel, xi: Complex64) -> f64 {
    let s2 = noise.sigma_g_sq;
    math::exp(-0.5 * xi.norm_sqr() / s2) / (TAU * s2)
}

/// Truncated wavenumber set with per-mode frequencies, mode coefficients,
/// and spread coefficients, in grid order `j = -n/2, ..., n/2 - 1`.
///
/// The asymmetry of the DFT-style index range is harmless: the spread
/// coefficients suppress the edge modes symmetrically, so the missing
/// `+n/2` partner never carries weight in any converged configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeGrid {
    pub wavenumbers: Vec<f64>,
    pub omega_k: Vec<f64>,
    pub omega_plus: Vec<f64>,
    pub omega_minus: Vec<f64>,
    pub f_k: Vec<f64>,
}

impl ModeGrid {
    pub fn new(model: &FieldModel, noise: &NoiseModel) -> Self {
        let n = model.n_modes;
        let mut wavenumbers = Vec::with_capacity(n);
        let mut omega_k = Vec::with_capacity(n);
        let mut omega_plus = Vec::with_capacity(n);
        let mut omega_minus = Vec::with_capacity(n);
        let mut f_k = Vec::with_capacity(n);
        for j in model.mode_indices() {
            let k = model.wavenumber(j);
            let (op, om) = mode_coefficients(model, k);
            wavenumbers.push(k);
            omega_k.push(dispersion(model, k));
            omega_plus.push(op);
            omega_minus.push(om);
            f_k.push(spread_coefficient(model, noise, k));
        }
        Self {
            wavenumbers,
            omega_k,
            omega_plus,
            omega_minus,
            f_k,
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.wavenumbers.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.wavenumbers.is_empty()
    }

    /// Grid index of the zero mode (`j = 0`).
    #[inline]
    pub fn zero_mode(&self) -> usize {
        self.len() / 2
    }

    /// Grid index of mode `-j` for the mode at `idx`, if it is in range.
    /// The edge mode `j = -n/2` has no truncated partner.
    #[inline]
    pub fn negated_index(&self, idx: usize) -> Option<usize> {
        let half = self.len() / 2;
        let j = idx as i64 - half as i64;
        let neg = -j + half as i64;
        if (0..self.len() as i64).contains(&neg) {
            Some(neg as usize)
        } else {
            None
        }
    }
}

/// Superposition of two coherent amplitudes in the zero mode over vacuum in
/// every other mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatStateSpec {
    pub alpha: Complex64,
    pub beta: Complex64,
}

impl CatStateSpec {
    pub fn new(alpha: Complex64, beta: Complex64) -> Result<Self, ModelError> {
        if !(alpha.re.is_finite() && alpha.im.is_finite()) {
            return Err(ModelError::NonFinite("alpha"));
        }
        if !(beta.re.is_finite() && beta.im.is_finite()) {
            return Err(ModelError::NonFinite("beta"));
        }
        Ok(Self { alpha, beta })
    }

    #[inline]
    pub fn separation(&self) -> Complex64 {
        self.alpha - self.beta
    }

    /// Squared normalization constant of the state,
    /// `N^2 = 1 / (2 + 2 exp(-|alpha-beta|^2 / 2) cos(Im alpha beta*))`,
    /// fixed by `chi(0) = 1`. Strictly positive and finite for any finite
    /// amplitudes since the interference term has modulus < 1 unless
    /// `alpha = beta`, where the expression is still positive.
    pub fn norm_sq(&self) -> f64 {
        let d2 = self.separation().norm_sqr();
        let im = (self.alpha * self.beta.conj()).im;
        1.0 / (2.0 + 2.0 * math::exp(-0.5 * d2) * math::cos(im))
    }
}

/// Characteristic function of the normalized cat state in its own mode,
/// `chi(eta) = N^2 sum_{a,b in {alpha,beta}} <a|D(eta)|b>` with
/// `<a|D(eta)|b> = exp(-|eta|^2/2 - |a|^2/2 - |b|^2/2 + a* b + a* eta - eta* b)`.
///
/// `chi(0) = 1`; vacuum factors `exp(-|eta_k|^2 / 2)` for the other modes
/// are the caller's business.
pub fn cat_char_fn(spec: &CatStateSpec, eta: Complex64) -> Result<Complex64, ModelError> {
    if !(eta.re.is_finite() && eta.im.is_finite()) {
        return Err(ModelError::NonFinite("eta"));
    }
    Ok(cat_char_fn_unchecked(spec, eta))
}

#[inline]
pub(crate) fn cat_char_fn_unchecked(spec: &CatStateSpec, eta: Complex64) -> Complex64 {
    let mut total = Complex64::new(0.0, 0.0);
    let amps = [spec.alpha, spec.beta];
    let half_eta2 = 0.5 * eta.norm_sqr();
    for &a in &amps {
        for &b in &amps {
            let expo = a.conj() * b + a.conj() * eta - eta.conj() * b
                - Complex64::new(half_eta2 + 0.5 * a.norm_sqr() + 0.5 * b.norm_sqr(), 0.0);
            total += expo.exp();
        }
    }
    spec.norm_sq() * total
}

/// One point of the functional phase-space integral: a complex displacement
/// amplitude per mode, in [`ModeGrid`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint {
    pub eta: Vec<Complex64>,
}

impl PhasePoint {
    pub fn new(eta: Vec<Complex64>) -> Self {
        Self { eta }
    }

    /// Assemble mode amplitudes from standard-normal coordinates,
    /// `eta_k = (z_{2j} + i z_{2j+1}) / sqrt(2)`, so that each amplitude is
    /// a unit complex Gaussian under the mapped measure.
    pub fn from_gaussian(z: &[f64]) -> Self {
        debug_assert!(z.len() % 2 == 0);
        let eta = z
            .chunks_exact(2)
            .map(|p| Complex64::new(p[0], p[1]) * core::f64::consts::FRAC_1_SQRT_2)
            .collect();
        Self { eta }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.eta.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.eta.is_empty()
    }
}
