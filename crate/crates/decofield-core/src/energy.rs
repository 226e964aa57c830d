//! The state-independent heating rate of the field: exact mode sum and the
//! large-size closed form.
//!
//! Per kick event, mode `k` is displaced by `f_k e^{-ikx} (xi O+_k - xi* O-_k)`;
//! averaging `|.|^2` over the isotropic Gaussian kick gives the per-mode
//! moment `2 sigma_g^2 (O+^2 + O-^2) = sigma_g^2 (omega/omega_k + omega_k/omega)`,
//! so the energy grows at the constant rate
//! `gamma hbar sigma_g^2 sum_k omega_k f_k^2 (omega/omega_k + omega_k/omega)`.

use crate::math;
use crate::model::{FieldModel, KickDistribution, ModeGrid, NoiseModel, SpreadFunction};
use core::f64::consts::PI;
use core::fmt;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnergyError {
    /// the outermost mode pair still carries more than 1e-8 of the sum;
    /// the reported rate is the truncated value
    Truncated { rate: f64, tail_fraction: f64 },
}

impl fmt::Display for EnergyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnergyError::Truncated {
                rate,
                tail_fraction,
            } => write!(
                f,
                "mode sum truncated: edge modes carry {tail_fraction:e} of rate {rate:e}"
            ),
        }
    }
}

impl core::error::Error for EnergyError {}

/// Exact and closed-form heating rates side by side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatingReport {
    pub rate_sum: f64,
    pub rate_closed: f64,
    pub relative_gap: f64,
}

/// Per-mode Gaussian kick moment
/// `int d^2 xi g(xi) |xi O+ - xi* O-|^2 = 2 sigma_g^2 (O+^2 + O-^2)`.
#[inline]
pub fn kick_energy_moment(noise: &NoiseModel, omega_plus: f64, omega_minus: f64) -> f64 {
    2.0 * noise.sigma_g_sq * (omega_plus * omega_plus + omega_minus * omega_minus)
}

/// Heating rate as the exact mode sum over the truncated grid.
///
/// Errs with [`EnergyError::Truncated`] when the outermost modes still
/// contribute more than 1e-8 of the total, signalling that `n_modes` is too
/// small for the requested spread width.
pub fn heating_rate_sum(
    model: &FieldModel,
    noise: &NoiseModel,
    grid: &ModeGrid,
) -> Result<f64, EnergyError> {
    let mut total = 0.0f64;
    let mut edge = 0.0f64;
    let last = grid.len() - 1;
    for i in 0..grid.len() {
        let term = grid.omega_k[i]
            * grid.f_k[i]
            * grid.f_k[i]
            * kick_energy_moment(noise, grid.omega_plus[i], grid.omega_minus[i]);
        total += term;
        if i == 0 || i == last {
            edge += term;
        }
    }
    let rate = noise.gamma * model.hbar * total;
    let tail_fraction = if total > 0.0 { edge / total } else { 0.0 };
    if tail_fraction > 1e-8 {
        return Err(EnergyError::Truncated {
            rate,
            tail_fraction,
        });
    }
    Ok(rate)
}

/// Closed-form heating rate in the large-size limit,
/// `2 sqrt(pi) gamma hbar omega sigma_x sigma_g^2 (1 + v^2 / (2 sigma_x omega)^2)`.
///
/// Valid for the Gaussian kick and theta-normalized spread only; the match
/// enforces that at compile time for the current set of choices.
pub fn heating_rate_closed(model: &FieldModel, noise: &NoiseModel) -> f64 {
    match (noise.kick, noise.spread) {
        (KickDistribution::GaussianIsotropic, SpreadFunction::ThetaNormalizedGaussian) => {
            let v_term = model.speed / (2.0 * noise.sigma_x * model.omega);
            2.0 * math::sqrt(PI)
                * noise.gamma
                * model.hbar
                * model.omega
                * noise.sigma_x
                * noise.sigma_g_sq
                * (1.0 + v_term * v_term)
        }
    }
}

/// Both heating rates and their relative gap.
pub fn heating_report(
    model: &FieldModel,
    noise: &NoiseModel,
    grid: &ModeGrid,
) -> Result<HeatingReport, EnergyError> {
    let rate_sum = heating_rate_sum(model, noise, grid)?;
    let rate_closed = heating_rate_closed(model, noise);
    Ok(HeatingReport {
        rate_sum,
        rate_closed,
        relative_gap: (rate_sum - rate_closed).abs() / rate_closed.max(f64::MIN_POSITIVE),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gamma_means_zero_heating() {
        let model = FieldModel::dimensionless(32, 0.01).unwrap();
        let noise = NoiseModel::new(0.0, 0.5, 1.0).unwrap();
        let grid = ModeGrid::new(&model, &noise);
        assert_eq!(heating_rate_sum(&model, &noise, &grid).unwrap(), 0.0);
        assert_eq!(heating_rate_closed(&model, &noise), 0.0);
    }

    #[test]
    fn rate_is_linear_in_kick_variance() {
        let model = FieldModel::dimensionless(64, 0.01).unwrap();
        let n1 = NoiseModel::new(1.0, 0.25, 0.25).unwrap();
        let n2 = NoiseModel::new(1.0, 0.5, 0.25).unwrap();
        let g1 = ModeGrid::new(&model, &n1);
        let g2 = ModeGrid::new(&model, &n2);
        let r1 = heating_rate_sum(&model, &n1, &g1).unwrap();
        let r2 = heating_rate_sum(&model, &n2, &g2).unwrap();
        assert!((r2 / r1 - 2.0).abs() < 1e-12);
        assert!(
            (heating_rate_closed(&model, &n2) / heating_rate_closed(&model, &n1) - 2.0).abs()
                < 1e-12
        );
    }

    #[test]
    fn closed_form_dispersionless_reduction() {
        let model = FieldModel::dimensionless(32, 0.0).unwrap();
        let noise = NoiseModel::new(0.7, 0.3, 0.04).unwrap();
        let want = 2.0 * math::sqrt(PI) * 0.7 * 1.0 * 1.0 * 0.04 * 0.3;
        assert!((heating_rate_closed(&model, &noise) - want).abs() < 1e-15);
    }

    #[test]
    fn narrow_spread_needs_enough_modes() {
        // sigma_x/L = 0.02 with only 32 modes leaves weight at the edge
        let model = FieldModel::dimensionless(32, 0.01).unwrap();
        let noise = NoiseModel::new(1.0, 0.5, 0.02).unwrap();
        let grid = ModeGrid::new(&model, &noise);
        assert!(matches!(
            heating_rate_sum(&model, &noise, &grid),
            Err(EnergyError::Truncated { .. })
        ));
    }
}
