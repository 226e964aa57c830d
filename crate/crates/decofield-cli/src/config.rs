//! Experiment configuration: one human-editable JSON document per run.
//!
//! All physical inputs are the dimensionless ratios `gamma/omega`,
//! `sigma_g^2 L`, `sigma_x/L`, `v/(L omega)`; internally everything runs in
//! the `hbar = omega = L = 1` convention. Configs round-trip losslessly
//! (parse -> serialize -> parse) and unknown fields are rejected.

use anyhow::{bail, Context, Result};
use decofield_core::decoherence::RateContext;
use decofield_core::model::{CatStateSpec, FieldModel, NoiseModel};
use decofield_core::qmc::FaureConfig;
use decofield_core::Complex64;
use serde::{Deserialize, Serialize};

fn default_t_nodes() -> usize {
    8
}

/// Dimensionless model block shared by every command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub gamma_over_omega: f64,
    pub sigma_g_sq_l: f64,
    pub sigma_x_over_l: f64,
    pub v_over_l_omega: f64,
    pub n_modes: usize,
    /// spatial quadrature nodes; default max(256, 8 n_modes)
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_nodes: Option<usize>,
    #[serde(default = "default_t_nodes")]
    pub t_nodes_per_period: usize,
}

impl ModelParams {
    pub fn field_model(&self) -> Result<FieldModel> {
        FieldModel::dimensionless(self.n_modes, self.v_over_l_omega)
            .map_err(|e| anyhow::anyhow!("invalid model parameters: {e}"))
    }

    pub fn noise_model(&self) -> Result<NoiseModel> {
        NoiseModel::new(self.gamma_over_omega, self.sigma_g_sq_l, self.sigma_x_over_l)
            .map_err(|e| anyhow::anyhow!("invalid noise parameters: {e}"))
    }

    pub fn rate_context(&self) -> Result<RateContext> {
        let model = self.field_model()?;
        let noise = self.noise_model()?;
        let x_nodes = self.x_nodes.unwrap_or((8 * self.n_modes).max(256));
        RateContext::with_resolution(model, noise, x_nodes, self.t_nodes_per_period)
            .map_err(|e| anyhow::anyhow!("invalid rate context: {e}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeUnit {
    /// grid values are gamma t
    GammaT,
    /// grid values are omega t
    OmegaT,
}

/// Strictly increasing time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub unit: TimeUnit,
}

impl TimeGrid {
    pub fn values(&self) -> Result<Vec<f64>> {
        if self.count < 1 || !(self.stop > self.start) || self.start < 0.0 {
            bail!("time grid must be strictly increasing and nonnegative");
        }
        if self.count == 1 {
            return Ok(vec![self.start]);
        }
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        Ok((0..self.count)
            .map(|i| self.start + step * i as f64)
            .collect())
    }

    /// Physical times (units of 1/omega) and the matching `gamma t` values.
    pub fn physical(&self, gamma: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        let grid = self.values()?;
        match self.unit {
            TimeUnit::GammaT => {
                if gamma <= 0.0 {
                    bail!("gamma_t time grids require gamma > 0; use omega_t");
                }
                let times: Vec<f64> = grid.iter().map(|&g| g / gamma).collect();
                Ok((times, grid))
            }
            TimeUnit::OmegaT => {
                let gammat: Vec<f64> = grid.iter().map(|&t| gamma * t).collect();
                Ok((grid, gammat))
            }
        }
    }
}

/// Low-discrepancy sequence settings; omitted fields take the defaults of
/// the classical construction (smallest prime base, skip = base^4).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct FaureSettings {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<u32>,
    #[serde(default)]
    pub scramble_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skip: Option<u64>,
}

impl FaureSettings {
    pub fn to_config(&self, dimension: usize, seed_override: Option<u64>) -> Result<FaureConfig> {
        let mut cfg = FaureConfig::new(dimension)
            .map_err(|e| anyhow::anyhow!("invalid sequence dimension: {e}"))?;
        if let Some(base) = self.base {
            cfg.base = base;
        }
        if let Some(skip) = self.skip {
            cfg.skip = skip;
        }
        cfg.scramble_seed = seed_override.unwrap_or(self.scramble_seed);
        cfg.validate()
            .map_err(|e| anyhow::anyhow!("invalid sequence settings: {e}"))?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PurityDecayConfig {
    /// zero-mode coherent amplitudes as [re, im]
    pub alpha: [f64; 2],
    pub beta: [f64; 2],
    pub model: ModelParams,
    pub times: TimeGrid,
    pub n_points: u64,
    #[serde(default)]
    pub faure: FaureSettings,
}

impl PurityDecayConfig {
    pub fn state(&self) -> Result<CatStateSpec> {
        CatStateSpec::new(
            Complex64::new(self.alpha[0], self.alpha[1]),
            Complex64::new(self.beta[0], self.beta[1]),
        )
        .map_err(|e| anyhow::anyhow!("invalid state: {e}"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeparationGrid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl SeparationGrid {
    pub fn values(&self) -> Result<Vec<f64>> {
        if self.count < 1 || self.stop < self.start || self.start < 0.0 {
            bail!("separation grid must be nondecreasing and nonnegative");
        }
        if self.count == 1 {
            return Ok(vec![self.start]);
        }
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        Ok((0..self.count)
            .map(|i| self.start + step * i as f64)
            .collect())
    }
}

/// Initial-rate scan: superpositions with `alpha + beta` real (the offset)
/// and `alpha - beta = i d` along the imaginary axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialRateConfig {
    pub offsets: Vec<f64>,
    pub separations: SeparationGrid,
    pub model: ModelParams,
    pub n_points: u64,
    #[serde(default)]
    pub faure: FaureSettings,
}

impl InitialRateConfig {
    pub fn state(offset: f64, separation: f64) -> Result<CatStateSpec> {
        let alpha = Complex64::new(0.5 * offset, 0.5 * separation);
        let beta = Complex64::new(0.5 * offset, -0.5 * separation);
        CatStateSpec::new(alpha, beta).map_err(|e| anyhow::anyhow!("invalid state: {e}"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyConfig {
    pub model: ModelParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelsConfig {
    pub model: ModelParams,
    /// evaluation times in units of 1/omega
    pub times_omega_t: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QmcSelftestConfig {
    pub dimension: usize,
    pub n_points_ladder: Vec<u64>,
    #[serde(default)]
    pub faure: FaureSettings,
}

pub fn load_config<T: serde::de::DeserializeOwned>(path: &std::path::Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("cannot parse config {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn time_grid_values() {
        let g = TimeGrid {
            start: 0.0,
            stop: 20.0,
            count: 21,
            unit: TimeUnit::GammaT,
        };
        let v = g.values().unwrap();
        assert_eq!(v.len(), 21);
        assert_eq!(v[0], 0.0);
        assert_eq!(v[20], 20.0);
        let (t, gt) = g.physical(0.5).unwrap();
        assert_eq!(t[20], 40.0);
        assert_eq!(gt[20], 20.0);
    }

    #[test]
    fn gamma_zero_requires_omega_t() {
        let g = TimeGrid {
            start: 0.0,
            stop: 5.0,
            count: 3,
            unit: TimeUnit::GammaT,
        };
        assert!(g.physical(0.0).is_err());
        let g2 = TimeGrid {
            unit: TimeUnit::OmegaT,
            ..g
        };
        assert!(g2.physical(0.0).is_ok());
    }
}
