use serde::{Deserialize, Serialize};

use crate::effects::SmdMethod;
use crate::error::{Error, Result};
use crate::model::EffectSizeKind;

/// Sample size of study `i` (1-based) given the grid value `n_base`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NSchedule {
    /// `n_i = i * n_base`
    #[default]
    Linear,
    /// `n_i = n_base`
    Constant,
}

impl NSchedule {
    pub fn size(self, i: usize, n_base: u32) -> u64 {
        match self {
            NSchedule::Linear => i as u64 * u64::from(n_base),
            NSchedule::Constant => u64::from(n_base),
        }
    }
}

/// How the per-study population (error) variance is chosen.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum VarianceModel {
    /// Every study uses `sigma2`.
    #[default]
    Common,
    /// A fresh variance per study per replication from Gamma(shape, scale).
    Gamma { shape: f64, scale: f64 },
}

fn one() -> f64 {
    1.0
}

fn default_scale_range() -> [f64; 2] {
    [0.5, 1.5]
}

fn default_grid() -> Vec<u32> {
    vec![10, 20, 30, 40, 50, 60, 70, 80, 90]
}

/// A Monte Carlo scenario. Loaded from TOML by the `simulate` command; every
/// field except `kind`, `k`, `tau2` and `reps` has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub kind: EffectSizeKind,
    pub k: usize,
    #[serde(default)]
    pub n_schedule: NSchedule,
    #[serde(default = "default_grid")]
    pub n_grid: Vec<u32>,
    /// Grand mean (kind = mean).
    #[serde(default)]
    pub mu: f64,
    #[serde(default)]
    pub mu_t: f64,
    #[serde(default)]
    pub mu_c: f64,
    /// Between-study variance of the true effects. For two-arm kinds each
    /// arm's deviation is drawn with variance `tau2 / 2`.
    pub tau2: f64,
    /// Error variance of a single observation; also the reference
    /// population variance for the true ICC.
    #[serde(default = "one")]
    pub sigma2: f64,
    #[serde(default)]
    pub variance_model: VarianceModel,
    /// Range of the per-study rescaling factor (kind = smd).
    #[serde(default = "default_scale_range")]
    pub scale_range: [f64; 2],
    #[serde(default)]
    pub smd_method: SmdMethod,
    pub reps: usize,
    #[serde(default)]
    pub seed: u64,
}

fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidConfig {
        field,
        reason: reason.into(),
    }
}

impl SimConfig {
    /// Scenario with the defaults used throughout the simulation studies.
    pub fn new(kind: EffectSizeKind, k: usize, tau2: f64, sigma2: f64, reps: usize) -> Self {
        SimConfig {
            kind,
            k,
            n_schedule: NSchedule::Linear,
            n_grid: default_grid(),
            mu: 0.0,
            mu_t: 0.0,
            mu_c: 0.0,
            tau2,
            sigma2,
            variance_model: VarianceModel::Common,
            scale_range: default_scale_range(),
            smd_method: SmdMethod::HedgesG,
            reps,
            seed: 0,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: SimConfig = toml::from_str(text).map_err(|e| Error::Parse {
            message: format!("simulation config: {}", e.message()),
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(invalid("k", format!("need at least 2 studies, got {}", self.k)));
        }
        if self.reps < 1 {
            return Err(invalid("reps", "need at least 1 replication"));
        }
        if !(self.tau2.is_finite() && self.tau2 >= 0.0) {
            return Err(invalid("tau2", format!("must be finite and >= 0, got {}", self.tau2)));
        }
        if !(self.sigma2.is_finite() && self.sigma2 > 0.0) {
            return Err(invalid("sigma2", format!("must be finite and > 0, got {}", self.sigma2)));
        }
        for (field, v) in [("mu", self.mu), ("mu_t", self.mu_t), ("mu_c", self.mu_c)] {
            if !v.is_finite() {
                return Err(invalid(field, "must be finite"));
            }
        }
        if self.n_grid.is_empty() {
            return Err(invalid("n_grid", "must list at least one base sample size"));
        }
        for &n in &self.n_grid {
            let smallest = self.n_schedule.size(1, n);
            if smallest < 2 {
                return Err(Error::InsufficientSample { n: smallest });
            }
        }
        if let VarianceModel::Gamma { shape, scale } = self.variance_model {
            if !(shape.is_finite() && shape > 0.0 && scale.is_finite() && scale > 0.0) {
                return Err(invalid("variance_model", "gamma shape and scale must be > 0"));
            }
        }
        let [lo, hi] = self.scale_range;
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi) {
            return Err(invalid("scale_range", "need 0 < low <= high"));
        }
        Ok(())
    }

    /// Reference value of the heterogeneity the estimators target,
    /// `tau2 / (tau2 + sigma2)`.
    pub fn icc_ma_true(&self) -> f64 {
        self.tau2 / (self.tau2 + self.sigma2)
    }

    pub fn sample_sizes(&self, n_base: u32) -> Vec<u64> {
        (1..=self.k).map(|i| self.n_schedule.size(i, n_base)).collect()
    }
}
