//! Monte Carlo comparison of I², I²_A and I²_ANOVA against the true
//! population-level heterogeneity.
//!
//! Every replication draws from its own ChaCha8 stream derived from
//! `(seed, n_base, replication index)`, and results are collected in
//! replication order. Output is therefore identical for any number of
//! worker threads.

mod config;
mod generate;
mod summary;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{NSchedule, SimConfig, VarianceModel};
pub use generate::{
    gen_one_arm, gen_two_arm_md, gen_two_arm_smd, gen_two_arm_smd_arms, generate,
};
pub use summary::BoxSummary;

use crate::error::{Error, Result};
use crate::model::{self, EffectSizeKind};

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Random stream of one replication.
pub fn replication_rng(seed: u64, n_base: u32, rep: usize) -> ChaCha8Rng {
    let key = splitmix64(seed ^ splitmix64(u64::from(n_base)));
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(rep as u64);
    rng
}

/// Runs `f` on a pool with `threads` workers, or on the global pool.
pub fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::InvalidConfig {
                    field: "threads",
                    reason: e.to_string(),
                })?;
            Ok(pool.install(f))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Statistic {
    #[serde(rename = "I2")]
    I2,
    #[serde(rename = "I2_A")]
    I2A,
    #[serde(rename = "I2_ANOVA")]
    I2Anova,
}

impl Statistic {
    pub const ALL: [Statistic; 3] = [Statistic::I2A, Statistic::I2Anova, Statistic::I2];

    pub fn name(self) -> &'static str {
        match self {
            Statistic::I2 => "I2",
            Statistic::I2A => "I2_A",
            Statistic::I2Anova => "I2_ANOVA",
        }
    }
}

/// The three statistics of one simulated meta-analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Draw {
    pub i2: f64,
    pub i2_a: f64,
    pub i2_anova: f64,
}

impl Draw {
    pub fn get(&self, stat: Statistic) -> f64 {
        match stat {
            Statistic::I2 => self.i2,
            Statistic::I2A => self.i2_a,
            Statistic::I2Anova => self.i2_anova,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summaries {
    pub i2: BoxSummary,
    pub i2_a: BoxSummary,
    pub i2_anova: BoxSummary,
}

impl Summaries {
    pub fn get(&self, stat: Statistic) -> &BoxSummary {
        match stat {
            Statistic::I2 => &self.i2,
            Statistic::I2A => &self.i2_a,
            Statistic::I2Anova => &self.i2_anova,
        }
    }
}

/// Draws and boxplot summaries at one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub n_base: u32,
    pub icc_ma_true: f64,
    pub draws: Vec<Draw>,
    pub summaries: Summaries,
}

impl SimResult {
    pub fn from_draws(n_base: u32, icc_ma_true: f64, draws: Vec<Draw>) -> Option<SimResult> {
        let column = |stat: Statistic| -> Vec<f64> { draws.iter().map(|d| d.get(stat)).collect() };
        let summaries = Summaries {
            i2: BoxSummary::from_values(&column(Statistic::I2))?,
            i2_a: BoxSummary::from_values(&column(Statistic::I2A))?,
            i2_anova: BoxSummary::from_values(&column(Statistic::I2Anova))?,
        };
        Some(SimResult {
            n_base,
            icc_ma_true,
            draws,
            summaries,
        })
    }

    pub fn mean(&self, stat: Statistic) -> f64 {
        self.summaries.get(stat).mean
    }
}

fn draw_once(config: &SimConfig, n_base: u32, rep: usize) -> Result<Draw> {
    let mut rng = replication_rng(config.seed, n_base, rep);
    let ds = generate(config, n_base, &mut rng)?;
    let panel = model::full_panel(&ds)?;
    Ok(Draw {
        i2: panel.i2,
        i2_a: panel.i2_a,
        i2_anova: panel.i2_anova,
    })
}

/// `config.reps` replications at a single grid value.
pub fn run_point(config: &SimConfig, n_base: u32) -> Result<SimResult> {
    config.validate()?;
    let draws = (0..config.reps)
        .into_par_iter()
        .map(|rep| draw_once(config, n_base, rep))
        .collect::<Result<Vec<_>>>()?;
    SimResult::from_draws(n_base, config.icc_ma_true(), draws).ok_or_else(|| Error::InvalidConfig {
        field: "reps",
        reason: "simulation produced no usable draws".into(),
    })
}

/// Every grid point of `config.n_grid`, in grid order.
pub fn run_monte_carlo(config: &SimConfig) -> Result<Vec<SimResult>> {
    config.validate()?;
    config.n_grid.iter().map(|&n| run_point(config, n)).collect()
}

/// Monte Carlo check of the expected mean squares: E(MSB) = n~ tau2 + sigma2
/// and E(MSW) = sigma2 under a common population variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanSquareReport {
    pub reps: usize,
    pub n_tilde: f64,
    pub mean_msb: f64,
    pub mean_msw: f64,
    pub expected_msb: f64,
    pub expected_msw: f64,
    pub rel_dev_msb: f64,
    pub rel_dev_msw: f64,
    pub mean_difference: f64,
    pub expected_difference: f64,
}

pub fn lemma1_check(config: &SimConfig, n_base: u32) -> Result<MeanSquareReport> {
    config.validate()?;
    if config.kind != EffectSizeKind::Mean {
        return Err(Error::KindMismatch {
            expected: "mean",
            found: config.kind.as_str(),
        });
    }
    if config.variance_model != VarianceModel::Common {
        return Err(Error::InvalidConfig {
            field: "variance_model",
            reason: "the mean-square check needs a common population variance".into(),
        });
    }
    let pairs = (0..config.reps)
        .into_par_iter()
        .map(|rep| -> Result<(f64, f64)> {
            let mut rng = replication_rng(config.seed, n_base, rep);
            let ds = gen_one_arm(config, n_base, &mut rng)?;
            Ok((model::msb_ma(&ds), model::msw_ma(&ds)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let reps = pairs.len() as f64;
    let mean_msb = pairs.iter().map(|p| p.0).sum::<f64>() / reps;
    let mean_msw = pairs.iter().map(|p| p.1).sum::<f64>() / reps;
    let sizes: Vec<f64> = config.sample_sizes(n_base).iter().map(|&n| n as f64).collect();
    let n_tilde = model::adjusted_mean_n(&sizes)?;
    let expected_msb = n_tilde * config.tau2 + config.sigma2;
    let expected_msw = config.sigma2;
    Ok(MeanSquareReport {
        reps: pairs.len(),
        n_tilde,
        mean_msb,
        mean_msw,
        expected_msb,
        expected_msw,
        rel_dev_msb: (mean_msb - expected_msb) / expected_msb,
        rel_dev_msw: (mean_msw - expected_msw) / expected_msw,
        mean_difference: mean_msb - mean_msw,
        expected_difference: n_tilde * config.tau2,
    })
}
