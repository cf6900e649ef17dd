//! Raw-data generators. Each call simulates one meta-analysis: it draws the
//! individual observations of every study and reduces them to the summary
//! data a published study would report.

use rand::Rng;
use rand_distr::{Distribution, Gamma, Normal, StandardNormal};

use super::config::{SimConfig, VarianceModel};
use crate::effects;
use crate::error::{Error, Result};
use crate::model::{EffectSizeKind, MetaDataset, OneArmStudy, TwoArmStudy};

/// Sample mean and unbiased sample variance of `n` draws of
/// `center + sd * Z`.
fn sample_group<R: Rng + ?Sized>(rng: &mut R, n: u64, center: f64, sd: f64) -> (f64, f64) {
    // Welford
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for j in 1..=n {
        let z: f64 = StandardNormal.sample(rng);
        let x = center + sd * z;
        let delta = x - mean;
        mean += delta / j as f64;
        m2 += delta * (x - mean);
    }
    (mean, m2 / (n - 1) as f64)
}

fn check_sizes(sizes: &[u64]) -> Result<()> {
    match sizes.iter().find(|&&n| n < 2) {
        Some(&n) => Err(Error::InsufficientSample { n }),
        None => Ok(()),
    }
}

fn normal(sd: f64) -> Normal<f64> {
    Normal::new(0.0, sd).expect("standard deviation is finite and >= 0")
}

fn expect_kind(config: &SimConfig, kind: EffectSizeKind) -> Result<()> {
    if config.kind == kind {
        Ok(())
    } else {
        Err(Error::KindMismatch {
            expected: kind.as_str(),
            found: config.kind.as_str(),
        })
    }
}

/// One-arm studies: `y_ij = mu + delta_i + xi_ij` with
/// `delta_i ~ N(0, tau2)` and `xi_ij ~ N(0, sigma_i^2)`. Reports the sample
/// mean, `s^2 / n` and `n` for each study.
pub fn gen_one_arm<R: Rng + ?Sized>(
    config: &SimConfig,
    n_base: u32,
    rng: &mut R,
) -> Result<MetaDataset> {
    expect_kind(config, EffectSizeKind::Mean)?;
    let sizes = config.sample_sizes(n_base);
    check_sizes(&sizes)?;
    let between = normal(config.tau2.sqrt());
    let gamma = match config.variance_model {
        VarianceModel::Common => None,
        VarianceModel::Gamma { shape, scale } => Some(
            Gamma::new(shape, scale).map_err(|e| Error::InvalidConfig {
                field: "variance_model",
                reason: e.to_string(),
            })?,
        ),
    };
    let mut studies = Vec::with_capacity(sizes.len());
    for &n in &sizes {
        let delta = between.sample(rng);
        let sigma2 = match &gamma {
            Some(g) => g.sample(rng),
            None => config.sigma2,
        };
        let (mean, s2) = sample_group(rng, n, config.mu + delta, sigma2.sqrt());
        let n32 = u32::try_from(n).map_err(|_| Error::InvalidConfig {
            field: "n_grid",
            reason: format!("study size {n} does not fit in 32 bits"),
        })?;
        studies.push(OneArmStudy {
            y: mean,
            var_y: s2 / n as f64,
            n: n32,
        });
    }
    MetaDataset::from_one_arm(&studies)
}

fn gen_arms<R: Rng + ?Sized>(
    config: &SimConfig,
    n_base: u32,
    rng: &mut R,
    rescale: bool,
) -> Result<Vec<TwoArmStudy>> {
    let sizes = config.sample_sizes(n_base);
    check_sizes(&sizes)?;
    let arm_delta = normal((config.tau2 / 2.0).sqrt());
    let sd = config.sigma2.sqrt();
    let [lo, hi] = config.scale_range;
    let mut arms = Vec::with_capacity(sizes.len());
    for &n in &sizes {
        let n32 = u32::try_from(n).map_err(|_| Error::InvalidConfig {
            field: "n_grid",
            reason: format!("study size {n} does not fit in 32 bits"),
        })?;
        let scale = if rescale {
            let u: f64 = rng.random();
            lo + (hi - lo) * u
        } else {
            1.0
        };
        let delta_t = arm_delta.sample(rng);
        let delta_c = arm_delta.sample(rng);
        let (mean_t, s2_t) = sample_group(rng, n, config.mu_t + delta_t, sd);
        let (mean_c, s2_c) = sample_group(rng, n, config.mu_c + delta_c, sd);
        // Scaling every observation by `scale` scales the mean by it and the
        // variance by its square.
        let nf = n as f64;
        arms.push(TwoArmStudy {
            y_t: scale * mean_t,
            se_t: scale * (s2_t / nf).sqrt(),
            n_t: n32,
            y_c: scale * mean_c,
            se_c: scale * (s2_c / nf).sqrt(),
            n_c: n32,
        });
    }
    Ok(arms)
}

/// Two-arm studies with arm deviations `delta^T, delta^C ~ N(0, tau2/2)`, so
/// the true mean differences have variance `tau2`.
pub fn gen_two_arm_md<R: Rng + ?Sized>(
    config: &SimConfig,
    n_base: u32,
    rng: &mut R,
) -> Result<MetaDataset> {
    expect_kind(config, EffectSizeKind::MeanDifference)?;
    let arms = gen_arms(config, n_base, rng, false)?;
    effects::mean_difference_dataset(&arms)
}

/// Two-arm arm summaries as in [`gen_two_arm_md`], with every observation of
/// study `i` multiplied by `sigma_i = low + (high - low) U`.
pub fn gen_two_arm_smd_arms<R: Rng + ?Sized>(
    config: &SimConfig,
    n_base: u32,
    rng: &mut R,
) -> Result<Vec<TwoArmStudy>> {
    expect_kind(config, EffectSizeKind::StandardizedMeanDifference)?;
    gen_arms(config, n_base, rng, true)
}

pub fn gen_two_arm_smd<R: Rng + ?Sized>(
    config: &SimConfig,
    n_base: u32,
    rng: &mut R,
) -> Result<MetaDataset> {
    let arms = gen_two_arm_smd_arms(config, n_base, rng)?;
    effects::standardized_dataset(&arms, config.smd_method)
}

/// Dispatches on `config.kind`.
pub fn generate<R: Rng + ?Sized>(
    config: &SimConfig,
    n_base: u32,
    rng: &mut R,
) -> Result<MetaDataset> {
    match config.kind {
        EffectSizeKind::Mean => gen_one_arm(config, n_base, rng),
        EffectSizeKind::MeanDifference => gen_two_arm_md(config, n_base, rng),
        EffectSizeKind::StandardizedMeanDifference => gen_two_arm_smd(config, n_base, rng),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::replication_rng;

    #[test]
    fn vanishing_noise_recovers_the_mean() {
        let mut c = SimConfig::new(EffectSizeKind::Mean, 4, 0.0, 1e-20, 1);
        c.mu = 3.25;
        let ds = gen_one_arm(&c, 5, &mut replication_rng(1, 5, 0)).unwrap();
        for s in ds.studies() {
            assert!((s.y - 3.25).abs() < 1e-8);
        }
    }

    #[test]
    fn vanishing_noise_md_is_zero() {
        let c = SimConfig::new(EffectSizeKind::MeanDifference, 3, 0.0, 1e-20, 1);
        let ds = gen_two_arm_md(&c, 4, &mut replication_rng(9, 4, 0)).unwrap();
        for (i, s) in ds.studies().iter().enumerate() {
            assert!(s.y.abs() < 1e-8);
            // equal arms of 4(i+1): effective size is half of that
            assert_eq!(s.n, 2.0 * (i + 1) as f64);
        }
    }

    #[test]
    fn kind_mismatch_is_rejected() {
        let c = SimConfig::new(EffectSizeKind::Mean, 3, 1.0, 1.0, 1);
        assert!(matches!(
            gen_two_arm_md(&c, 10, &mut replication_rng(0, 10, 0)),
            Err(Error::KindMismatch { .. })
        ));
    }

    #[test]
    fn too_small_groups_are_rejected() {
        let mut c = SimConfig::new(EffectSizeKind::Mean, 3, 1.0, 1.0, 1);
        c.n_schedule = crate::sim::NSchedule::Constant;
        assert_eq!(
            gen_one_arm(&c, 1, &mut replication_rng(0, 1, 0)),
            Err(Error::InsufficientSample { n: 1 })
        );
    }

    #[test]
    fn sample_group_moments() {
        let mut rng = replication_rng(3, 0, 0);
        let (m, v) = sample_group(&mut rng, 200_000, 5.0, 2.0);
        assert!((m - 5.0).abs() < 0.02);
        assert!((v - 4.0).abs() < 0.05);
    }
}
