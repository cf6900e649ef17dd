//! Domain types and the heterogeneity statistics computed from summary data.
//!
//! All functions here are pure arithmetic on validated inputs. Datasets are
//! validated once at construction ([`MetaDataset::new`]) so the statistics
//! that cannot fail on a valid dataset return plain `f64`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Summary data of a single-arm study: sample mean, its estimated variance
/// and the number of observations it was computed from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OneArmStudy {
    pub y: f64,
    pub var_y: f64,
    pub n: u32,
}

impl OneArmStudy {
    pub fn new(y: f64, var_y: f64, n: u32) -> Result<Self> {
        let study = OneArmStudy { y, var_y, n };
        study.validate()?;
        Ok(study)
    }

    pub fn validate(&self) -> Result<()> {
        check_effect(self.y)?;
        check_positive_variance("var_y", self.var_y)?;
        if self.n < 1 {
            return Err(Error::InvalidSampleSize {
                what: "n",
                value: f64::from(self.n),
            });
        }
        Ok(())
    }
}

/// Per-arm summary data of a two-arm study. `se_*` are standard errors of
/// the arm means, not standard deviations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoArmStudy {
    pub y_t: f64,
    pub se_t: f64,
    pub n_t: u32,
    pub y_c: f64,
    pub se_c: f64,
    pub n_c: u32,
}

impl TwoArmStudy {
    pub fn new(y_t: f64, se_t: f64, n_t: u32, y_c: f64, se_c: f64, n_c: u32) -> Result<Self> {
        let study = TwoArmStudy {
            y_t,
            se_t,
            n_t,
            y_c,
            se_c,
            n_c,
        };
        study.validate()?;
        Ok(study)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.y_t.is_finite() || !self.y_c.is_finite() {
            return Err(Error::InvalidStudy {
                reason: format!("arm means must be finite ({}, {})", self.y_t, self.y_c),
            });
        }
        if !(self.se_t.is_finite() && self.se_t > 0.0 && self.se_c.is_finite() && self.se_c > 0.0)
        {
            return Err(Error::InvalidStudy {
                reason: format!(
                    "arm standard errors must be finite and > 0 ({}, {})",
                    self.se_t, self.se_c
                ),
            });
        }
        if self.n_t < 2 || self.n_c < 2 {
            return Err(Error::InsufficientDegreesOfFreedom {
                what: "two-arm study (n_t and n_c must be >= 2)",
            });
        }
        Ok(())
    }

    /// `1 / (1/n_t + 1/n_c)`.
    pub fn effective_n(&self) -> f64 {
        let (nt, nc) = (f64::from(self.n_t), f64::from(self.n_c));
        1.0 / (1.0 / nt + 1.0 / nc)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EffectSizeKind {
    #[serde(rename = "mean")]
    Mean,
    #[serde(rename = "md")]
    MeanDifference,
    #[serde(rename = "smd")]
    StandardizedMeanDifference,
}

impl EffectSizeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EffectSizeKind::Mean => "mean",
            EffectSizeKind::MeanDifference => "md",
            EffectSizeKind::StandardizedMeanDifference => "smd",
        }
    }
}

impl fmt::Display for EffectSizeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EffectSizeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(EffectSizeKind::Mean),
            "md" => Ok(EffectSizeKind::MeanDifference),
            "smd" => Ok(EffectSizeKind::StandardizedMeanDifference),
            other => Err(Error::Parse {
                message: format!("unknown effect size kind `{other}` (expected mean, md or smd)"),
            }),
        }
    }
}

/// Canonical per-study triple every statistic works from.
///
/// `n` is the raw sample size for one-arm studies and the real-valued
/// effective size `1/(1/n_t + 1/n_c)` for two-arm studies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Study {
    pub y: f64,
    pub var_y: f64,
    pub n: f64,
}

impl Study {
    /// Inverse-variance weight.
    pub fn weight(&self) -> f64 {
        1.0 / self.var_y
    }
}

impl From<OneArmStudy> for Study {
    fn from(s: OneArmStudy) -> Self {
        Study {
            y: s.y,
            var_y: s.var_y,
            n: f64::from(s.n),
        }
    }
}

/// A validated, homogeneous collection of at least two studies.
#[derive(Debug, Clone, PartialEq)]
pub struct MetaDataset {
    kind: EffectSizeKind,
    studies: Vec<Study>,
    arms: Option<Vec<TwoArmStudy>>,
}

impl MetaDataset {
    pub fn new(kind: EffectSizeKind, studies: Vec<Study>) -> Result<Self> {
        if studies.len() < 2 {
            return Err(Error::InsufficientStudies {
                found: studies.len(),
            });
        }
        for (i, s) in studies.iter().enumerate() {
            validate_study(s).map_err(|e| e.at_row(i + 1))?;
        }
        Ok(MetaDataset {
            kind,
            studies,
            arms: None,
        })
    }

    /// Attaches the two-arm summaries the canonical triples were derived
    /// from; MSW for mean differences is computed from these.
    pub fn with_arms(mut self, arms: Vec<TwoArmStudy>) -> Result<Self> {
        if arms.len() != self.studies.len() {
            return Err(Error::InvalidStudy {
                reason: format!(
                    "{} arm records for {} studies",
                    arms.len(),
                    self.studies.len()
                ),
            });
        }
        for (i, a) in arms.iter().enumerate() {
            a.validate().map_err(|e| e.at_row(i + 1))?;
        }
        self.arms = Some(arms);
        Ok(self)
    }

    pub fn from_one_arm(studies: &[OneArmStudy]) -> Result<Self> {
        for (i, s) in studies.iter().enumerate() {
            s.validate().map_err(|e| e.at_row(i + 1))?;
        }
        MetaDataset::new(
            EffectSizeKind::Mean,
            studies.iter().copied().map(Study::from).collect(),
        )
    }

    pub fn kind(&self) -> EffectSizeKind {
        self.kind
    }

    pub fn studies(&self) -> &[Study] {
        &self.studies
    }

    pub fn arms(&self) -> Option<&[TwoArmStudy]> {
        self.arms.as_deref()
    }

    pub fn k(&self) -> usize {
        self.studies.len()
    }

    pub fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.studies.iter().map(Study::weight)
    }

    pub fn sample_sizes(&self) -> Vec<f64> {
        self.studies.iter().map(|s| s.n).collect()
    }
}

fn check_effect(y: f64) -> Result<()> {
    if y.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidEffect { value: y })
    }
}

fn check_positive_variance(what: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidVariance { what, value })
    }
}

fn check_nonnegative(what: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidStatistic { what, value })
    }
}

fn check_k(k: usize) -> Result<()> {
    if k < 2 {
        Err(Error::InsufficientStudies { found: k })
    } else {
        Ok(())
    }
}

fn validate_study(s: &Study) -> Result<()> {
    check_effect(s.y)?;
    check_positive_variance("var_y", s.var_y)?;
    if !(s.n.is_finite() && s.n > 0.0) {
        return Err(Error::InvalidSampleSize {
            what: "n",
            value: s.n,
        });
    }
    Ok(())
}

/// Inverse-variance weight aggregates shared by Q, the DL estimator and
/// the average within-study variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightSums {
    pub k: usize,
    pub sum_w: f64,
    pub sum_w2: f64,
    pub sum_wy: f64,
}

impl WeightSums {
    pub fn of(dataset: &MetaDataset) -> Self {
        let (mut sum_w, mut sum_w2, mut sum_wy) = (0.0, 0.0, 0.0);
        for s in dataset.studies() {
            let w = s.weight();
            sum_w += w;
            sum_w2 += w * w;
            sum_wy += w * s.y;
        }
        WeightSums {
            k: dataset.k(),
            sum_w,
            sum_w2,
            sum_wy,
        }
    }

    pub fn weighted_mean(&self) -> f64 {
        self.sum_wy / self.sum_w
    }

    /// `sum(w) - sum(w^2)/sum(w)`, the DL denominator.
    pub fn dl_denominator(&self) -> Result<f64> {
        let d = self.sum_w - self.sum_w2 / self.sum_w;
        if d > 0.0 && d.is_finite() {
            Ok(d)
        } else {
            Err(Error::DegenerateWeights { denominator: d })
        }
    }
}

// The weighted means are not exact in floating point, so identical effects
// would otherwise leave a residual of order 1e-31.
fn all_equal(dataset: &MetaDataset) -> bool {
    let y0 = dataset.studies()[0].y;
    dataset.studies().iter().all(|s| s.y == y0)
}

/// Cochran's Q: `sum w_i (y_i - ybar_w)^2` with `w_i = 1/var_y_i`.
pub fn cochran_q(dataset: &MetaDataset) -> f64 {
    if all_equal(dataset) {
        return 0.0;
    }
    let ybar = WeightSums::of(dataset).weighted_mean();
    dataset
        .studies()
        .iter()
        .map(|s| s.weight() * (s.y - ybar).powi(2))
        .sum()
}

/// Untruncated DerSimonian-Laird moment estimate `(Q - (k-1)) / denom`.
pub fn dl_tau2_raw(dataset: &MetaDataset) -> Result<f64> {
    let sums = WeightSums::of(dataset);
    let denom = sums.dl_denominator()?;
    Ok((cochran_q(dataset) - (sums.k as f64 - 1.0)) / denom)
}

/// DerSimonian-Laird estimate of the between-study variance, truncated at 0.
pub fn dl_tau2(dataset: &MetaDataset) -> Result<f64> {
    Ok(dl_tau2_raw(dataset)?.max(0.0))
}

/// Typical within-study variance `(k-1) / (sum w - sum w^2 / sum w)`.
pub fn sigma_tilde2(dataset: &MetaDataset) -> Result<f64> {
    let sums = WeightSums::of(dataset);
    Ok((sums.k as f64 - 1.0) / sums.dl_denominator()?)
}

fn i_squared_raw(q: f64, k: usize) -> Option<f64> {
    if q == 0.0 {
        None
    } else {
        Some((q - (k as f64 - 1.0)) / q)
    }
}

/// `max{(Q - (k-1))/Q, 0}`, defined as 0 when Q = 0.
pub fn i_squared(q: f64, k: usize) -> Result<f64> {
    check_k(k)?;
    check_nonnegative("Q", q)?;
    Ok(i_squared_raw(q, k).map_or(0.0, |v| v.max(0.0)))
}

/// Adjusted mean size `(sum n - sum n^2 / sum n) / (k-1)`.
///
/// Applied to sample sizes this is the adjusted mean sample size; applied to
/// inverse-variance weights it is the adjusted mean weight used for SMD.
pub fn adjusted_mean_n(n: &[f64]) -> Result<f64> {
    check_k(n.len())?;
    let (mut sum, mut sum2) = (0.0, 0.0);
    for &v in n {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidSampleSize {
                what: "n",
                value: v,
            });
        }
        sum += v;
        sum2 += v * v;
    }
    Ok((sum - sum2 / sum) / (n.len() as f64 - 1.0))
}

fn i_squared_a_raw(q: f64, k: usize, adjust: f64) -> Option<f64> {
    let df = k as f64 - 1.0;
    let denom = q + df * (adjust - 1.0);
    if denom == 0.0 {
        None
    } else {
        Some((q - df) / denom)
    }
}

fn check_adjustment(value: f64) -> Result<()> {
    if value.is_finite() && value >= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidAdjustedSize { value })
    }
}

/// `max{(Q - (k-1)) / (Q + (k-1)(n~ - 1)), 0}`, the sample-size adjusted
/// counterpart of I². Equals [`i_squared`] when `n_tilde == 1`.
pub fn i_squared_a(q: f64, k: usize, n_tilde: f64) -> Result<f64> {
    check_k(k)?;
    check_nonnegative("Q", q)?;
    check_adjustment(n_tilde)?;
    Ok(i_squared_a_raw(q, k, n_tilde).map_or(0.0, |v| v.max(0.0)))
}

/// SMD form of [`i_squared_a`], with the adjusted mean weight `w~` in place
/// of `n~` (population variance fixed at 1).
pub fn i_squared_a_smd(q: f64, k: usize, w_tilde: f64) -> Result<f64> {
    i_squared_a(q, k, w_tilde)
}

/// Sample-size weighted mean `sum n_i y_i / sum n_i`.
pub fn size_weighted_mean(dataset: &MetaDataset) -> f64 {
    let (num, den) = dataset
        .studies()
        .iter()
        .fold((0.0, 0.0), |(a, b), s| (a + s.n * s.y, b + s.n));
    num / den
}

/// Mean square between populations `sum n_i (y_i - ybar)^2 / (k-1)`.
pub fn msb_ma(dataset: &MetaDataset) -> f64 {
    if all_equal(dataset) {
        return 0.0;
    }
    let ybar = size_weighted_mean(dataset);
    let ss: f64 = dataset
        .studies()
        .iter()
        .map(|s| s.n * (s.y - ybar).powi(2))
        .sum();
    ss / (dataset.k() as f64 - 1.0)
}

/// Mean square within populations.
///
/// * Mean: `sum n_i (n_i - 1) var_y_i / sum (n_i - 1)`.
/// * MD: pooled over both arms of every study, with `n*(n-1)*se^2`
///   recovering each arm's sum of squares; requires arm detail.
/// * SMD: exactly 1, the effects are already on a unit-variance scale.
pub fn msw_ma(dataset: &MetaDataset) -> Result<f64> {
    match dataset.kind() {
        EffectSizeKind::Mean => {
            let (mut num, mut df) = (0.0, 0.0);
            for s in dataset.studies() {
                if s.n < 2.0 {
                    return Err(Error::InsufficientDegreesOfFreedom {
                        what: "one-arm study (n must be >= 2)",
                    });
                }
                num += s.n * (s.n - 1.0) * s.var_y;
                df += s.n - 1.0;
            }
            Ok(num / df)
        }
        EffectSizeKind::MeanDifference => {
            let arms = dataset.arms().ok_or(Error::MissingArmDetail)?;
            msw_two_arm(arms)
        }
        EffectSizeKind::StandardizedMeanDifference => Ok(1.0),
    }
}

/// Two-arm pooled within mean square over all studies.
pub fn msw_two_arm(arms: &[TwoArmStudy]) -> Result<f64> {
    let (mut num, mut total) = (0.0, 0.0);
    for a in arms {
        if a.n_t < 2 || a.n_c < 2 {
            return Err(Error::InsufficientDegreesOfFreedom {
                what: "two-arm study (n_t and n_c must be >= 2)",
            });
        }
        let (nt, nc) = (f64::from(a.n_t), f64::from(a.n_c));
        num += nt * (nt - 1.0) * a.se_t * a.se_t + nc * (nc - 1.0) * a.se_c * a.se_c;
        total += nt + nc;
    }
    let df = total - 2.0 * arms.len() as f64;
    if df <= 0.0 {
        return Err(Error::InsufficientDegreesOfFreedom {
            what: "two-arm datasets",
        });
    }
    Ok(num / df)
}

fn i_squared_anova_raw(msb: f64, msw: f64, n_tilde: f64) -> f64 {
    (msb - msw) / (msb + (n_tilde - 1.0) * msw)
}

/// `max{(MSB - MSW) / (MSB + (n~ - 1) MSW), 0}`.
pub fn i_squared_anova(msb: f64, msw: f64, n_tilde: f64) -> Result<f64> {
    check_nonnegative("MSB", msb)?;
    check_positive_variance("MSW", msw)?;
    if !(n_tilde.is_finite() && n_tilde > 0.0) {
        return Err(Error::InvalidAdjustedSize { value: n_tilde });
    }
    Ok(i_squared_anova_raw(msb, msw, n_tilde).max(0.0))
}

/// Share of an observed effect's variance that is between-study:
/// `tau2 / (tau2 + sigma_y2)`.
pub fn icc_ht(tau2: f64, sigma_y2: f64) -> Result<f64> {
    check_nonnegative("tau2", tau2)?;
    check_positive_variance("sigma_y2", sigma_y2)?;
    Ok(tau2 / (tau2 + sigma_y2))
}

/// Share of a single observation's variance that is between-study:
/// `tau2 / (tau2 + sigma2_pop)`. Does not depend on study sample sizes.
pub fn icc_ma(tau2: f64, sigma2_pop: f64) -> Result<f64> {
    check_nonnegative("tau2", tau2)?;
    check_positive_variance("sigma2_pop", sigma2_pop)?;
    Ok(tau2 / (tau2 + sigma2_pop))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PopulationScenario {
    pub mu: f64,
    pub tau2: f64,
    pub sigma2_pop: f64,
}

impl PopulationScenario {
    pub fn new(mu: f64, tau2: f64, sigma2_pop: f64) -> Result<Self> {
        check_effect(mu)?;
        check_nonnegative("tau2", tau2)?;
        check_positive_variance("sigma2_pop", sigma2_pop)?;
        Ok(PopulationScenario {
            mu,
            tau2,
            sigma2_pop,
        })
    }

    pub fn icc_ma(&self) -> f64 {
        self.tau2 / (self.tau2 + self.sigma2_pop)
    }
}

/// Which adjusted mean size the I²_A statistic was computed with.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "snake_case")]
pub enum Adjustment {
    /// Adjusted mean sample size n~ (mean and MD).
    SampleSize(f64),
    /// Adjusted mean inverse-variance weight w~ (SMD).
    Weight(f64),
}

impl Adjustment {
    pub fn value(self) -> f64 {
        match self {
            Adjustment::SampleSize(v) | Adjustment::Weight(v) => v,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Adjustment::SampleSize(_) => "adjusted mean sample size n~",
            Adjustment::Weight(_) => "adjusted mean weight w~",
        }
    }
}

/// Every statistic of the heterogeneity analysis for one dataset.
///
/// The `*_raw` fields are the values before truncation at zero; the raw
/// I² and I²_A are `None` when their ratio is undefined (Q = 0).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeterogeneityPanel {
    pub kind: EffectSizeKind,
    pub k: usize,
    pub sum_w: f64,
    pub sum_w2: f64,
    pub sum_wy: f64,
    pub weighted_mean: f64,
    pub q: f64,
    pub tau2_dl_raw: f64,
    pub tau2_dl: f64,
    pub sigma_tilde2: f64,
    pub n_tilde: f64,
    pub adjustment: Adjustment,
    pub i2_raw: Option<f64>,
    pub i2: f64,
    pub i2_a_raw: Option<f64>,
    pub i2_a: f64,
    pub size_weighted_mean: f64,
    pub msb: f64,
    pub msw: f64,
    pub i2_anova_raw: f64,
    pub i2_anova: f64,
}

pub fn full_panel(dataset: &MetaDataset) -> Result<HeterogeneityPanel> {
    let sums = WeightSums::of(dataset);
    let k = dataset.k();
    let q = cochran_q(dataset);
    let tau2_dl_raw = dl_tau2_raw(dataset)?;
    let sigma_tilde2 = sigma_tilde2(dataset)?;
    let n_tilde = adjusted_mean_n(&dataset.sample_sizes())?;
    let adjustment = match dataset.kind() {
        EffectSizeKind::Mean | EffectSizeKind::MeanDifference => Adjustment::SampleSize(n_tilde),
        EffectSizeKind::StandardizedMeanDifference => {
            let weights: Vec<f64> = dataset.weights().collect();
            Adjustment::Weight(adjusted_mean_n(&weights)?)
        }
    };
    let i2_a = match adjustment {
        Adjustment::SampleSize(n) => i_squared_a(q, k, n)?,
        Adjustment::Weight(w) => i_squared_a_smd(q, k, w)?,
    };
    let msb = msb_ma(dataset);
    let msw = msw_ma(dataset)?;
    Ok(HeterogeneityPanel {
        kind: dataset.kind(),
        k,
        sum_w: sums.sum_w,
        sum_w2: sums.sum_w2,
        sum_wy: sums.sum_wy,
        weighted_mean: sums.weighted_mean(),
        q,
        tau2_dl_raw,
        tau2_dl: tau2_dl_raw.max(0.0),
        sigma_tilde2,
        n_tilde,
        adjustment,
        i2_raw: i_squared_raw(q, k),
        i2: i_squared(q, k)?,
        i2_a_raw: i_squared_a_raw(q, k, adjustment.value()),
        i2_a,
        size_weighted_mean: size_weighted_mean(dataset),
        msb,
        msw,
        i2_anova_raw: i_squared_anova_raw(msb, msw, n_tilde),
        i2_anova: i_squared_anova(msb, msw, n_tilde)?,
    })
}
