//! Effect sizes derived from two-arm summary data.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{EffectSizeKind, MetaDataset, Study, TwoArmStudy};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SmdMethod {
    /// Cohen's d with the small-sample correction factor J applied.
    #[default]
    #[serde(rename = "hedges")]
    HedgesG,
    /// Uncorrected standardized difference.
    #[serde(rename = "cohen")]
    CohensD,
}

impl SmdMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            SmdMethod::HedgesG => "hedges",
            SmdMethod::CohensD => "cohen",
        }
    }
}

impl fmt::Display for SmdMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SmdMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hedges" => Ok(SmdMethod::HedgesG),
            "cohen" => Ok(SmdMethod::CohensD),
            other => Err(Error::Parse {
                message: format!("unknown SMD method `{other}` (expected hedges or cohen)"),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedEffect {
    pub y: f64,
    pub var_y: f64,
    pub n_eff: f64,
}

impl From<DerivedEffect> for Study {
    fn from(e: DerivedEffect) -> Self {
        Study {
            y: e.y,
            var_y: e.var_y,
            n: e.n_eff,
        }
    }
}

fn checked(study: &TwoArmStudy) -> Result<()> {
    study.validate().map_err(|e| match e {
        Error::InsufficientDegreesOfFreedom { .. } => e,
        other => Error::InvalidStudy {
            reason: other.to_string(),
        },
    })
}

/// Raw mean difference; its variance is the sum of the squared arm
/// standard errors.
pub fn md_effect(study: &TwoArmStudy) -> Result<DerivedEffect> {
    checked(study)?;
    Ok(DerivedEffect {
        y: study.y_t - study.y_c,
        var_y: study.se_t * study.se_t + study.se_c * study.se_c,
        n_eff: study.effective_n(),
    })
}

/// Pooled within-study standard deviation. Arm SDs are rebuilt from the
/// standard errors as `se * sqrt(n)` and pooled over `n_t + n_c - 2` df.
pub fn pooled_sd(study: &TwoArmStudy) -> Result<f64> {
    checked(study)?;
    let (nt, nc) = (f64::from(study.n_t), f64::from(study.n_c));
    let ss = nt * (nt - 1.0) * study.se_t.powi(2) + nc * (nc - 1.0) * study.se_c.powi(2);
    Ok((ss / (nt + nc - 2.0)).sqrt())
}

/// Small-sample bias correction `J = 1 - 3 / (4 (n_t + n_c - 2) - 1)`.
pub fn hedges_correction(n_t: u32, n_c: u32) -> f64 {
    let df = f64::from(n_t) + f64::from(n_c) - 2.0;
    1.0 - 3.0 / (4.0 * df - 1.0)
}

/// Standardized mean difference and its large-sample variance
/// `(n_t + n_c)/(n_t n_c) + y^2 / (2 (n_t + n_c))`, where `y` is the
/// reported estimate (g for Hedges, d for Cohen).
pub fn smd_effect(study: &TwoArmStudy, method: SmdMethod) -> Result<DerivedEffect> {
    let sd = pooled_sd(study)?;
    if sd == 0.0 {
        return Err(Error::DegenerateVariance);
    }
    let d = (study.y_t - study.y_c) / sd;
    let y = match method {
        SmdMethod::HedgesG => hedges_correction(study.n_t, study.n_c) * d,
        SmdMethod::CohensD => d,
    };
    let (nt, nc) = (f64::from(study.n_t), f64::from(study.n_c));
    Ok(DerivedEffect {
        y,
        var_y: (nt + nc) / (nt * nc) + y * y / (2.0 * (nt + nc)),
        n_eff: study.effective_n(),
    })
}

/// Derived effect of one study for the given two-arm kind.
pub fn derive_effect(
    study: &TwoArmStudy,
    kind: EffectSizeKind,
    method: SmdMethod,
) -> Result<DerivedEffect> {
    match kind {
        EffectSizeKind::MeanDifference => md_effect(study),
        EffectSizeKind::StandardizedMeanDifference => smd_effect(study, method),
        EffectSizeKind::Mean => Err(Error::KindMismatch {
            expected: "md or smd",
            found: "mean",
        }),
    }
}

/// Builds an MD or SMD dataset, keeping the arm detail attached.
pub fn two_arm_dataset(
    studies: &[TwoArmStudy],
    kind: EffectSizeKind,
    method: SmdMethod,
) -> Result<MetaDataset> {
    let effects = studies
        .iter()
        .enumerate()
        .map(|(i, s)| {
            derive_effect(s, kind, method)
                .map(Study::from)
                .map_err(|e| e.at_row(i + 1))
        })
        .collect::<Result<Vec<_>>>()?;
    MetaDataset::new(kind, effects)?.with_arms(studies.to_vec())
}

pub fn mean_difference_dataset(studies: &[TwoArmStudy]) -> Result<MetaDataset> {
    two_arm_dataset(studies, EffectSizeKind::MeanDifference, SmdMethod::default())
}

pub fn standardized_dataset(studies: &[TwoArmStudy], method: SmdMethod) -> Result<MetaDataset> {
    two_arm_dataset(studies, EffectSizeKind::StandardizedMeanDifference, method)
}
