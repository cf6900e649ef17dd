//! Heterogeneity measures for random-effects meta-analysis: Cochran's Q, I²,
//! the DerSimonian-Laird τ², and the sample-size-invariant estimators I²_A
//! and I²_ANOVA of ICC_MA, plus a Monte Carlo harness comparing them.

pub mod cli_io;
pub mod effects;
pub mod error;
pub mod model;
pub mod sim;

pub use effects::SmdMethod;
pub use error::{Error, Result};
pub use model::{EffectSizeKind, HeterogeneityPanel, MetaDataset, OneArmStudy, Study, TwoArmStudy};
