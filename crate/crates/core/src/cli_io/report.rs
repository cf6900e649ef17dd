//! Analysis reports and simulation output.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::input::{read_one_arm, read_two_arm, InputFile};
use crate::effects::{self, SmdMethod};
use crate::error::Result;
use crate::model::{self, EffectSizeKind, HeterogeneityPanel, MetaDataset, TwoArmStudy};
use crate::sim::{SimResult, Statistic};

/// One input study as it entered the analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub label: String,
    pub y: f64,
    pub var_y: f64,
    pub n: f64,
    pub weight: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arms: Option<TwoArmStudy>,
}

/// Formula behind a reported value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub statistic: String,
    pub formula: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub tool: String,
    pub version: String,
    pub source: String,
    pub input_sha256: String,
    pub kind: EffectSizeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub smd_method: Option<SmdMethod>,
    pub adjustment: String,
    pub studies: Vec<StudyRow>,
    pub panel: HeterogeneityPanel,
    pub provenance: Vec<Provenance>,
}

fn provenance(kind: EffectSizeKind) -> Vec<Provenance> {
    let msw = match kind {
        EffectSizeKind::Mean => "sum n_i (n_i - 1) var_i / sum (n_i - 1)",
        EffectSizeKind::MeanDifference => {
            "sum [n_Ti (n_Ti - 1) se_Ti^2 + n_Ci (n_Ci - 1) se_Ci^2] / (sum (n_Ti + n_Ci) - 2k)"
        }
        EffectSizeKind::StandardizedMeanDifference => "1 (unit within-study variance)",
    };
    let i2_a = match kind {
        EffectSizeKind::StandardizedMeanDifference => {
            "max{(Q - (k - 1)) / (Q + (k - 1)(w~ - 1)), 0}, w~ = (sum w - sum w^2 / sum w) / (k - 1)"
        }
        _ => "max{(Q - (k - 1)) / (Q + (k - 1)(n~ - 1)), 0}, n~ = (sum n - sum n^2 / sum n) / (k - 1)",
    };
    [
        ("weight", "w_i = 1 / var_i"),
        ("Q", "sum w_i (y_i - ybar_w)^2"),
        ("tau2_DL", "max{(Q - (k - 1)) / (sum w - sum w^2 / sum w), 0}"),
        ("sigma_tilde2", "(k - 1) / (sum w - sum w^2 / sum w)"),
        ("I2", "max{(Q - (k - 1)) / Q, 0}"),
        ("I2_A", i2_a),
        ("MSB", "sum n_i (y_i - ybar_n)^2 / (k - 1)"),
        ("MSW", msw),
        ("I2_ANOVA", "max{(MSB - MSW) / (MSB + (n~ - 1) MSW), 0}"),
    ]
    .into_iter()
    .map(|(s, f)| Provenance {
        statistic: s.to_string(),
        formula: f.to_string(),
    })
    .collect()
}

impl ReportDocument {
    pub fn new(
        input: &InputFile,
        labels: &[String],
        dataset: &MetaDataset,
        smd_method: Option<SmdMethod>,
    ) -> Result<ReportDocument> {
        let panel = model::full_panel(dataset)?;
        let arms = dataset.arms();
        let studies = dataset
            .studies()
            .iter()
            .enumerate()
            .map(|(i, s)| StudyRow {
                label: labels.get(i).cloned().unwrap_or_else(|| format!("study {}", i + 1)),
                y: s.y,
                var_y: s.var_y,
                n: s.n,
                weight: s.weight(),
                arms: arms.map(|a| a[i]),
            })
            .collect();
        Ok(ReportDocument {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            source: input.source.clone(),
            input_sha256: input.sha256(),
            kind: dataset.kind(),
            smd_method,
            adjustment: panel.adjustment.label().to_string(),
            studies,
            panel,
            provenance: provenance(dataset.kind()),
        })
    }

    /// Parses `input` according to `kind` and analyses it.
    pub fn analyze(input: &InputFile, kind: EffectSizeKind, method: SmdMethod) -> Result<ReportDocument> {
        match kind {
            EffectSizeKind::Mean => {
                let table = read_one_arm(&input.bytes)?;
                ReportDocument::new(input, &table.labels, &table.dataset()?, None)
            }
            EffectSizeKind::MeanDifference | EffectSizeKind::StandardizedMeanDifference => {
                let table = read_two_arm(&input.bytes)?;
                let ds = effects::two_arm_dataset(&table.studies, kind, method)?;
                let method = (kind == EffectSizeKind::StandardizedMeanDifference).then_some(method);
                ReportDocument::new(input, &table.labels, &ds, method)
            }
        }
    }

    /// `(name, value)` pairs of the headline panel, in display order.
    pub fn statistics(&self) -> Vec<(&'static str, f64)> {
        let p = &self.panel;
        let adj = match p.adjustment {
            model::Adjustment::SampleSize(_) => "n_tilde",
            model::Adjustment::Weight(_) => "w_tilde",
        };
        let mut out = vec![
            ("k", p.k as f64),
            ("sum_w", p.sum_w),
            ("sum_w2", p.sum_w2),
            ("sum_wy", p.sum_wy),
            ("weighted_mean", p.weighted_mean),
            ("Q", p.q),
            ("tau2_DL", p.tau2_dl),
            ("sigma_tilde2", p.sigma_tilde2),
            ("I2", p.i2),
        ];
        if adj == "w_tilde" {
            out.push(("n_tilde", p.n_tilde));
        }
        out.extend([
            (adj, p.adjustment.value()),
            ("I2_A", p.i2_a),
            ("size_weighted_mean", p.size_weighted_mean),
            ("MSB", p.msb),
            ("MSW", p.msw),
            ("I2_ANOVA", p.i2_anova),
        ]);
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<ReportDocument> {
        serde_json::from_str(text).map_err(|e| crate::error::Error::Parse {
            message: format!("report: {e}"),
        })
    }

    /// `statistic,value` rows at full precision.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("statistic,value\n");
        for (name, v) in self.statistics() {
            let _ = writeln!(out, "{name},{v}");
        }
        out
    }

    /// Human-readable summary, values at 4 decimal places.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}  source: {}", self.tool, self.version, self.source);
        let _ = writeln!(out, "sha256: {}", self.input_sha256);
        let method = self.smd_method.map(|m| format!(" ({m})")).unwrap_or_default();
        let _ = writeln!(out, "kind: {}{method}", self.kind);
        let _ = writeln!(out);
        let width = self.studies.iter().map(|s| s.label.len()).max().unwrap_or(5).max(5);
        let _ = writeln!(
            out,
            "{:<width$}  {:>10}  {:>10}  {:>8}  {:>10}",
            "study", "y", "var_y", "n", "weight"
        );
        for s in &self.studies {
            let _ = writeln!(
                out,
                "{:<width$}  {:>10.4}  {:>10.4}  {:>8.4}  {:>10.4}",
                s.label, s.y, s.var_y, s.n, s.weight
            );
        }
        let _ = writeln!(out);
        for (name, v) in self.statistics() {
            if name == "k" {
                let _ = writeln!(out, "{name:<20}{v}");
            } else {
                let _ = writeln!(out, "{name:<20}{v:.4}");
            }
        }
        out
    }
}

pub const SIM_CSV_HEADER: &str = "n_base,statistic,mean,q1,median,q3,lo_whisker,hi_whisker,icc_ma_true";

/// One row per grid point and statistic, full precision.
pub fn simulation_csv(results: &[SimResult]) -> String {
    let mut out = String::from(SIM_CSV_HEADER);
    out.push('\n');
    for r in results {
        for stat in Statistic::ALL {
            let s = r.summaries.get(stat);
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.n_base,
                stat.name(),
                s.mean,
                s.q1,
                s.median,
                s.q3,
                s.lo_whisker,
                s.hi_whisker,
                r.icc_ma_true
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_is_exact() {
        let input = InputFile::bundled("jeong2014.csv").unwrap();
        let doc = ReportDocument::analyze(&input, EffectSizeKind::Mean, SmdMethod::HedgesG).unwrap();
        let back = ReportDocument::from_json(&doc.to_json()).unwrap();
        assert_eq!(back, doc);
        for (a, b) in back.statistics().iter().zip(doc.statistics()) {
            assert_eq!(a.1.to_bits(), b.1.to_bits());
        }
    }

    #[test]
    fn smd_report_uses_weight_adjustment() {
        let input = InputFile::bundled("avery2022.csv").unwrap();
        let doc = ReportDocument::analyze(
            &input,
            EffectSizeKind::StandardizedMeanDifference,
            SmdMethod::HedgesG,
        )
        .unwrap();
        assert!(matches!(doc.panel.adjustment, model::Adjustment::Weight(_)));
        assert_eq!(doc.smd_method, Some(SmdMethod::HedgesG));
        assert!(doc.studies.iter().all(|s| s.arms.is_some()));
        assert_eq!(ReportDocument::from_json(&doc.to_json()).unwrap(), doc);
        assert!(doc.to_csv().contains("w_tilde,"));
    }

    #[test]
    fn table_has_four_decimals() {
        let input = InputFile::bundled("jeong2014.csv").unwrap();
        let doc = ReportDocument::analyze(&input, EffectSizeKind::Mean, SmdMethod::HedgesG).unwrap();
        let table = doc.to_table();
        assert!(table.contains("Q                   106.2"), "{table}");
        assert!(table.contains(&input.sha256()));
    }

    #[test]
    fn checksum_is_sha256() {
        let f = InputFile {
            source: "x".into(),
            bytes: b"abc".to_vec(),
        };
        assert_eq!(
            f.sha256(),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
