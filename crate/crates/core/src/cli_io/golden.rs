//! Built-in analyses with published reference values.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::input::InputFile;
use super::report::ReportDocument;
use crate::effects::SmdMethod;
use crate::error::Result;
use crate::model::{self, EffectSizeKind};

pub const TOLERANCE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExampleName {
    JeongMean,
    AveryMd,
    AverySmd,
    Motivating,
}

impl ExampleName {
    pub const ALL: [ExampleName; 4] = [
        ExampleName::JeongMean,
        ExampleName::AveryMd,
        ExampleName::AverySmd,
        ExampleName::Motivating,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExampleName::JeongMean => "jeong-mean",
            ExampleName::AveryMd => "avery-md",
            ExampleName::AverySmd => "avery-smd",
            ExampleName::Motivating => "motivating",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldenCheck {
    pub name: String,
    pub reported: f64,
    pub computed: f64,
    pub tolerance: f64,
    /// Headline checks decide the exit status of `example`.
    pub headline: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleReport {
    pub name: String,
    pub checks: Vec<GoldenCheck>,
}

impl ExampleReport {
    pub fn headline_pass(&self) -> bool {
        self.checks.iter().filter(|c| c.headline).all(|c| c.pass)
    }

    pub fn to_table(&self) -> String {
        let mut out = format!("example {}\n", self.name);
        let _ = writeln!(
            out,
            "{:<16}{:>14}{:>14}  {:<6}",
            "statistic", "reported", "computed", "result"
        );
        for c in &self.checks {
            let mark = if c.headline { "*" } else { "" };
            let _ = writeln!(
                out,
                "{:<16}{:>14.4}{:>14.4}  {}{}",
                c.name,
                c.reported,
                c.computed,
                if c.pass { "pass" } else { "FAIL" },
                mark
            );
        }
        let _ = writeln!(
            out,
            "(* headline; tolerance ±{TOLERANCE}) overall: {}",
            if self.headline_pass() { "pass" } else { "FAIL" }
        );
        out
    }
}

struct Checks(Vec<GoldenCheck>);

impl Checks {
    fn add(&mut self, name: &str, reported: f64, computed: f64, headline: bool) {
        self.0.push(GoldenCheck {
            name: name.to_string(),
            reported,
            computed,
            tolerance: TOLERANCE,
            headline,
            // slack for reference values that sit exactly on a rounding edge
            pass: (computed - reported).abs() <= TOLERANCE + 1e-12,
        });
    }

    fn per_study(&mut self, name: &str, reported: &[f64], computed: impl Iterator<Item = f64>) {
        for (i, (r, c)) in reported.iter().zip(computed).enumerate() {
            self.add(&format!("{name}[{}]", i + 1), *r, c, false);
        }
    }
}

fn bundled_report(file: &str, kind: EffectSizeKind) -> Result<ReportDocument> {
    let input = InputFile::bundled(file).expect("bundled dataset");
    ReportDocument::analyze(&input, kind, SmdMethod::HedgesG)
}

pub fn run_example(name: ExampleName) -> Result<ExampleReport> {
    let mut c = Checks(Vec::new());
    match name {
        ExampleName::JeongMean => {
            let doc = bundled_report("jeong2014.csv", EffectSizeKind::Mean)?;
            let p = &doc.panel;
            c.add("sum_w", 7.68, p.sum_w, false);
            c.add("sum_wy", -43.39, p.sum_wy, false);
            c.add("Q", 106.26, p.q, true);
            c.add("I2", 0.92, p.i2, true);
            c.add("n_tilde", 8.97, p.n_tilde, false);
            c.add("I2_A", 0.55, p.i2_a, true);
            c.add("ybar_n", -7.55, p.size_weighted_mean, false);
            c.add("MSB", 189.83, p.msb, false);
            c.add("MSW", 25.81, p.msw, false);
            c.add("I2_ANOVA", 0.41, p.i2_anova, true);
        }
        ExampleName::AveryMd => {
            let doc = bundled_report("avery2022.csv", EffectSizeKind::MeanDifference)?;
            let p = &doc.panel;
            c.per_study("y", &[32.0, -4.8, -14.8], doc.studies.iter().map(|s| s.y));
            c.per_study("var_y", &[272.14, 20.29, 65.48], doc.studies.iter().map(|s| s.var_y));
            c.per_study("n_eff", &[3.60, 26.67, 8.74], doc.studies.iter().map(|s| s.n));
            c.add("sum_w", 0.07, p.sum_w, false);
            c.add("Q", 6.50, p.q, true);
            c.add("I2", 0.69, p.i2, true);
            c.add("n_tilde", 9.24, p.n_tilde, false);
            c.add("I2_A", 0.20, p.i2_a, true);
            c.add("MSB", 2848.76, p.msb, false);
            c.add("MSW", 586.93, p.msw, false);
            c.add("I2_ANOVA", 0.29, p.i2_anova, true);
        }
        ExampleName::AverySmd => {
            let doc = bundled_report("avery2022.csv", EffectSizeKind::StandardizedMeanDifference)?;
            let p = &doc.panel;
            c.per_study("g", &[0.96, -0.20, -0.62], doc.studies.iter().map(|s| s.y));
            c.per_study("var_g", &[0.31, 0.04, 0.12], doc.studies.iter().map(|s| s.var_y));
            c.add("sum_w", 38.12, p.sum_w, false);
            c.add("sum_wy", -7.43, p.sum_wy, false);
            c.add("sum_w2", 784.06, p.sum_w2, false);
            c.add("Q", 5.83, p.q, true);
            c.add("I2", 0.66, p.i2, true);
            c.add("w_tilde", 8.78, p.adjustment.value(), false);
            c.add("I2_A", 0.18, p.i2_a, true);
            c.add("ybar_n", -0.19, p.size_weighted_mean, false);
            c.add("MSB", 3.19, p.msb, false);
            c.add("MSW", 1.0, p.msw, false);
            c.add("I2_ANOVA", 0.19, p.i2_anova, true);
        }
        ExampleName::Motivating => {
            // Three true effects -0.05, 0, 0.05 and a unit-variance outcome,
            // observed with 400 or 4000 participants per study.
            let tau2 = [-0.05f64, 0.0, 0.05].iter().map(|m| m * m).sum::<f64>() / 2.0;
            c.add("tau2", 0.0025, tau2, false);
            c.add("ICC_HT(n=400)", 0.50, model::icc_ht(tau2, 1.0 / 400.0)?, true);
            c.add("ICC_HT(n=4000)", 0.909, model::icc_ht(tau2, 1.0 / 4000.0)?, true);
            c.add("ICC_MA", 0.0025, model::icc_ma(tau2, 1.0)?, true);
        }
    }
    Ok(ExampleReport {
        name: name.as_str().to_string(),
        checks: c.0,
    })
}
