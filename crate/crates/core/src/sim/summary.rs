use serde::{Deserialize, Serialize};

/// Boxplot summary of a sample.
///
/// Quartiles are Tukey's hinges (the convention of R's `fivenum` and
/// `boxplot`); whiskers are the most extreme observations within 1.5 IQR
/// of the hinges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxSummary {
    pub count: usize,
    pub mean: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub lo_whisker: f64,
    pub hi_whisker: f64,
}

impl BoxSummary {
    /// Returns `None` for an empty sample or one containing NaN.
    pub fn from_values(values: &[f64]) -> Option<BoxSummary> {
        if values.is_empty() || values.iter().any(|v| v.is_nan()) {
            return None;
        }
        let mut x = values.to_vec();
        x.sort_by(f64::total_cmp);
        let n = x.len();
        // 1-based fractional positions of the five-number summary
        let n4 = ((n + 3) / 2) as f64 / 2.0;
        let at = |d: f64| 0.5 * (x[d.floor() as usize - 1] + x[d.ceil() as usize - 1]);
        let q1 = at(n4);
        let median = at((n + 1) as f64 / 2.0);
        let q3 = at((n + 1) as f64 - n4);
        let fence = 1.5 * (q3 - q1);
        let lo_whisker = *x.iter().find(|&&v| v >= q1 - fence).unwrap_or(&x[0]);
        let hi_whisker = *x.iter().rev().find(|&&v| v <= q3 + fence).unwrap_or(&x[n - 1]);
        Some(BoxSummary {
            count: n,
            mean: x.iter().sum::<f64>() / n as f64,
            min: x[0],
            q1,
            median,
            q3,
            max: x[n - 1],
            lo_whisker,
            hi_whisker,
        })
    }
}
