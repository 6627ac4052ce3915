//! Imbalance-aware metrics, stratified folds and repeated cross-validation.

mod cv;
mod folds;
mod metrics;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use cv::{
    fit_and_predict, repeated_cv, repeated_plans, run_folds, score_fold, CvSummary, FoldOutcome,
    FoldRecord, MetricStats, ModelSpec,
};
pub use folds::{stratified_folds, stratified_split, FoldPlan};
pub use metrics::{
    auc, confusion, gmean, metrics, swap_positive_metrics, ConfusionMatrix, Metric, MetricsReport,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Description {
    pub mean: f64,
    pub sd: f64,
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
}

/// Quantile of sorted data by linear interpolation between order statistics.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Mean, population SD, min, quartiles and max.
pub fn describe(values: &[f64]) -> Result<Description> {
    if values.is_empty() {
        return Err(Error::invalid("cannot describe an empty sample"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    Ok(Description {
        mean,
        sd,
        min: sorted[0],
        q25: quantile(&sorted, 0.25),
        median: quantile(&sorted, 0.5),
        q75: quantile(&sorted, 0.75),
        max: sorted[sorted.len() - 1],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn describe_examples() {
        let d = describe(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!((d.mean, d.median), (2.0, 2.0));
        assert_eq!(describe(&[4.0; 5]).unwrap().sd, 0.0);
        let d = describe(&[0.0, 1.0]).unwrap();
        assert_eq!((d.q25, d.q75), (0.25, 0.75));
        assert!(describe(&[]).is_err());
    }
}
