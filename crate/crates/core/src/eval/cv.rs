use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::folds::{stratified_folds, FoldPlan};
use super::metrics::{auc, confusion, metrics, Metric, MetricsReport};
use crate::error::{Error, Result};
use crate::gbt::{self, BoosterParams};
use crate::sparse::SparseMatrix;

/// Booster parameters plus an optional feature subset to restrict the matrix to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub params: BoosterParams,
    pub features: Option<Vec<usize>>,
}

/// Held-out predictions of one fold.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldOutcome {
    pub y_true: Vec<u8>,
    pub y_pred: Vec<u8>,
    pub scores: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldRecord {
    pub repeat: usize,
    pub fold: usize,
    pub report: MetricsReport,
    /// Degenerate fold: a 0/0 ratio or a single-class test set.
    pub flagged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricStats {
    pub min: f64,
    pub avg: f64,
    pub max: f64,
    /// Population standard deviation.
    pub sd: f64,
    pub count: usize,
}

impl MetricStats {
    pub fn from_values(values: &[f64]) -> Option<MetricStats> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let avg = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - avg).powi(2)).sum::<f64>() / n;
        Some(MetricStats {
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            avg,
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            sd: var.sqrt(),
            count: values.len(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvSummary {
    pub records: Vec<FoldRecord>,
    pub stats: Vec<(Metric, MetricStats)>,
}

impl CvSummary {
    /// Aggregates per-fold records; metrics absent from every record are omitted.
    pub fn from_records(records: Vec<FoldRecord>) -> CvSummary {
        let stats = Metric::ALL
            .into_iter()
            .filter_map(|m| {
                let vals: Vec<f64> = records.iter().filter_map(|r| r.report.get(m)).collect();
                MetricStats::from_values(&vals).map(|s| (m, s))
            })
            .collect();
        CvSummary { records, stats }
    }

    pub fn stat(&self, m: Metric) -> Option<&MetricStats> {
        self.stats.iter().find(|(k, _)| *k == m).map(|(_, s)| s)
    }

    pub fn values(&self, m: Metric) -> Vec<f64> {
        self.records.iter().filter_map(|r| r.report.get(m)).collect()
    }

    pub fn flagged(&self) -> usize {
        self.records.iter().filter(|r| r.flagged).count()
    }
}

/// Fold plans for `repeats` repetitions; repetition `r` is shuffled with `seed + r`.
pub fn repeated_plans(labels: &[u8], repeats: usize, k: usize, seed: u64) -> Result<Vec<FoldPlan>> {
    let mut plans = Vec::with_capacity(repeats * k);
    for r in 0..repeats {
        for mut p in stratified_folds(labels, k, seed.wrapping_add(r as u64))? {
            p.repeat = r;
            plans.push(p);
        }
    }
    Ok(plans)
}

/// Scores one fold's held-out predictions.
pub fn score_fold(repeat: usize, fold: usize, outcome: &FoldOutcome) -> Result<FoldRecord> {
    let cm = confusion(&outcome.y_true, &outcome.y_pred)?;
    let auc = match auc(&outcome.y_true, &outcome.scores) {
        Ok(a) => Some(a),
        Err(Error::SingleClass) => None,
        Err(e) => return Err(e),
    };
    let report = metrics(&cm).with_auc(auc);
    Ok(FoldRecord {
        repeat,
        fold,
        flagged: report.degenerate || auc.is_none(),
        report,
    })
}

/// Evaluates every plan with `evaluate`, in parallel, keeping plan order.
pub fn run_folds<F>(plans: &[FoldPlan], evaluate: F) -> Result<Vec<FoldRecord>>
where
    F: Fn(&FoldPlan) -> Result<FoldOutcome> + Sync,
{
    plans
        .par_iter()
        .map(|p| score_fold(p.repeat, p.fold, &evaluate(p)?))
        .collect()
}

/// Trains on the plan's training rows and predicts its test rows.
/// A training split holding a single class predicts that class everywhere.
pub fn fit_and_predict(x: &SparseMatrix, labels: &[u8], params: &BoosterParams, plan: &FoldPlan) -> Result<FoldOutcome> {
    let xtr = x.select_rows(&plan.train);
    let ytr: Vec<u8> = plan.train.iter().map(|&i| labels[i]).collect();
    let xte = x.select_rows(&plan.test);
    let y_true: Vec<u8> = plan.test.iter().map(|&i| labels[i]).collect();
    let scores = match gbt::fit(&xtr, &ytr, params) {
        Ok(model) => model.predict_proba(&xte)?,
        Err(Error::SingleClass) => {
            log::warn!("repeat {} fold {}: training split has one class", plan.repeat, plan.fold);
            vec![f64::from(ytr.first().copied().unwrap_or(0)); xte.rows()]
        }
        Err(e) => return Err(e),
    };
    let y_pred = gbt::labels_from_proba(&scores, 0.5)?;
    Ok(FoldOutcome { y_true, y_pred, scores })
}

/// Repeated stratified k-fold cross-validation of one model specification.
pub fn repeated_cv(
    x: &SparseMatrix,
    labels: &[u8],
    spec: &ModelSpec,
    repeats: usize,
    k: usize,
    seed: u64,
) -> Result<CvSummary> {
    if labels.len() != x.rows() {
        return Err(Error::Shape {
            expected: x.rows(),
            actual: labels.len(),
        });
    }
    spec.params.validate()?;
    let owned;
    let x = match &spec.features {
        Some(f) => {
            owned = x.select_columns(f)?;
            &owned
        }
        None => x,
    };
    let plans = repeated_plans(labels, repeats, k, seed)?;
    let records = run_folds(&plans, |p| fit_and_predict(x, labels, &spec.params, p))?;
    Ok(CvSummary::from_records(records))
}
