//! Comparison arms: Chi-square top-k feature selection and PCA projection,
//! both feeding an untuned booster.

mod chi2;
mod pca;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{self, CvSummary, FoldOutcome, MetricStats, ModelSpec};
use crate::gbt::{self, BoosterParams};
use crate::sparse::SparseMatrix;

pub use chi2::{chi2_scores, chi2_select};
pub use pca::{pca_fit, pca_transform, PcaModel, PCA_MAX_ITER, PCA_TOL};

/// Repeated stratified CV settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CvConfig {
    pub repeats: usize,
    pub folds: usize,
    pub seed: u64,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            repeats: 50,
            folds: 10,
            seed: 0,
        }
    }
}

/// Cross-validates the default booster on the `k` best Chi-square features.
/// Features are scored on the full matrix, as a filter method would be applied.
pub fn chi2_arm(x: &SparseMatrix, labels: &[u8], k: usize, cv: CvConfig) -> Result<(Vec<usize>, CvSummary)> {
    let scores = chi2_scores(x, labels)?;
    let selected = chi2_select(&scores, k)?;
    let spec = ModelSpec {
        params: BoosterParams::default(),
        features: Some(selected.clone()),
    };
    let summary = eval::repeated_cv(x, labels, &spec, cv.repeats, cv.folds, cv.seed)?;
    Ok((selected, summary))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PcaSweepRow {
    pub components: usize,
    pub accuracy_mean: f64,
    pub accuracy_sd: f64,
}

/// For every component count in `k_range`: fits PCA inside each training fold,
/// projects both splits, trains `params` and records held-out accuracy.
pub fn pca_sweep(
    x: &SparseMatrix,
    labels: &[u8],
    k_range: &[usize],
    cv: CvConfig,
    params: &BoosterParams,
) -> Result<Vec<PcaSweepRow>> {
    if k_range.is_empty() {
        return Ok(Vec::new());
    }
    if k_range.contains(&0) {
        return Err(Error::Config("component counts must be at least 1".into()));
    }
    let k_max = *k_range.iter().max().expect("non-empty");
    let plans = eval::repeated_plans(labels, cv.repeats, cv.folds, cv.seed)?;
    // accuracy[plan][position in k_range]
    let per_plan: Vec<Vec<f64>> = plans
        .par_iter()
        .map(|plan| -> Result<Vec<f64>> {
            let xtr = x.select_rows(&plan.train);
            let xte = x.select_rows(&plan.test);
            let model = pca_fit(&xtr, k_max)?;
            let ztr = pca_transform(&model, &xtr)?;
            let zte = pca_transform(&model, &xte)?;
            let ytr: Vec<u8> = plan.train.iter().map(|&i| labels[i]).collect();
            let yte: Vec<u8> = plan.test.iter().map(|&i| labels[i]).collect();
            k_range
                .iter()
                .map(|&k| {
                    let prefix = |z: &[Vec<f64>]| -> Vec<Vec<f64>> { z.iter().map(|r| r[..k].to_vec()).collect() };
                    let tr = dense_to_sparse(&prefix(&ztr), k)?;
                    let te = dense_to_sparse(&prefix(&zte), k)?;
                    let booster = gbt::fit(&tr, &ytr, params)?;
                    let scores = booster.predict_proba(&te)?;
                    let y_pred = gbt::labels_from_proba(&scores, 0.5)?;
                    let rec = eval::score_fold(
                        plan.repeat,
                        plan.fold,
                        &FoldOutcome {
                            y_true: yte.clone(),
                            y_pred,
                            scores,
                        },
                    )?;
                    Ok(rec.report.accuracy)
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    Ok(k_range
        .iter()
        .enumerate()
        .map(|(pos, &k)| {
            let vals: Vec<f64> = per_plan.iter().map(|accs| accs[pos]).collect();
            let s = MetricStats::from_values(&vals).expect("at least one fold");
            PcaSweepRow {
                components: k,
                accuracy_mean: s.avg,
                accuracy_sd: s.sd,
            }
        })
        .collect())
}

fn dense_to_sparse(rows: &[Vec<f64>], cols: usize) -> Result<SparseMatrix> {
    if rows.is_empty() {
        return Ok(SparseMatrix::empty(cols));
    }
    SparseMatrix::from_dense(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    /// Three independent axes with variances about 9, 4 and 1. The label needs
    /// the two leading axes: the first alone caps accuracy near 0.75, the
    /// first two reach 1. The leading axis carries wide noise so that the slight
    /// tilt of a sampled first component toward the second axis leaks nothing.
    fn layered(n: usize) -> (SparseMatrix, Vec<u8>) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for _ in 0..n {
            let s: [f64; 3] = [0; 3].map(|_| if rng.gen_bool(0.5) { 1.0 } else { -1.0 });
            let z = [3.0 * s[0], 2.0 * s[1], s[2]];
            let jitter = |rng: &mut rand_chacha::ChaCha8Rng| rng.gen_range(-0.05..0.05);
            rows.push(vec![
                z[0] + rng.gen_range(-1.0..1.0),
                z[1] + jitter(&mut rng),
                z[2] + jitter(&mut rng),
                jitter(&mut rng),
                jitter(&mut rng),
            ]);
            y.push(u8::from(s[0] > 0.0 && s[1] > 0.0));
        }
        (SparseMatrix::from_dense(&rows).unwrap(), y)
    }

    #[test]
    fn accuracy_grows_with_informative_components() {
        let (x, y) = layered(160);
        let cv = CvConfig {
            repeats: 2,
            folds: 4,
            seed: 5,
        };
        let params = BoosterParams {
            n_estimators: 20,
            ..BoosterParams::default()
        };
        let rows = pca_sweep(&x, &y, &[1, 2, 3], cv, &params).unwrap();
        assert_eq!(rows.len(), 3);
        assert!((rows[0].accuracy_mean - 0.75).abs() < 0.1, "{rows:?}");
        for w in rows.windows(2) {
            assert!(w[1].accuracy_mean >= w[0].accuracy_mean, "{rows:?}");
        }
        assert!(rows[1].accuracy_mean > 0.97, "{rows:?}");
        let single = pca_sweep(&x, &y, &[1], cv, &params).unwrap();
        assert_eq!(single.len(), 1);
        assert_eq!(single[0], rows[0]);
    }

    #[test]
    fn chi2_arm_restricts_features() {
        let (x, y) = layered(80);
        let shifted: Vec<Vec<f64>> = x.to_dense().into_iter().map(|r| r.iter().map(|v| v + 4.0).collect()).collect();
        let x = SparseMatrix::from_dense(&shifted).unwrap();
        let cv = CvConfig {
            repeats: 1,
            folds: 2,
            seed: 1,
        };
        let (sel, summary) = chi2_arm(&x, &y, 2, cv).unwrap();
        assert_eq!(sel.len(), 2);
        assert_eq!(summary.records.len(), 2);
    }
}
