//! Gradient-boosted decision trees for binary classification.
//!
//! Second-order boosting on the logistic loss: each tree is grown greedily
//! on per-row gradients and hessians of the current ensemble, leaf weights
//! are the regularized Newton step `-G / (H + lambda)`, and a split is only
//! kept when its gain exceeds `gamma`.

mod tree;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

pub use tree::TreeNode;

/// The seven tuned hyperparameters plus the fixed ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoosterParams {
    pub learning_rate: f64,
    pub n_estimators: usize,
    pub max_depth: usize,
    pub min_child_weight: f64,
    pub gamma: f64,
    pub subsample: f64,
    pub colsample_bytree: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    /// Initial margin (log-odds). `None` uses the training prior.
    #[serde(default)]
    pub base_score: Option<f64>,
}

pub const DEFAULT_BOOSTER_SEED: u64 = 723;

fn default_seed() -> u64 {
    DEFAULT_BOOSTER_SEED
}

fn default_lambda() -> f64 {
    1.0
}

impl Default for BoosterParams {
    /// Untuned defaults used by the baseline arms.
    fn default() -> Self {
        BoosterParams {
            learning_rate: 0.3,
            n_estimators: 100,
            max_depth: 6,
            min_child_weight: 1.0,
            gamma: 0.0,
            subsample: 1.0,
            colsample_bytree: 1.0,
            seed: DEFAULT_BOOSTER_SEED,
            lambda: 1.0,
            base_score: None,
        }
    }
}

impl BoosterParams {
    /// Structural validity: values the learner can train with. The optimizer's
    /// search ranges are narrower and live in [`crate::ga::GeneBounds`].
    pub fn validate(&self) -> Result<()> {
        let frac = |name: &str, v: f64| {
            if v > 0.0 && v <= 1.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be in (0, 1], got {v}")))
            }
        };
        frac("learning_rate", self.learning_rate)?;
        frac("subsample", self.subsample)?;
        frac("colsample_bytree", self.colsample_bytree)?;
        if self.max_depth == 0 {
            return Err(Error::Config("max_depth must be at least 1".into()));
        }
        for (name, v) in [
            ("min_child_weight", self.min_child_weight),
            ("gamma", self.gamma),
            ("lambda", self.lambda),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be a finite value >= 0, got {v}")));
            }
        }
        if let Some(b) = self.base_score {
            if !b.is_finite() {
                return Err(Error::Config("base_score must be finite".into()));
            }
        }
        Ok(())
    }
}

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Gradient and hessian of the logistic loss with respect to the margin.
pub fn logistic_grad_hess(p: f64, y: u8) -> (f64, f64) {
    (p - f64::from(y), p * (1.0 - p))
}

/// Loss reduction of splitting a node into the given children, minus `gamma`.
pub fn split_gain(gl: f64, hl: f64, gr: f64, hr: f64, lambda: f64, gamma: f64) -> f64 {
    let score = |g: f64, h: f64| g * g / (h + lambda);
    0.5 * (score(gl, hl) + score(gr, hr) - score(gl + gr, hl + hr)) - gamma
}

/// Optimal leaf weight for gradient sum `g` and hessian sum `h`.
pub fn leaf_weight(g: f64, h: f64, lambda: f64) -> f64 {
    -g / (h + lambda)
}

/// Mean negative log-likelihood of `labels` under probabilities `probs`.
pub fn logloss(probs: &[f64], labels: &[u8]) -> f64 {
    let eps = 1e-15;
    let total: f64 = probs
        .iter()
        .zip(labels)
        .map(|(&p, &y)| {
            let p = p.clamp(eps, 1.0 - eps);
            if y == 1 {
                -p.ln()
            } else {
                -(1.0 - p).ln()
            }
        })
        .sum();
    total / probs.len().max(1) as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbtModel {
    pub params: BoosterParams,
    pub base_score: f64,
    pub feature_count: usize,
    pub trees: Vec<TreeNode>,
}

impl GbtModel {
    /// Untrained model: every prediction is `sigmoid(base_score)`.
    pub fn constant(params: BoosterParams, base_score: f64, feature_count: usize) -> Self {
        GbtModel {
            params,
            base_score,
            feature_count,
            trees: Vec::new(),
        }
    }

    fn margin_row(&self, x: &SparseMatrix, r: usize) -> f64 {
        let sum: f64 = self.trees.iter().map(|t| t.predict_row(x, r)).sum();
        self.base_score + self.params.learning_rate * sum
    }

    fn check_cols(&self, x: &SparseMatrix) -> Result<()> {
        if x.cols() != self.feature_count {
            return Err(Error::Shape {
                expected: self.feature_count,
                actual: x.cols(),
            });
        }
        Ok(())
    }

    pub fn predict_margin(&self, x: &SparseMatrix) -> Result<Vec<f64>> {
        self.check_cols(x)?;
        Ok((0..x.rows()).map(|r| self.margin_row(x, r)).collect())
    }

    /// Probability of the positive class per row, kept strictly inside (0, 1).
    pub fn predict_proba(&self, x: &SparseMatrix) -> Result<Vec<f64>> {
        let lo = f64::EPSILON;
        Ok(self
            .predict_margin(x)?
            .into_iter()
            .map(|m| sigmoid(m).clamp(lo, 1.0 - lo))
            .collect())
    }

    /// 1 iff the positive-class probability is at least `threshold`.
    pub fn predict_label(&self, x: &SparseMatrix, threshold: f64) -> Result<Vec<u8>> {
        let probs = self.predict_proba(x)?;
        labels_from_proba(&probs, threshold)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Thresholds probabilities; `threshold` must lie strictly inside (0, 1).
pub fn labels_from_proba(probs: &[f64], threshold: f64) -> Result<Vec<u8>> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::invalid(format!("threshold must be in (0, 1), got {threshold}")));
    }
    Ok(probs.iter().map(|&p| u8::from(p >= threshold)).collect())
}

/// Trains a boosted ensemble on `x` with binary `labels`.
pub fn fit(x: &SparseMatrix, labels: &[u8], params: &BoosterParams) -> Result<GbtModel> {
    params.validate()?;
    if x.rows() == 0 {
        return Err(Error::invalid("cannot train on an empty matrix"));
    }
    if labels.len() != x.rows() {
        return Err(Error::Shape {
            expected: x.rows(),
            actual: labels.len(),
        });
    }
    if labels.iter().any(|&l| l > 1) {
        return Err(Error::invalid("labels must be 0 or 1"));
    }
    let positives = labels.iter().filter(|&&l| l == 1).count();
    if positives == 0 || positives == labels.len() {
        return Err(Error::SingleClass);
    }
    let base_score = params.base_score.unwrap_or_else(|| {
        let prior = positives as f64 / labels.len() as f64;
        (prior / (1.0 - prior)).ln()
    });

    let columns = tree::ColumnIndex::new(x);
    let mut model = GbtModel::constant(params.clone(), base_score, x.cols());
    let mut margins = vec![base_score; x.rows()];
    let mut grad = vec![0.0; x.rows()];
    let mut hess = vec![0.0; x.rows()];
    for t in 0..params.n_estimators {
        for r in 0..x.rows() {
            let (g, h) = logistic_grad_hess(sigmoid(margins[r]), labels[r]);
            grad[r] = g;
            hess[r] = h;
        }
        let tree = tree::grow(x, &columns, &grad, &hess, params, t as u64);
        for (r, m) in margins.iter_mut().enumerate() {
            *m += params.learning_rate * tree.predict_row(x, r);
        }
        model.trees.push(tree);
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::auc;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn separable(n: usize, d: usize, seed: u64) -> (SparseMatrix, Vec<u8>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for _ in 0..n {
            let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let s: f64 = x.iter().zip(&w).map(|(a, b)| a * b).sum();
            y.push(u8::from(s > 0.0));
            rows.push(x);
        }
        (SparseMatrix::from_dense(&rows).unwrap(), y)
    }

    #[test]
    fn grad_hess_examples() {
        assert_eq!(logistic_grad_hess(0.5, 1), (-0.5, 0.25));
        let (g, h) = logistic_grad_hess(0.9, 0);
        assert!((g - 0.9).abs() < 1e-15 && (h - 0.09).abs() < 1e-15);
    }

    #[test]
    fn gain_examples() {
        let g = split_gain(1.0, 1.0, 1.0, 1.0, 1.0, 0.0);
        assert!((g + 1.0 / 6.0).abs() < 1e-15);
        assert!(split_gain(2.0, 3.0, -2.0, 3.0, 0.5, 0.0) > 0.0);
        assert!(split_gain(2.0, 3.0, -2.0, 3.0, 0.5, 100.0) < 0.0);
    }

    #[test]
    fn fits_separable_data() {
        let (x, y) = separable(200, 10, 11);
        let params = BoosterParams {
            learning_rate: 0.3,
            n_estimators: 50,
            max_depth: 3,
            ..BoosterParams::default()
        };
        let model = fit(&x, &y, &params).unwrap();
        let pred = model.predict_label(&x, 0.5).unwrap();
        let acc = pred.iter().zip(&y).filter(|(a, b)| a == b).count() as f64 / y.len() as f64;
        assert!(acc >= 0.99, "training accuracy {acc}");
        let probs = model.predict_proba(&x).unwrap();
        assert_eq!(auc(&y, &probs).unwrap(), 1.0);
    }

    #[test]
    fn identical_rows_give_prior_leaf() {
        let x = SparseMatrix::from_dense(&vec![vec![1.0, 2.0]; 8]).unwrap();
        let y = [1, 0, 0, 0, 1, 0, 0, 0];
        let params = BoosterParams {
            n_estimators: 1,
            max_depth: 1,
            ..BoosterParams::default()
        };
        let model = fit(&x, &y, &params).unwrap();
        assert!(matches!(model.trees[0], TreeNode::Leaf { .. }));
        let p = model.predict_proba(&x).unwrap();
        // prior is already optimal, so the leaf weight is zero
        assert!(p.iter().all(|&v| (v - 0.25).abs() < 1e-12));
    }

    #[test]
    fn optimized_table_params_are_valid() {
        let params = BoosterParams {
            learning_rate: 0.47,
            n_estimators: 93,
            max_depth: 4,
            min_child_weight: 0.08,
            gamma: 0.42,
            subsample: 0.94,
            colsample_bytree: 0.84,
            ..BoosterParams::default()
        };
        params.validate().unwrap();
    }

    #[test]
    fn fit_errors() {
        let x = SparseMatrix::from_dense(&[vec![1.0], vec![2.0]]).unwrap();
        assert!(matches!(fit(&x, &[1, 1], &BoosterParams::default()), Err(Error::SingleClass)));
        assert!(fit(&SparseMatrix::empty(3), &[], &BoosterParams::default()).is_err());
    }

    #[test]
    fn prediction_contracts() {
        let m = GbtModel::constant(BoosterParams::default(), 0.4, 2);
        let x = SparseMatrix::from_dense(&[vec![1.0, 0.0], vec![0.0, 3.0]]).unwrap();
        let p = m.predict_proba(&x).unwrap();
        assert!(p.iter().all(|&v| v == sigmoid(0.4)));
        let one = SparseMatrix::from_dense(&[vec![1.0, 0.0]]).unwrap();
        assert_eq!(m.predict_proba(&one).unwrap().len(), 1);
        let wrong = SparseMatrix::from_dense(&[vec![1.0]]).unwrap();
        assert!(m.predict_proba(&wrong).is_err());

        assert_eq!(labels_from_proba(&[0.5], 0.5).unwrap(), [1]);
        assert_eq!(labels_from_proba(&[0.1, 0.9], 0.5).unwrap(), [0, 1]);
        assert!(labels_from_proba(&[0.1], 1.5).is_err());
    }

    #[test]
    fn deterministic_and_json_round_trip() {
        let (x, y) = separable(120, 6, 3);
        let params = BoosterParams {
            n_estimators: 20,
            subsample: 0.7,
            colsample_bytree: 0.5,
            ..BoosterParams::default()
        };
        let a = fit(&x, &y, &params).unwrap();
        let b = fit(&x, &y, &params).unwrap();
        assert_eq!(a, b);
        let back = GbtModel::from_json(&a.to_json().unwrap()).unwrap();
        assert_eq!(back, a);
        assert_eq!(back.predict_proba(&x).unwrap(), a.predict_proba(&x).unwrap());
    }

    #[test]
    fn training_loss_never_increases() {
        let (x, y) = separable(150, 5, 8);
        let params = BoosterParams {
            learning_rate: 0.3,
            n_estimators: 30,
            max_depth: 3,
            ..BoosterParams::default()
        };
        let model = fit(&x, &y, &params).unwrap();
        let mut prev = f64::INFINITY;
        for t in 0..=model.trees.len() {
            let partial = GbtModel {
                trees: model.trees[..t].to_vec(),
                ..model.clone()
            };
            let loss = logloss(&partial.predict_proba(&x).unwrap(), &y);
            assert!(loss <= prev + 1e-12, "tree {t}: {loss} > {prev}");
            prev = loss;
        }
    }

    #[test]
    fn tree_depth_and_gain_respected() {
        let (x, y) = separable(100, 4, 5);
        let params = BoosterParams {
            n_estimators: 10,
            max_depth: 2,
            gamma: 0.05,
            ..BoosterParams::default()
        };
        let model = fit(&x, &y, &params).unwrap();
        for t in &model.trees {
            assert!(t.depth() <= 2);
            t.visit_splits(&mut |gain| assert!(gain >= 0.0));
        }
    }

    #[test]
    fn huge_gamma_gives_leaves() {
        let (x, y) = separable(60, 3, 1);
        let params = BoosterParams {
            n_estimators: 3,
            gamma: 1e6,
            ..BoosterParams::default()
        };
        let model = fit(&x, &y, &params).unwrap();
        assert!(model.trees.iter().all(|t| matches!(t, TreeNode::Leaf { .. })));
    }
}
