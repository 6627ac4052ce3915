use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    pub fn_: u64,
}

impl ConfusionMatrix {
    pub fn new(tp: u64, tn: u64, fp: u64, fn_: u64) -> Self {
        ConfusionMatrix { tp, tn, fp, fn_ }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }

    /// The same counts read with the other class as positive.
    pub fn swapped(&self) -> Self {
        ConfusionMatrix {
            tp: self.tn,
            tn: self.tp,
            fp: self.fn_,
            fn_: self.fp,
        }
    }
}

/// Counts outcomes with class 1 as the positive class.
pub fn confusion(y_true: &[u8], y_pred: &[u8]) -> Result<ConfusionMatrix> {
    if y_true.len() != y_pred.len() {
        return Err(Error::Shape {
            expected: y_true.len(),
            actual: y_pred.len(),
        });
    }
    let mut cm = ConfusionMatrix::default();
    for (&t, &p) in y_true.iter().zip(y_pred) {
        match (t, p) {
            (1, 1) => cm.tp += 1,
            (0, 0) => cm.tn += 1,
            (0, 1) => cm.fp += 1,
            (1, 0) => cm.fn_ += 1,
            _ => return Err(Error::invalid("labels must be 0 or 1")),
        }
    }
    Ok(cm)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Accuracy,
    Gmean,
    Auc,
    Tpr,
    Tnr,
    Ppv,
    Fpr,
    F1,
    Npv,
}

impl Metric {
    pub const ALL: [Metric; 9] = [
        Metric::Accuracy,
        Metric::Gmean,
        Metric::Auc,
        Metric::Tpr,
        Metric::Tnr,
        Metric::Ppv,
        Metric::Fpr,
        Metric::F1,
        Metric::Npv,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Accuracy => "accuracy",
            Metric::Gmean => "gmean",
            Metric::Auc => "auc",
            Metric::Tpr => "tpr",
            Metric::Tnr => "tnr",
            Metric::Ppv => "ppv",
            Metric::Fpr => "fpr",
            Metric::F1 => "f1",
            Metric::Npv => "npv",
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown metric {s:?}")))
    }
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub gmean: f64,
    pub auc: Option<f64>,
    pub tpr: f64,
    pub tnr: f64,
    pub ppv: f64,
    pub fpr: f64,
    pub f1: f64,
    pub npv: f64,
    /// Set when some ratio was 0/0 and defined as 0.
    pub degenerate: bool,
}

impl MetricsReport {
    pub fn get(&self, m: Metric) -> Option<f64> {
        Some(match m {
            Metric::Accuracy => self.accuracy,
            Metric::Gmean => self.gmean,
            Metric::Auc => return self.auc,
            Metric::Tpr => self.tpr,
            Metric::Tnr => self.tnr,
            Metric::Ppv => self.ppv,
            Metric::Fpr => self.fpr,
            Metric::F1 => self.f1,
            Metric::Npv => self.npv,
        })
    }

    pub fn with_auc(mut self, auc: Option<f64>) -> Self {
        self.auc = auc;
        self
    }

    /// The same predictions viewed with the other class as positive, derived
    /// from the rates alone. Accuracy, GMean and AUC are unchanged.
    pub fn swapped(&self) -> MetricsReport {
        let f1 = if self.tnr + self.npv == 0.0 {
            0.0
        } else {
            2.0 * self.tnr * self.npv / (self.tnr + self.npv)
        };
        MetricsReport {
            tpr: self.tnr,
            tnr: self.tpr,
            ppv: self.npv,
            npv: self.ppv,
            fpr: 1.0 - self.tpr,
            f1,
            ..*self
        }
    }
}

/// Ratio with 0/0 defined as 0; flags the undefined case.
fn ratio(num: f64, den: f64, degenerate: &mut bool) -> f64 {
    if den == 0.0 {
        *degenerate = true;
        0.0
    } else {
        num / den
    }
}

/// Every threshold metric derived from one confusion matrix.
pub fn metrics(cm: &ConfusionMatrix) -> MetricsReport {
    let (tp, tn, fp, fn_) = (cm.tp as f64, cm.tn as f64, cm.fp as f64, cm.fn_ as f64);
    let mut degenerate = false;
    let tpr = ratio(tp, tp + fn_, &mut degenerate);
    let tnr = ratio(tn, fp + tn, &mut degenerate);
    // with no negatives fpr is undefined; keep fpr + tnr = 1
    let fpr = if fp + tn == 0.0 { 1.0 } else { fp / (fp + tn) };
    let ppv = ratio(tp, tp + fp, &mut degenerate);
    let npv = ratio(tn, tn + fn_, &mut degenerate);
    let f1 = ratio(2.0 * tpr * ppv, tpr + ppv, &mut degenerate);
    let accuracy = ratio(tp + tn, tp + tn + fp + fn_, &mut degenerate);
    MetricsReport {
        accuracy,
        gmean: (tpr * tnr).sqrt(),
        auc: None,
        tpr,
        tnr,
        ppv,
        fpr,
        f1,
        npv,
        degenerate,
    }
}

/// Metrics recomputed with class 0 as the positive class.
pub fn swap_positive_metrics(cm: &ConfusionMatrix) -> MetricsReport {
    metrics(&cm.swapped())
}

/// Geometric mean of sensitivity and specificity.
pub fn gmean(cm: &ConfusionMatrix) -> f64 {
    metrics(cm).gmean
}

/// Rank-based AUC (Mann-Whitney U over n_pos * n_neg), ties counted half.
pub fn auc(y_true: &[u8], scores: &[f64]) -> Result<f64> {
    if y_true.len() != scores.len() {
        return Err(Error::Shape {
            expected: y_true.len(),
            actual: scores.len(),
        });
    }
    let n_pos = y_true.iter().filter(|&&y| y == 1).count();
    let n_neg = y_true.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass);
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::invalid("scores contain NaN"));
    }
    let ranks = crate::stats::rank_with_ties(scores);
    let pos_rank_sum: f64 = ranks
        .iter()
        .zip(y_true)
        .filter(|(_, &y)| y == 1)
        .map(|(r, _)| r)
        .sum();
    let n_pos = n_pos as f64;
    let u = pos_rank_sum - n_pos * (n_pos + 1.0) / 2.0;
    Ok(u / (n_pos * n_neg as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Trapezoidal integration of the ROC curve built threshold by threshold.
    fn auc_trapezoid(y: &[u8], s: &[f64]) -> f64 {
        let mut idx: Vec<usize> = (0..y.len()).collect();
        idx.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
        let p = y.iter().filter(|&&v| v == 1).count() as f64;
        let n = y.len() as f64 - p;
        let (mut tp, mut fp, mut prev_tpr, mut prev_fpr, mut area) = (0.0, 0.0, 0.0, 0.0, 0.0);
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j < idx.len() && s[idx[j]] == s[idx[i]] {
                if y[idx[j]] == 1 {
                    tp += 1.0;
                } else {
                    fp += 1.0;
                }
                j += 1;
            }
            let (tpr, fpr) = (tp / p, fp / n);
            area += (fpr - prev_fpr) * (tpr + prev_tpr) / 2.0;
            prev_tpr = tpr;
            prev_fpr = fpr;
            i = j;
        }
        area
    }

    #[test]
    fn confusion_examples() {
        assert_eq!(confusion(&[1, 0], &[1, 0]).unwrap(), ConfusionMatrix::new(1, 1, 0, 0));
        assert_eq!(
            confusion(&[1, 1, 0, 0], &[0, 1, 1, 0]).unwrap(),
            ConfusionMatrix::new(1, 1, 1, 1)
        );
        assert_eq!(confusion(&[], &[]).unwrap(), ConfusionMatrix::default());
        assert!(confusion(&[1], &[]).is_err());
    }

    #[test]
    fn perfect_and_degenerate_metrics() {
        let m = metrics(&ConfusionMatrix::new(1, 1, 0, 0));
        for v in [m.accuracy, m.gmean, m.tpr, m.tnr, m.ppv, m.f1, m.npv] {
            assert_eq!(v, 1.0);
        }
        assert_eq!(m.fpr, 0.0);
        assert!(!m.degenerate);

        let m = metrics(&ConfusionMatrix::new(0, 5, 0, 3));
        assert_eq!(m.ppv, 0.0);
        assert!(m.degenerate);
    }

    #[test]
    fn fitness_arithmetic() {
        let g = gmean(&ConfusionMatrix::new(7, 85, 5, 3));
        assert!((g - (0.7f64 * 85.0 / 90.0).sqrt()).abs() < 1e-15);
        assert!((g - 0.8131).abs() < 5e-5);
        assert_eq!(gmean(&ConfusionMatrix::new(0, 90, 0, 10)), 0.0);
    }

    #[test]
    fn swapped_view() {
        let cm = ConfusionMatrix::new(10, 40, 3, 7);
        let s = swap_positive_metrics(&cm);
        let m = metrics(&cm);
        assert_eq!(s.tpr, m.tnr);
        assert_eq!(s.ppv, m.npv);
        assert_eq!(s.accuracy, m.accuracy);
        let sym = ConfusionMatrix::new(4, 4, 2, 2);
        assert_eq!(swap_positive_metrics(&sym), metrics(&sym));
    }

    #[test]
    fn auc_examples() {
        let y = [0, 0, 1, 1];
        assert_eq!(auc(&y, &[0.1, 0.2, 0.8, 0.9]).unwrap(), 1.0);
        assert_eq!(auc(&y, &[0.9, 0.8, 0.2, 0.1]).unwrap(), 0.0);
        assert_eq!(auc(&y, &[0.5; 4]).unwrap(), 0.5);
        assert!(auc(&[1, 1], &[0.1, 0.2]).is_err());
    }

    #[test]
    fn auc_rank_equals_trapezoid() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        for _ in 0..1000 {
            let n = rng.gen_range(2..40);
            let mut y: Vec<u8> = (0..n).map(|_| rng.gen_range(0..2)).collect();
            y[0] = 0;
            y[1] = 1;
            // coarse scores so that ties occur
            let s: Vec<f64> = (0..n).map(|_| f64::from(rng.gen_range(0..8u8)) / 8.0).collect();
            let a = auc(&y, &s).unwrap();
            let b = auc_trapezoid(&y, &s);
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn report_swap_matches_confusion_swap() {
        for cm in [
            ConfusionMatrix::new(7, 85, 5, 3),
            ConfusionMatrix::new(0, 10, 0, 4),
            ConfusionMatrix::new(12, 0, 3, 1),
            ConfusionMatrix::new(40, 33, 9, 18),
        ] {
            let a = metrics(&cm).swapped();
            let b = swap_positive_metrics(&cm);
            for m in Metric::ALL {
                let (x, y) = (a.get(m), b.get(m));
                assert_eq!(x.is_some(), y.is_some());
                if let (Some(x), Some(y)) = (x, y) {
                    assert!((x - y).abs() < 1e-12, "{cm:?} {m}: {x} vs {y}");
                }
            }
        }
    }
}
