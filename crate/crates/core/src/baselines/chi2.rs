use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

/// Chi-square statistic of each feature against the binary labels, treating
/// per-class value sums as observed counts.
pub fn chi2_scores(x: &SparseMatrix, labels: &[u8]) -> Result<Vec<f64>> {
    if labels.len() != x.rows() {
        return Err(Error::Shape {
            expected: x.rows(),
            actual: labels.len(),
        });
    }
    let n = labels.len() as f64;
    let n_pos = labels.iter().filter(|&&l| l == 1).count() as f64;
    let class_share = [(n - n_pos) / n, n_pos / n];
    let mut observed = vec![[0.0f64; 2]; x.cols()];
    for (r, &label) in labels.iter().enumerate() {
        for (j, v) in x.row_entries(r) {
            if v < 0.0 {
                return Err(Error::invalid(format!("negative value at row {r}, column {j}")));
            }
            observed[j][usize::from(label)] += v;
        }
    }
    Ok(observed
        .iter()
        .map(|o| {
            let total = o[0] + o[1];
            if total == 0.0 {
                return 0.0;
            }
            (0..2)
                .filter(|&c| class_share[c] > 0.0)
                .map(|c| {
                    let e = total * class_share[c];
                    (o[c] - e).powi(2) / e
                })
                .sum()
        })
        .collect())
}

/// Indices of the `k` highest scores, best first; ties go to the lower index.
pub fn chi2_select(scores: &[f64], k: usize) -> Result<Vec<usize>> {
    if k > scores.len() {
        return Err(Error::invalid(format!("cannot select {k} of {} features", scores.len())));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order.truncate(k);
    Ok(order)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_computed_scores() {
        // feature 0 only in positives, feature 1 never, feature 2 uniform
        let x = SparseMatrix::from_dense(&[
            vec![1.0, 0.0, 1.0],
            vec![1.0, 0.0, 1.0],
            vec![0.0, 0.0, 1.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap();
        let s = chi2_scores(&x, &[1, 1, 0, 0]).unwrap();
        assert_eq!(s, [2.0, 0.0, 0.0]);
    }

    #[test]
    fn negative_values_rejected() {
        let x = SparseMatrix::from_dense(&[vec![-1.0], vec![1.0]]).unwrap();
        assert!(chi2_scores(&x, &[0, 1]).is_err());
    }

    #[test]
    fn selection() {
        assert_eq!(chi2_select(&[0.0, 5.0, 3.0], 2).unwrap(), [1, 2]);
        assert_eq!(chi2_select(&[1.0, 1.0, 1.0], 3).unwrap(), [0, 1, 2]);
        assert_eq!(chi2_select(&[2.0, 7.0, 2.0], 2).unwrap(), [1, 0]);
        assert!(chi2_select(&[1.0], 2).is_err());
    }
}
