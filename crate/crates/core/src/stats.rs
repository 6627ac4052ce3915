//! Nonparametric tests for comparing runs: Wilcoxon signed-rank (paired)
//! and Kruskal-Wallis (three or more groups).

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Sample size up to which the Wilcoxon p-value is computed exactly.
pub const WILCOXON_EXACT_MAX: usize = 25;

/// 1-based ranks with ties sharing the average of the ranks they span.
pub fn rank_with_ties(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // positions i..j hold ranks i+1..=j
        let avg = (i + 1 + j) as f64 / 2.0;
        for &o in &order[i..j] {
            ranks[o] = avg;
        }
        i = j;
    }
    ranks
}

/// Sizes of each group of tied values.
fn tie_sizes(values: &[f64]) -> Vec<usize> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut out = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        out.push(j - i);
        i = j;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    /// min(W+, W-)
    pub statistic: f64,
    pub p_value: f64,
    /// Number of nonzero differences used.
    pub n: usize,
    pub exact: bool,
}

/// Two-sided Wilcoxon signed-rank test on paired samples. Zero differences
/// are dropped; the p-value is exact for up to [`WILCOXON_EXACT_MAX`] pairs
/// and a tie- and continuity-corrected normal approximation above.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<WilcoxonResult> {
    if a.len() != b.len() {
        return Err(Error::Shape {
            expected: a.len(),
            actual: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::invalid("paired sample is empty"));
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|d| *d != 0.0).collect();
    if diffs.is_empty() {
        return Err(Error::NoInformation);
    }
    let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks = rank_with_ties(&abs);
    let w_plus: f64 = ranks.iter().zip(&diffs).filter(|(_, d)| **d > 0.0).map(|(r, _)| r).sum();
    let m = diffs.len();
    let total = (m * (m + 1)) as f64 / 2.0;
    let w_minus = total - w_plus;
    let w = w_plus.min(w_minus);

    if m <= WILCOXON_EXACT_MAX {
        // ranks are multiples of 1/2, so doubled ranks are integers
        let doubled: Vec<usize> = ranks.iter().map(|r| (r * 2.0).round() as usize).collect();
        let p = exact_signed_rank_p(&doubled, (w * 2.0).round() as usize);
        return Ok(WilcoxonResult {
            statistic: w,
            p_value: p,
            n: m,
            exact: true,
        });
    }

    let mf = m as f64;
    let mean = mf * (mf + 1.0) / 4.0;
    let tie_term: f64 = tie_sizes(&abs)
        .into_iter()
        .map(|t| {
            let t = t as f64;
            t * t * t - t
        })
        .sum();
    let var = mf * (mf + 1.0) * (2.0 * mf + 1.0) / 24.0 - tie_term / 48.0;
    let p = if var <= 0.0 {
        1.0
    } else {
        let z = ((w - mean).abs() - 0.5).max(0.0) / var.sqrt();
        let normal = Normal::new(0.0, 1.0).expect("standard normal");
        (2.0 * normal.sf(z)).min(1.0)
    };
    Ok(WilcoxonResult {
        statistic: w,
        p_value: p,
        n: m,
        exact: false,
    })
}

/// `min(1, 2 * P(T <= w))` where T is the sum of a uniformly random subset of
/// `ranks`. Counts subsets per sum by dynamic programming.
fn exact_signed_rank_p(ranks: &[usize], w: usize) -> f64 {
    let total: usize = ranks.iter().sum();
    let mut counts = vec![0u64; total + 1];
    counts[0] = 1;
    let mut reach = 0;
    for &r in ranks {
        for s in (0..=reach).rev() {
            if counts[s] > 0 {
                counts[s + r] += counts[s];
            }
        }
        reach += r;
    }
    let below: u64 = counts[..=w.min(total)].iter().sum();
    let all = 2f64.powi(ranks.len() as i32);
    (2.0 * below as f64 / all).min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KruskalResult {
    pub h: f64,
    pub p_value: f64,
    pub df: usize,
}

/// Kruskal-Wallis H test with tie correction; p from the chi-square
/// distribution with `groups - 1` degrees of freedom.
pub fn kruskal_wallis(groups: &[Vec<f64>]) -> Result<KruskalResult> {
    if groups.len() < 3 {
        return Err(Error::invalid(format!("need at least 3 groups, got {}", groups.len())));
    }
    if groups.iter().any(Vec::is_empty) {
        return Err(Error::invalid("every group must be non-empty"));
    }
    let all: Vec<f64> = groups.iter().flatten().copied().collect();
    let n = all.len() as f64;
    let df = groups.len() - 1;
    let ranks = rank_with_ties(&all);
    let mut offset = 0;
    let mut sum = 0.0;
    for g in groups {
        let r: f64 = ranks[offset..offset + g.len()].iter().sum();
        sum += r * r / g.len() as f64;
        offset += g.len();
    }
    let h = 12.0 / (n * (n + 1.0)) * sum - 3.0 * (n + 1.0);
    let ties: f64 = tie_sizes(&all)
        .into_iter()
        .map(|t| {
            let t = t as f64;
            t * t * t - t
        })
        .sum();
    let correction = 1.0 - ties / (n * n * n - n);
    if correction <= 0.0 {
        return Ok(KruskalResult { h: 0.0, p_value: 1.0, df });
    }
    let h = (h / correction).max(0.0);
    Ok(KruskalResult {
        h,
        p_value: chi2_sf(h, df as f64),
        df,
    })
}

/// Wilcoxon p-values for every pair `(i, j)` with `j < i`; `cells[i][j]` is
/// `None` when the test has no information (all differences zero).
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseMatrix {
    pub names: Vec<String>,
    pub cells: Vec<Vec<Option<f64>>>,
}

/// Pairwise Wilcoxon tests across equally sized samples, lower triangle only.
pub fn pairwise_wilcoxon(names: &[String], samples: &[Vec<f64>]) -> Result<PairwiseMatrix> {
    if names.len() != samples.len() {
        return Err(Error::Shape {
            expected: names.len(),
            actual: samples.len(),
        });
    }
    let mut cells = vec![vec![None; samples.len()]; samples.len()];
    for i in 0..samples.len() {
        for j in 0..i {
            cells[i][j] = match wilcoxon_signed_rank(&samples[i], &samples[j]) {
                Ok(r) => Some(r.p_value),
                Err(Error::NoInformation) => None,
                Err(e) => return Err(e),
            };
        }
    }
    Ok(PairwiseMatrix {
        names: names.to_vec(),
        cells,
    })
}

/// Largest number of samples [`kruskal_combinations`] accepts.
pub const KRUSKAL_MAX_GROUPS: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct Combination {
    /// Indices into the sample list, ascending.
    pub members: Vec<usize>,
    pub result: KruskalResult,
}

/// Kruskal-Wallis test of every combination of three or more samples,
/// highest p-value first. Ties keep combination enumeration order (by size,
/// then lexicographic).
pub fn kruskal_combinations(samples: &[Vec<f64>]) -> Result<Vec<Combination>> {
    let n = samples.len();
    if n < 3 {
        return Err(Error::invalid(format!("need at least 3 samples, got {n}")));
    }
    if n > KRUSKAL_MAX_GROUPS {
        return Err(Error::invalid(format!(
            "{n} samples give too many combinations; at most {KRUSKAL_MAX_GROUPS} are supported"
        )));
    }
    let mut subsets: Vec<Vec<usize>> = (0u32..1 << n)
        .filter(|mask| mask.count_ones() >= 3)
        .map(|mask| (0..n).filter(|i| mask & (1 << i) != 0).collect())
        .collect();
    subsets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    let mut out = subsets
        .into_iter()
        .map(|members| {
            let groups: Vec<Vec<f64>> = members.iter().map(|&i| samples[i].clone()).collect();
            Ok(Combination {
                result: kruskal_wallis(&groups)?,
                members,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    out.sort_by(|a, b| b.result.p_value.total_cmp(&a.result.p_value));
    Ok(out)
}

/// Survival function of the chi-square distribution.
pub fn chi2_sf(x: f64, df: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let dist = ChiSquared::new(df).expect("positive degrees of freedom");
    dist.sf(x).clamp(0.0, 1.0)
}

/// Formats a p-value with five decimals, never printing a hard zero.
pub fn format_p(p: f64) -> String {
    if p < 1e-5 {
        "<1e-5".to_string()
    } else {
        format!("{p:.5}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranks() {
        assert_eq!(rank_with_ties(&[10.0, 20.0, 30.0]), [1.0, 2.0, 3.0]);
        assert_eq!(rank_with_ties(&[5.0, 5.0]), [1.5, 1.5]);
        assert_eq!(rank_with_ties(&[3.0, 1.0, 3.0]), [2.5, 1.0, 2.5]);
    }

    #[test]
    fn all_positive_five_pairs() {
        let a = [2.0, 3.0, 4.0, 5.0, 6.0];
        let b = [1.0, 1.5, 2.0, 2.5, 2.9];
        let r = wilcoxon_signed_rank(&a, &b).unwrap();
        assert!(r.exact);
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 0.0625);
        assert_eq!(wilcoxon_signed_rank(&b, &a).unwrap().p_value, 0.0625);
    }

    #[test]
    fn self_pairing_has_no_information() {
        let a = [0.1, 0.2];
        assert!(matches!(wilcoxon_signed_rank(&a, &a), Err(Error::NoInformation)));
    }

    #[test]
    fn zero_differences_are_dropped() {
        let a: Vec<f64> = (0..25).map(|i| f64::from(i) * 0.37 % 1.3).collect();
        let b: Vec<f64> = (0..25).map(|i| f64::from(i) * 0.21 % 1.1).collect();
        let exact = wilcoxon_signed_rank(&a, &b).unwrap();
        let mut a30 = a.clone();
        let mut b30 = b.clone();
        a30.push(0.0);
        b30.push(0.0);
        a30.push(0.5);
        b30.push(0.5);
        assert_eq!(wilcoxon_signed_rank(&a30, &b30).unwrap(), exact);
        assert!(exact.p_value > 0.0 && exact.p_value <= 1.0);
    }

    #[test]
    fn normal_approximation_tracks_exact_distribution() {
        let a: Vec<f64> = (0..40).map(|i| f64::from(i % 9) + 0.3 * f64::from(i)).collect();
        let b: Vec<f64> = (0..40).map(|i| f64::from((i * 7) % 11) + 0.3 * f64::from(i)).collect();
        let r = wilcoxon_signed_rank(&a, &b).unwrap();
        assert!(!r.exact);
        let diffs: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).filter(|d| *d != 0.0).collect();
        let ranks = rank_with_ties(&diffs.iter().map(|d| d.abs()).collect::<Vec<_>>());
        let doubled: Vec<usize> = ranks.iter().map(|r| (r * 2.0).round() as usize).collect();
        let exact = exact_signed_rank_p(&doubled, (r.statistic * 2.0).round() as usize);
        assert!((r.p_value - exact).abs() < 0.01, "{} vs {exact}", r.p_value);
    }

    #[test]
    fn kruskal_examples() {
        let g = vec![vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0], vec![7.0, 8.0, 9.0]];
        let r = kruskal_wallis(&g).unwrap();
        assert!((r.h - 7.2).abs() < 1e-9);
        assert!((r.p_value - (-3.6f64).exp()).abs() < 1e-12);
        let same = vec![vec![1.0, 1.0], vec![1.0, 1.0], vec![1.0]];
        let r = kruskal_wallis(&same).unwrap();
        assert_eq!((r.h, r.p_value), (0.0, 1.0));
        let rev: Vec<Vec<f64>> = g.iter().rev().cloned().collect();
        assert_eq!(kruskal_wallis(&rev).unwrap(), kruskal_wallis(&g).unwrap());
        assert!(kruskal_wallis(&g[..2]).is_err());
    }

    #[test]
    fn p_formatting() {
        assert_eq!(format_p(0.0), "<1e-5");
        assert_eq!(format_p(0.0625), "0.06250");
    }

    #[test]
    fn pairwise_matrix_is_lower_triangular() {
        let names: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let a = vec![1.0, 2.0, 3.0, 4.0, 5.0];
        let b: Vec<f64> = a.iter().map(|v| v + 1.0).collect();
        let m = pairwise_wilcoxon(&names, &[a.clone(), b, a]).unwrap();
        assert_eq!(m.cells[1][0], Some(0.0625));
        assert_eq!(m.cells[2][0], None);
        assert_eq!(m.cells[2][1], Some(0.0625));
        assert!(m.cells[0].iter().all(Option::is_none));
        assert!(m.cells[1][1].is_none() && m.cells[1][2].is_none());
    }

    #[test]
    fn kruskal_combination_count_and_order() {
        let samples: Vec<Vec<f64>> = (0..5).map(|i| (0..6).map(|j| f64::from(i * 2 + j)).collect()).collect();
        let combos = kruskal_combinations(&samples).unwrap();
        // C(5,3) + C(5,4) + C(5,5)
        assert_eq!(combos.len(), 16);
        for w in combos.windows(2) {
            assert!(w[0].result.p_value >= w[1].result.p_value);
        }
        assert!(kruskal_combinations(&samples[..2]).is_err());
    }
}
