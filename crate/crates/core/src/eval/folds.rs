use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::rng_for;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub repeat: usize,
    pub fold: usize,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Stratified k-fold partition: each class is shuffled with `seed` and dealt
/// round-robin into the folds. Dealing continues across classes from the fold
/// where the previous class stopped, so fold sizes also differ by at most one.
pub fn stratified_folds(labels: &[u8], k: usize, seed: u64) -> Result<Vec<FoldPlan>> {
    if k < 2 {
        return Err(Error::Config(format!("need at least 2 folds, got {k}")));
    }
    if labels.len() < k {
        return Err(Error::invalid(format!("{} rows cannot fill {k} folds", labels.len())));
    }
    let mut rng = rng_for(seed, "eval/folds");
    let mut fold_of = vec![0usize; labels.len()];
    let mut next = 0usize;
    for class in [1u8, 0u8] {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if !members.is_empty() && members.len() < k {
            log::warn!(
                "class {class} has {} members, fewer than {k} folds; some folds will lack it",
                members.len()
            );
        }
        members.shuffle(&mut rng);
        for i in members {
            fold_of[i] = next;
            next = (next + 1) % k;
        }
    }
    Ok((0..k)
        .map(|f| {
            let (test, train): (Vec<usize>, Vec<usize>) = (0..labels.len()).partition(|&i| fold_of[i] == f);
            FoldPlan {
                repeat: 0,
                fold: f,
                train,
                test,
            }
        })
        .collect())
}

/// Stratified single train/test split; `test_fraction` of each class goes to test.
pub fn stratified_split(labels: &[u8], test_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::Config(format!("test fraction must be in (0, 1), got {test_fraction}")));
    }
    let mut rng = rng_for(seed, "eval/split");
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in [1u8, 0u8] {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        members.shuffle(&mut rng);
        let n_test = (members.len() as f64 * test_fraction).round() as usize;
        // keep at least one member of the class on each side when possible
        let n_test = if members.len() >= 2 {
            n_test.clamp(1, members.len() - 1)
        } else {
            n_test
        };
        test.extend_from_slice(&members[..n_test]);
        train.extend_from_slice(&members[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_of_hundred() {
        let labels: Vec<u8> = (0..100).map(|i| u8::from(i < 17)).collect();
        let folds = stratified_folds(&labels, 10, 9).unwrap();
        let mut pos: Vec<usize> = folds
            .iter()
            .map(|f| f.test.iter().filter(|&&i| labels[i] == 1).count())
            .collect();
        pos.sort_unstable();
        assert_eq!(pos, [1, 1, 1, 2, 2, 2, 2, 2, 2, 2]);
        assert!(folds.iter().all(|f| f.test.len() == 10));
    }

    #[test]
    fn two_folds_of_four() {
        let folds = stratified_folds(&[1, 1, 0, 0], 2, 0).unwrap();
        for f in &folds {
            let labels: Vec<u8> = f.test.iter().map(|&i| [1, 1, 0, 0][i]).collect();
            assert_eq!(labels.iter().filter(|&&l| l == 1).count(), 1);
            assert_eq!(labels.len(), 2);
        }
    }

    #[test]
    fn seeded_and_validated() {
        let labels: Vec<u8> = (0..50).map(|i| u8::from(i % 3 == 0)).collect();
        assert_eq!(stratified_folds(&labels, 5, 4).unwrap(), stratified_folds(&labels, 5, 4).unwrap());
        assert_ne!(stratified_folds(&labels, 5, 4).unwrap(), stratified_folds(&labels, 5, 5).unwrap());
        assert!(stratified_folds(&labels, 1, 0).is_err());
    }

    #[test]
    fn split_is_stratified() {
        let labels: Vec<u8> = (0..100).map(|i| u8::from(i < 20)).collect();
        let (train, test) = stratified_split(&labels, 0.3, 1).unwrap();
        assert_eq!(test.len(), 30);
        assert_eq!(test.iter().filter(|&&i| labels[i] == 1).count(), 6);
        assert_eq!(train.len() + test.len(), 100);
    }
}
