use std::collections::HashSet;

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gbt::BoosterParams;

/// Search range of one booster gene.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneBounds {
    pub name: &'static str,
    pub min: f64,
    pub max: f64,
    pub integer: bool,
}

impl GeneBounds {
    pub fn width(&self) -> f64 {
        self.max - self.min
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.min && v <= self.max && (!self.integer || v.fract() == 0.0)
    }

    fn clamp(&self, v: f64) -> f64 {
        let v = if self.integer { v.round() } else { v };
        v.clamp(self.min, self.max)
    }
}

pub const NUM_BOOSTER_GENES: usize = 7;

/// Booster genes in chromosome order.
pub const BOOSTER_GENES: [GeneBounds; NUM_BOOSTER_GENES] = [
    GeneBounds { name: "learning_rate", min: 0.01, max: 1.0, integer: false },
    GeneBounds { name: "n_estimators", min: 10.0, max: 1500.0, integer: true },
    GeneBounds { name: "max_depth", min: 1.0, max: 10.0, integer: true },
    GeneBounds { name: "min_child_weight", min: 0.01, max: 10.0, integer: false },
    GeneBounds { name: "gamma", min: 0.01, max: 10.0, integer: false },
    GeneBounds { name: "subsample", min: 0.01, max: 1.0, integer: false },
    GeneBounds { name: "colsample_bytree", min: 0.01, max: 1.0, integer: false },
];

/// Initial `n_estimators` values: 10, 35, ..., 1485.
const N_ESTIMATORS_STEP: usize = 25;

/// Additive mutation delta is uniform in +/- this share of a gene's range.
pub const MUTATION_SCALE: f64 = 0.1;

/// Seven booster genes followed by a duplicate-free list of feature indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chromosome {
    pub booster: [f64; NUM_BOOSTER_GENES],
    pub features: Vec<usize>,
}

impl Chromosome {
    pub fn from_params(params: &BoosterParams, features: Vec<usize>) -> Self {
        Chromosome {
            booster: [
                params.learning_rate,
                params.n_estimators as f64,
                params.max_depth as f64,
                params.min_child_weight,
                params.gamma,
                params.subsample,
                params.colsample_bytree,
            ],
            features,
        }
    }

    /// Booster configuration carried by the genes.
    pub fn params(&self, seed: u64, lambda: f64) -> BoosterParams {
        let g = &self.booster;
        BoosterParams {
            learning_rate: g[0],
            n_estimators: g[1] as usize,
            max_depth: g[2] as usize,
            min_child_weight: g[3],
            gamma: g[4],
            subsample: g[5],
            colsample_bytree: g[6],
            seed,
            lambda,
            base_score: None,
        }
    }

    pub fn has_duplicate_features(&self) -> bool {
        let set: HashSet<_> = self.features.iter().collect();
        set.len() != self.features.len()
    }

    /// Every booster gene inside its search range.
    pub fn booster_in_range(&self) -> bool {
        self.booster.iter().zip(&BOOSTER_GENES).all(|(v, b)| b.contains(*v))
    }

    /// Feature genes in ascending order.
    pub fn sorted_features(&self) -> Vec<usize> {
        let mut f = self.features.clone();
        f.sort_unstable();
        f
    }

    /// Identity for fitness caching: exact gene bits and the feature set.
    pub(crate) fn key(&self) -> (Vec<u64>, Vec<usize>) {
        (self.booster.iter().map(|v| v.to_bits()).collect(), self.sorted_features())
    }
}

/// Uniform draw from `[0, v)` outside `current`; `None` when nothing is left.
pub fn draw_new_feature<R: Rng + ?Sized>(current: &HashSet<usize>, v: usize, rng: &mut R) -> Option<usize> {
    if current.len() >= v {
        return None;
    }
    if current.len() * 2 <= v {
        loop {
            let f = rng.gen_range(0..v);
            if !current.contains(&f) {
                return Some(f);
            }
        }
    }
    let free: Vec<usize> = (0..v).filter(|f| !current.contains(f)).collect();
    free.choose(rng).copied()
}

fn random_booster<R: Rng + ?Sized>(rng: &mut R) -> [f64; NUM_BOOSTER_GENES] {
    let steps = (1500usize - 10).div_ceil(N_ESTIMATORS_STEP);
    [
        rng.gen_range(0.01..=1.0),
        (10 + N_ESTIMATORS_STEP * rng.gen_range(0..steps)) as f64,
        rng.gen_range(1..=10) as f64,
        rng.gen_range(0.01..=10.0),
        rng.gen_range(0.01..=10.0),
        rng.gen_range(0.01..=1.0),
        rng.gen_range(0.01..=1.0),
    ]
}

/// `size` random chromosomes with `k` distinct features drawn from `[0, v)`.
pub fn init_population<R: Rng + ?Sized>(size: usize, k: usize, v: usize, rng: &mut R) -> Result<Vec<Chromosome>> {
    if k == 0 {
        return Err(Error::Config("chromosomes need at least one feature gene".into()));
    }
    if v < k {
        return Err(Error::Config(format!(
            "cannot draw {k} distinct features from a space of {v}"
        )));
    }
    Ok((0..size)
        .map(|_| Chromosome {
            booster: random_booster(rng),
            features: sample(rng, v, k).into_vec(),
        })
        .collect())
}

/// The `c` fittest chromosomes, best first; equal fitness keeps population order.
pub fn select_parents(population: &[Chromosome], fitness: &[f64], c: usize) -> Vec<Chromosome> {
    let mut order: Vec<usize> = (0..population.len()).collect();
    order.sort_by(|&a, &b| fitness[b].total_cmp(&fitness[a]).then(a.cmp(&b)));
    order.into_iter().take(c).map(|i| population[i].clone()).collect()
}

/// Uniform crossover of consecutive parent pairs (wrapping around).
///
/// Booster genes: three or four positions (chosen at random) come from the
/// first parent, the rest from the second. Feature genes: `ceil(k/2)` sampled
/// from the first parent, `floor(k/2)` sampled from the second with genes
/// already present skipped, and any shortfall filled with fresh indices.
pub fn crossover<R: Rng + ?Sized>(parents: &[Chromosome], children: usize, v: usize, rng: &mut R) -> Vec<Chromosome> {
    if parents.is_empty() {
        return Vec::new();
    }
    (0..children)
        .map(|i| {
            let a = &parents[i % parents.len()];
            let b = &parents[(i + 1) % parents.len()];
            let from_a = if rng.gen_bool(0.5) {
                NUM_BOOSTER_GENES / 2
            } else {
                NUM_BOOSTER_GENES.div_ceil(2)
            };
            let mut booster = b.booster;
            for pos in sample(rng, NUM_BOOSTER_GENES, from_a) {
                booster[pos] = a.booster[pos];
            }

            let k = a.features.len();
            let mut features: Vec<usize> = Vec::with_capacity(k);
            let mut present: HashSet<usize> = HashSet::with_capacity(k);
            for idx in sample(rng, a.features.len(), k.div_ceil(2)) {
                let f = a.features[idx];
                if present.insert(f) {
                    features.push(f);
                }
            }
            let from_b = (k / 2).min(b.features.len());
            for idx in sample(rng, b.features.len(), from_b) {
                let f = b.features[idx];
                if features.len() < k && present.insert(f) {
                    features.push(f);
                }
            }
            while features.len() < k {
                match draw_new_feature(&present, v, rng) {
                    Some(f) => {
                        present.insert(f);
                        features.push(f);
                    }
                    None => break,
                }
            }
            Chromosome { booster, features }
        })
        .collect()
}

/// Perturbs one booster gene (clamped to its range) and swaps one feature
/// gene for an index not yet in the chromosome.
pub fn mutate<R: Rng + ?Sized>(children: &mut [Chromosome], v: usize, rng: &mut R) {
    for child in children {
        mutate_booster_gene(child, rng.gen_range(0..NUM_BOOSTER_GENES), rng);
        if child.features.is_empty() {
            continue;
        }
        let pos = rng.gen_range(0..child.features.len());
        let present: HashSet<usize> = child.features.iter().copied().collect();
        if let Some(f) = draw_new_feature(&present, v, rng) {
            child.features[pos] = f;
        }
    }
}

pub(crate) fn mutate_booster_gene<R: Rng + ?Sized>(child: &mut Chromosome, gene: usize, rng: &mut R) {
    let bounds = &BOOSTER_GENES[gene];
    let span = MUTATION_SCALE * bounds.width();
    let delta = rng.gen_range(-span..=span);
    child.booster[gene] = bounds.clamp(child.booster[gene] + delta);
}
