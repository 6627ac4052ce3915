//! Genetic search over booster hyperparameters and feature subsets.
//!
//! A chromosome carries seven booster genes and `k` distinct feature indices.
//! Each generation keeps the `C` fittest chromosomes as parents, breeds
//! `P - C` children by uniform crossover, mutates the children and evaluates
//! them. Fitness is the geometric mean of sensitivity and specificity on a
//! fixed stratified hold-out split.

mod operators;

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::eval::{confusion, gmean, stratified_split};
use crate::gbt::{self, DEFAULT_BOOSTER_SEED};
use crate::seed::{derive_indexed, rng_for, rng_indexed};
use crate::sparse::SparseMatrix;

pub use operators::{
    crossover, draw_new_feature, init_population, mutate, select_parents, Chromosome, GeneBounds,
    BOOSTER_GENES, MUTATION_SCALE, NUM_BOOSTER_GENES,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    /// Percent of the feature space each chromosome selects (F).
    pub feature_percent: f64,
    /// Population size (P).
    pub population: usize,
    /// Parents kept and mated each generation (C).
    pub parents: usize,
    /// Number of generations (G).
    pub generations: usize,
    pub master_seed: u64,
    /// Share of rows held out for fitness evaluation.
    pub test_fraction: f64,
    pub booster_seed: u64,
    pub lambda: f64,
}

impl GaConfig {
    pub fn new(feature_percent: f64, population: usize, parents: usize, generations: usize) -> Self {
        GaConfig {
            feature_percent,
            population,
            parents,
            generations,
            master_seed: 0,
            test_fraction: 0.30,
            booster_seed: DEFAULT_BOOSTER_SEED,
            lambda: 1.0,
        }
    }

    /// Parent count derived as `round(ratio * population)`.
    pub fn with_crossover_ratio(feature_percent: f64, population: usize, ratio: f64, generations: usize) -> Result<Self> {
        if !(ratio > 0.0 && ratio <= 1.0) {
            return Err(Error::Config(format!("crossover ratio must be in (0, 1], got {ratio}")));
        }
        let parents = (ratio * population as f64).round() as usize;
        Ok(GaConfig::new(feature_percent, population, parents.max(1), generations))
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.master_seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.feature_percent > 0.0 && self.feature_percent <= 100.0) {
            return Err(Error::Config(format!(
                "feature percent must be in (0, 100], got {}",
                self.feature_percent
            )));
        }
        if self.population == 0 {
            return Err(Error::Config("population must be at least 1".into()));
        }
        if self.parents == 0 || self.parents > self.population {
            return Err(Error::Config(format!(
                "parents must be in 1..={}, got {}",
                self.population, self.parents
            )));
        }
        if self.generations == 0 {
            return Err(Error::Config("generations must be at least 1".into()));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::Config("test fraction must be in (0, 1)".into()));
        }
        Ok(())
    }

    /// Feature genes per chromosome for a space of `v` features.
    pub fn feature_genes(&self, v: usize) -> Result<usize> {
        let k = (self.feature_percent / 100.0 * v as f64).round() as usize;
        if k == 0 {
            return Err(Error::Config(format!(
                "{}% of {v} features rounds to zero feature genes",
                self.feature_percent
            )));
        }
        Ok(k.min(v))
    }

    /// Identifier of the form `F{F}-P{P}-C{C}-G{G}`.
    pub fn experiment_id(&self) -> String {
        format!(
            "F{}-P{}-C{}-G{}",
            self.feature_percent, self.population, self.parents, self.generations
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    /// Best fitness seen so far in the run.
    pub best_fitness: f64,
    /// Mean fitness of this generation's population.
    pub mean_fitness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub experiment_id: String,
    pub config: GaConfig,
    pub feature_space: usize,
    pub feature_genes: usize,
    pub trace: Vec<GenerationStats>,
    pub best: Chromosome,
    pub best_fitness: f64,
    pub best_generation: usize,
    /// Number of distinct fitness evaluations performed.
    pub evaluations: usize,
    pub wall_clock_secs: f64,
}

/// Fitness on a fixed train/test split, cached per chromosome.
pub struct FitnessEvaluator {
    train_x: SparseMatrix,
    train_y: Vec<u8>,
    test_x: SparseMatrix,
    test_y: Vec<u8>,
    booster_seed: u64,
    lambda: f64,
    cache: Mutex<HashMap<(Vec<u64>, Vec<usize>), f64>>,
    evaluations: AtomicUsize,
}

impl FitnessEvaluator {
    pub fn new(
        train_x: SparseMatrix,
        train_y: Vec<u8>,
        test_x: SparseMatrix,
        test_y: Vec<u8>,
        booster_seed: u64,
        lambda: f64,
    ) -> Self {
        FitnessEvaluator {
            train_x,
            train_y,
            test_x,
            test_y,
            booster_seed,
            lambda,
            cache: Mutex::new(HashMap::new()),
            evaluations: AtomicUsize::new(0),
        }
    }

    /// Splits `x`/`labels` into a stratified hold-out for fitness scoring.
    pub fn from_split(x: &SparseMatrix, labels: &[u8], config: &GaConfig) -> Result<Self> {
        let split_seed = crate::seed::derive_seed(config.master_seed, "ga/split");
        let (train, test) = stratified_split(labels, config.test_fraction, split_seed)?;
        Ok(FitnessEvaluator::new(
            x.select_rows(&train),
            train.iter().map(|&i| labels[i]).collect(),
            x.select_rows(&test),
            test.iter().map(|&i| labels[i]).collect(),
            config.booster_seed,
            config.lambda,
        ))
    }

    /// Trains on the chromosome's features and returns the hold-out GMean.
    /// Any training failure scores 0.
    pub fn score(&self, chromosome: &Chromosome) -> f64 {
        match self.try_score(chromosome) {
            Ok(f) => f,
            Err(e) => {
                log::warn!("chromosome scored 0: {e}");
                0.0
            }
        }
    }

    fn try_score(&self, chromosome: &Chromosome) -> Result<f64> {
        let features = chromosome.sorted_features();
        let params = chromosome.params(self.booster_seed, self.lambda);
        let xtr = self.train_x.select_columns(&features)?;
        let xte = self.test_x.select_columns(&features)?;
        let model = gbt::fit(&xtr, &self.train_y, &params)?;
        let pred = model.predict_label(&xte, 0.5)?;
        Ok(gmean(&confusion(&self.test_y, &pred)?))
    }

    /// Cached fitness of every chromosome, evaluating new ones in parallel.
    pub fn evaluate(&self, population: &[Chromosome]) -> Vec<f64> {
        let keys: Vec<_> = population.iter().map(Chromosome::key).collect();
        let mut todo: Vec<usize> = Vec::new();
        {
            let cache = self.cache.lock().expect("fitness cache poisoned");
            let mut seen = std::collections::HashSet::new();
            for (i, k) in keys.iter().enumerate() {
                if !cache.contains_key(k) && seen.insert(k.clone()) {
                    todo.push(i);
                }
            }
        }
        let fresh: Vec<(usize, f64)> = todo
            .par_iter()
            .map(|&i| (i, self.score(&population[i])))
            .collect();
        self.evaluations.fetch_add(fresh.len(), Ordering::Relaxed);
        let mut cache = self.cache.lock().expect("fitness cache poisoned");
        for (i, f) in fresh {
            cache.insert(keys[i].clone(), f);
        }
        keys.iter().map(|k| cache[k]).collect()
    }

    pub fn evaluations(&self) -> usize {
        self.evaluations.load(Ordering::Relaxed)
    }
}

/// Runs the search; see [`run_with_observer`].
pub fn run(x: &SparseMatrix, labels: &[u8], config: &GaConfig) -> Result<ExperimentRecord> {
    run_with_observer(x, labels, config, |_| {})
}

/// Runs the search, calling `observe` after every generation (including the
/// initial one) so callers can stream the fitness curve.
pub fn run_with_observer(
    x: &SparseMatrix,
    labels: &[u8],
    config: &GaConfig,
    mut observe: impl FnMut(&GenerationStats),
) -> Result<ExperimentRecord> {
    config.validate()?;
    if labels.len() != x.rows() {
        return Err(Error::Shape {
            expected: x.rows(),
            actual: labels.len(),
        });
    }
    let positives = labels.iter().filter(|&&l| l == 1).count();
    if positives == 0 || positives == labels.len() {
        return Err(Error::SingleClass);
    }
    let started = Instant::now();
    let v = x.cols();
    let k = config.feature_genes(v)?;
    let evaluator = FitnessEvaluator::from_split(x, labels, config)?;

    let mut population = init_population(config.population, k, v, &mut rng_for(config.master_seed, "ga/init"))?;
    let mut fitness = evaluator.evaluate(&population);
    let mut trace = Vec::with_capacity(config.generations + 1);
    let mut best_idx = argmax(&fitness);
    let mut best = population[best_idx].clone();
    let mut best_fitness = fitness[best_idx];
    let mut best_generation = 0;
    let stats = GenerationStats {
        generation: 0,
        best_fitness,
        mean_fitness: mean(&fitness),
    };
    observe(&stats);
    trace.push(stats);

    for generation in 1..=config.generations {
        let mut rng = rng_indexed(config.master_seed, "ga/generation", generation as u64);
        let parents = select_parents(&population, &fitness, config.parents);
        let mut children = crossover(&parents, config.population - config.parents, v, &mut rng);
        mutate(&mut children, v, &mut rng);
        population = parents;
        population.extend(children);
        fitness = evaluator.evaluate(&population);

        best_idx = argmax(&fitness);
        if fitness[best_idx] > best_fitness {
            best_fitness = fitness[best_idx];
            best = population[best_idx].clone();
            best_generation = generation;
        }
        let stats = GenerationStats {
            generation,
            best_fitness,
            mean_fitness: mean(&fitness),
        };
        observe(&stats);
        trace.push(stats);
    }

    Ok(ExperimentRecord {
        experiment_id: config.experiment_id(),
        config: config.clone(),
        feature_space: v,
        feature_genes: k,
        trace,
        best,
        best_fitness,
        best_generation,
        evaluations: evaluator.evaluations(),
        wall_clock_secs: started.elapsed().as_secs_f64(),
    })
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len().max(1) as f64
}

/// Copies of `base` with the parent count set from each crossover ratio and a
/// seed derived per position from `master_seed`.
pub fn crossover_grid(base: &GaConfig, ratios: &[f64], master_seed: u64) -> Result<Vec<GaConfig>> {
    ratios
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let mut c = GaConfig::with_crossover_ratio(base.feature_percent, base.population, r, base.generations)?;
            c.test_fraction = base.test_fraction;
            c.booster_seed = base.booster_seed;
            c.lambda = base.lambda;
            c.master_seed = derive_indexed(master_seed, "ga/sweep", i as u64);
            Ok(c)
        })
        .collect()
}

/// Outcome of one configuration in a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepEntry {
    pub experiment_id: String,
    pub result: std::result::Result<ExperimentRecord, String>,
}

/// Runs each configuration independently; a failing configuration is recorded
/// and the sweep continues.
pub fn sensitivity_sweep(x: &SparseMatrix, labels: &[u8], grid: &[GaConfig]) -> Vec<SweepEntry> {
    grid.iter()
        .map(|config| SweepEntry {
            experiment_id: config.experiment_id(),
            result: run(x, labels, config).map_err(|e| e.to_string()),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureFrequency {
    pub term: String,
    pub index: usize,
    pub count: usize,
    /// Presence in each record's best chromosome, in record order.
    pub presence: Vec<bool>,
}

/// How often each feature appears among the records' best chromosomes,
/// most frequent first, ties by index.
pub fn feature_frequency(records: &[ExperimentRecord], vocab: &Vocabulary) -> Result<Vec<FeatureFrequency>> {
    let sets: Vec<&[usize]> = records.iter().map(|r| r.best.features.as_slice()).collect();
    feature_frequency_of(&sets, |i| vocab.term(i).map(str::to_string))
}

/// [`feature_frequency`] over bare feature sets, resolving terms with `term`.
pub fn feature_frequency_of(
    sets: &[&[usize]],
    term: impl Fn(usize) -> Option<String>,
) -> Result<Vec<FeatureFrequency>> {
    if sets.is_empty() {
        return Err(Error::invalid("feature frequency needs at least one record"));
    }
    let mut rows: HashMap<usize, Vec<bool>> = HashMap::new();
    for (r, set) in sets.iter().enumerate() {
        for &f in *set {
            rows.entry(f).or_insert_with(|| vec![false; sets.len()])[r] = true;
        }
    }
    let mut out: Vec<FeatureFrequency> = rows
        .into_iter()
        .map(|(index, presence)| {
            let term = term(index).ok_or_else(|| Error::invalid(format!("feature {index} is outside the vocabulary")))?;
            Ok(FeatureFrequency {
                term,
                index,
                count: presence.iter().filter(|p| **p).count(),
                presence,
            })
        })
        .collect::<Result<_>>()?;
    out.sort_by(|a, b| b.count.cmp(&a.count).then(a.index.cmp(&b.index)));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn experiment_ids() {
        assert_eq!(GaConfig::new(10.0, 400, 240, 50).experiment_id(), "F10-P400-C240-G50");
        assert_eq!(GaConfig::new(1.0, 10, 6, 100).experiment_id(), "F1-P10-C6-G100");
        assert_eq!(GaConfig::new(20.0, 300, 100, 50).experiment_id(), "F20-P300-C100-G50");
        let c = GaConfig::with_crossover_ratio(10.0, 400, 0.6, 50).unwrap();
        assert_eq!(c.experiment_id(), "F10-P400-C240-G50");
        assert!(GaConfig::with_crossover_ratio(10.0, 400, 1.5, 50).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(GaConfig::new(0.0, 10, 5, 1).validate().is_err());
        assert!(GaConfig::new(5.0, 10, 11, 1).validate().is_err());
        assert!(GaConfig::new(5.0, 10, 5, 0).validate().is_err());
        assert_eq!(GaConfig::new(10.0, 10, 5, 1).feature_genes(14343).unwrap(), 1434);
        assert!(GaConfig::new(1.0, 10, 5, 1).feature_genes(20).is_err());
    }

    pub(crate) fn synthetic(n: usize, v: usize, informative: usize, seed: u64) -> (SparseMatrix, Vec<u8>) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for _ in 0..n {
            let y = u8::from(rng.gen_bool(0.3));
            let mut row = Vec::new();
            for j in 0..v {
                let p = if j < informative { if y == 1 { 0.5 } else { 0.05 } } else { 0.1 };
                if rng.gen_bool(p) {
                    row.push((j, rng.gen_range(0.2..1.0)));
                }
            }
            rows.push(row);
            labels.push(y);
        }
        (SparseMatrix::from_rows(v, rows).unwrap(), labels)
    }

    #[test]
    fn run_is_elitist_cached_and_deterministic() {
        let (x, y) = synthetic(150, 60, 5, 3);
        let config = GaConfig::new(10.0, 8, 4, 4).with_seed(9);
        let mut streamed = Vec::new();
        let rec = run_with_observer(&x, &y, &config, |s| streamed.push(*s)).unwrap();
        assert_eq!(rec.trace.len(), 5);
        assert_eq!(streamed, rec.trace);
        for w in rec.trace.windows(2) {
            assert!(w[1].best_fitness >= w[0].best_fitness);
        }
        // 8 initial + at most 4 children per generation
        assert!(rec.evaluations <= 8 + 4 * 4);
        assert_eq!(rec.best.features.len(), 6);
        let again = run(&x, &y, &config).unwrap();
        assert_eq!(
            (again.trace.clone(), again.best.clone(), again.evaluations),
            (rec.trace.clone(), rec.best.clone(), rec.evaluations)
        );
    }

    #[test]
    fn evaluator_caches() {
        let (x, y) = synthetic(80, 20, 3, 1);
        let config = GaConfig::new(20.0, 4, 2, 1);
        let ev = FitnessEvaluator::from_split(&x, &y, &config).unwrap();
        let pop = init_population(4, 4, 20, &mut rand_chacha::ChaCha8Rng::seed_from_u64(0)).unwrap();
        let a = ev.evaluate(&pop);
        let b = ev.evaluate(&pop);
        assert_eq!(a, b);
        assert_eq!(ev.evaluations(), 4);
        assert!(a.iter().all(|f| (0.0..=1.0).contains(f)));
    }

    #[test]
    fn sweep_runs_every_config() {
        assert!(sensitivity_sweep(&SparseMatrix::empty(3), &[], &[]).is_empty());
        let (x, y) = synthetic(80, 30, 3, 2);
        let base = GaConfig::new(10.0, 6, 3, 2);
        let grid = crossover_grid(&base, &[0.5, 1.0], 4).unwrap();
        let out = sensitivity_sweep(&x, &y, &grid);
        assert_eq!(out[0].experiment_id, "F10-P6-C3-G2");
        assert_eq!(out[1].experiment_id, "F10-P6-C6-G2");
        assert!(out.iter().all(|e| e.result.is_ok()));
        let bad = vec![GaConfig::new(1.0, 6, 3, 2)];
        assert!(sensitivity_sweep(&x, &y, &bad)[0].result.is_err());
    }

    #[test]
    fn frequency_table() {
        let vocab = Vocabulary::from_terms((0..5).map(|i| (format!("t{i}"), 1)).collect(), 1).unwrap();
        let (x, y) = synthetic(60, 5, 2, 5);
        let mut a = run(&x, &y, &GaConfig::new(40.0, 4, 2, 1)).unwrap();
        let mut b = a.clone();
        a.best.features = vec![3, 1];
        b.best.features = vec![1, 4];
        let rows = feature_frequency(&[a.clone(), b], &vocab).unwrap();
        assert_eq!(rows[0].index, 1);
        assert_eq!(rows[0].count, 2);
        assert_eq!(rows[0].presence, [true, true]);
        assert_eq!(rows.len(), 3);
        assert!(rows.iter().all(|r| r.index != 0));
        let single = feature_frequency(&[a], &vocab).unwrap();
        assert_eq!(single.iter().find(|r| r.index == 3).unwrap().term, "t3");
        assert!(feature_frequency(&[], &vocab).is_err());
    }
}
