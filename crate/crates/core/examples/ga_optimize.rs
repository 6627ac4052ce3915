//! Search feature subsets and booster settings together, streaming the
//! best-so-far fitness per generation.
//!
//!     cargo run --release --example ga_optimize

mod common;

use genoboost::ga::{self, GaConfig};

fn main() -> anyhow::Result<()> {
    let data = common::sms_dataset(500, 3);
    // F=10% of terms, P=24, C=60% of P, G=8
    let config = GaConfig::with_crossover_ratio(10.0, 24, 0.6, 8)?.with_seed(42);
    println!("{}: {} feature genes", config.experiment_id(), config.feature_genes(data.matrix.cols())?);

    let record = ga::run_with_observer(&data.matrix, &data.labels, &config, |s| {
        println!("generation {:>2}  best {:.4}  mean {:.4}", s.generation, s.best_fitness, s.mean_fitness);
    })?;

    let params = record.best.params(config.booster_seed, config.lambda);
    println!(
        "best {:.4} at generation {} after {} evaluations",
        record.best_fitness, record.best_generation, record.evaluations
    );
    println!(
        "lr {:.3}, {} trees, depth {}, subsample {:.2}",
        params.learning_rate, params.n_estimators, params.max_depth, params.subsample
    );
    let terms: Vec<&str> = record
        .best
        .sorted_features()
        .into_iter()
        .filter_map(|i| data.vocabulary.term(i))
        .collect();
    println!("selected terms: {}", terms.join(" "));
    Ok(())
}
