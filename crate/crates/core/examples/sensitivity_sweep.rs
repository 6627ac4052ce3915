//! Vary the crossover ratio with everything else fixed and compare the runs,
//! including how often each term was picked.

mod common;

use genoboost::ga::{crossover_grid, feature_frequency, sensitivity_sweep, GaConfig};

fn main() -> anyhow::Result<()> {
    let data = common::sms_dataset(400, 4);
    let base = GaConfig::new(10.0, 12, 6, 4);
    let grid = crossover_grid(&base, &[0.25, 0.5, 0.75, 1.0], 5)?;
    let sweep = sensitivity_sweep(&data.matrix, &data.labels, &grid);

    let mut records = Vec::new();
    for entry in sweep {
        match entry.result {
            Ok(r) => {
                println!("{:<16} best {:.4}", entry.experiment_id, r.best_fitness);
                records.push(r);
            }
            Err(e) => println!("{:<16} failed: {e}", entry.experiment_id),
        }
    }
    for f in feature_frequency(&records, &data.vocabulary)?.iter().take(8) {
        println!("{:<12} chosen in {} of {} runs", f.term, f.count, records.len());
    }
    Ok(())
}
