//! Pairwise Wilcoxon and all-combination Kruskal-Wallis tests over the
//! per-fold scores of several model variants evaluated on the same folds.

mod common;

use genoboost::eval::{repeated_cv, Metric, ModelSpec};
use genoboost::gbt::BoosterParams;
use genoboost::stats::{format_p, kruskal_combinations, pairwise_wilcoxon};

fn main() -> anyhow::Result<()> {
    let data = common::sms_dataset(400, 6);
    let variants = [("depth1", 1, 20), ("depth3", 3, 40), ("depth6", 6, 80)];
    let mut names = Vec::new();
    let mut samples = Vec::new();
    for (name, depth, trees) in variants {
        let spec = ModelSpec {
            params: BoosterParams {
                max_depth: depth,
                n_estimators: trees,
                ..BoosterParams::default()
            },
            features: None,
        };
        // same seed, so fold i of every variant sees the same rows
        let s = repeated_cv(&data.matrix, &data.labels, &spec, 3, 10, 99)?;
        names.push(name.to_string());
        samples.push(s.values(Metric::Gmean));
    }

    let pairs = pairwise_wilcoxon(&names, &samples)?;
    for i in 0..names.len() {
        for j in 0..i {
            let p = pairs.cells[i][j].map_or("NA".to_string(), format_p);
            println!("{} vs {}: p = {p}", names[i], names[j]);
        }
    }
    for c in kruskal_combinations(&samples)? {
        let members: Vec<&str> = c.members.iter().map(|&i| names[i].as_str()).collect();
        println!("{}: H = {:.3}, p = {}", members.join(", "), c.result.h, format_p(c.result.p_value));
    }
    Ok(())
}
