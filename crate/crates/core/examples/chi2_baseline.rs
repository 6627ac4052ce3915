//! Filter baseline: rank terms by Chi-square, keep the top k and
//! cross-validate the untuned booster on them.

mod common;

use genoboost::baselines::{chi2_arm, chi2_scores, CvConfig};
use genoboost::eval::Metric;

fn main() -> anyhow::Result<()> {
    let data = common::sms_dataset(500, 7);
    let scores = chi2_scores(&data.matrix, &data.labels)?;
    let cv = CvConfig {
        repeats: 3,
        folds: 10,
        seed: 1,
    };
    let (selected, summary) = chi2_arm(&data.matrix, &data.labels, 10, cv)?;
    for &j in &selected {
        println!("{:<12} {:>8.3}", data.vocabulary.term(j).unwrap_or("?"), scores[j]);
    }
    let g = summary.stat(Metric::Gmean).expect("gmean is always reported");
    println!("top-10 Chi-square gmean {:.4} +/- {:.4}", g.avg, g.sd);
    Ok(())
}
