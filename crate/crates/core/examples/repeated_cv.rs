//! Repeated stratified k-fold validation of one model, with the per-metric
//! summary and a positive-class swap.

mod common;

use genoboost::eval::{describe, repeated_cv, Metric, ModelSpec};
use genoboost::gbt::BoosterParams;

fn main() -> anyhow::Result<()> {
    let data = common::sms_dataset(500, 5);
    let spec = ModelSpec {
        params: BoosterParams {
            n_estimators: 60,
            max_depth: 4,
            ..BoosterParams::default()
        },
        features: None,
    };
    let summary = repeated_cv(&data.matrix, &data.labels, &spec, 5, 10, 11)?;
    println!("{} folds, {} flagged as degenerate", summary.records.len(), summary.flagged());
    for (metric, s) in &summary.stats {
        println!("{:<9} avg {:.4}  sd {:.4}  min {:.4}  max {:.4}", metric.name(), s.avg, s.sd, s.min, s.max);
    }

    let d = describe(&summary.values(Metric::Gmean))?;
    println!("gmean quartiles {:.4} / {:.4} / {:.4}", d.q25, d.median, d.q75);

    let swapped: Vec<f64> = summary.records.iter().map(|r| r.report.swapped().tpr).collect();
    println!("ham recall with ham as positive: {:.4}", describe(&swapped)?.mean);
    Ok(())
}
