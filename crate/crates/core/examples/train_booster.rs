//! Fit the gradient boosted trees directly on a train/test split.

mod common;

use genoboost::eval::{auc, confusion, metrics, stratified_split};
use genoboost::gbt::{self, BoosterParams};

fn main() -> anyhow::Result<()> {
    let data = common::sms_dataset(600, 2);
    let (train, test) = stratified_split(&data.labels, 0.3, 7)?;
    let pick = |rows: &[usize]| -> Vec<u8> { rows.iter().map(|&i| data.labels[i]).collect() };
    let (xtr, ytr) = (data.matrix.select_rows(&train), pick(&train));
    let (xte, yte) = (data.matrix.select_rows(&test), pick(&test));

    let params = BoosterParams {
        n_estimators: 80,
        max_depth: 4,
        learning_rate: 0.2,
        ..BoosterParams::default()
    };
    let model = gbt::fit(&xtr, &ytr, &params)?;
    let proba = model.predict_proba(&xte)?;
    let pred = gbt::labels_from_proba(&proba, 0.5)?;
    let m = metrics(&confusion(&yte, &pred)?);
    println!("held-out gmean {:.4}  tpr {:.4}  tnr {:.4}", m.gmean, m.tpr, m.tnr);
    println!("held-out auc   {:.4}", auc(&yte, &proba)?);

    // models serialize to JSON and predict identically afterwards
    let restored = gbt::GbtModel::from_json(&model.to_json()?)?;
    assert_eq!(restored.predict_proba(&xte)?, proba);
    Ok(())
}
