//! Projection baseline: principal components of the TF-IDF matrix, and a
//! sweep of held-out accuracy over the number of components.

mod common;

use genoboost::baselines::{pca_fit, pca_sweep, CvConfig};
use genoboost::gbt::BoosterParams;

fn main() -> anyhow::Result<()> {
    let data = common::sms_dataset(300, 8);
    let model = pca_fit(&data.matrix, 5)?;
    for (i, r) in model.explained_variance_ratio().iter().enumerate() {
        println!("component {} explains {:.1}% of the variance", i + 1, r * 100.0);
    }

    let cv = CvConfig {
        repeats: 2,
        folds: 5,
        seed: 3,
    };
    let params = BoosterParams {
        n_estimators: 40,
        max_depth: 3,
        ..BoosterParams::default()
    };
    for row in pca_sweep(&data.matrix, &data.labels, &[1, 2, 4, 8], cv, &params)? {
        println!(
            "{:>2} components: accuracy {:.2}% (sd {:.3})",
            row.components,
            row.accuracy_mean * 100.0,
            row.accuracy_sd
        );
    }
    Ok(())
}
