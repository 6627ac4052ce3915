//! Tokenize, stem and TF-IDF weight a labelled CSV, then write the dump that
//! the other commands load.
//!
//!     cargo run --example vectorize_corpus [OUT_DIR]

mod common;

use genoboost::corpus::{analyze, read_documents, CorpusConfig, LabeledDataset};
use genoboost::report;
use std::path::PathBuf;

fn main() -> anyhow::Result<()> {
    let config = CorpusConfig::default();
    let csv = common::sms_csv(400, 1);
    let docs = read_documents(csv.as_bytes(), &config)?;
    println!("first message: {:?}", docs[0].text);
    println!("analyzed:      {:?}", analyze(&docs[0].text));

    let data = LabeledDataset::from_documents(&docs, &config)?;
    println!(
        "{} rows, {} terms, {} stored values, {:.1}% positive",
        data.rows(),
        data.vocabulary.len(),
        data.matrix.nnz(),
        data.positive_share() * 100.0
    );

    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("genoboost-example-dump"));
    report::save_dataset(&out, &data)?;
    let back = report::load_dataset(&out)?;
    // weights are stored to six significant digits
    assert_eq!((back.matrix.rows(), back.matrix.nnz()), (data.matrix.rows(), data.matrix.nnz()));
    assert_eq!(back.labels, data.labels);
    println!("dump written to {}", out.display());
    Ok(())
}
