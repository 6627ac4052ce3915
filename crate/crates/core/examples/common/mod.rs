//! A small generated SMS-like corpus so the examples run without downloads.

use genoboost::corpus::{read_documents, CorpusConfig, LabeledDataset};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SPAM: &[&str] = &[
    "win", "winner", "prize", "claim", "free", "cash", "urgent", "offer", "call", "txt", "reply", "stop",
    "awarded", "guaranteed", "mobile", "ringtone",
];
const HAM: &[&str] = &[
    "lunch", "home", "later", "meet", "love", "work", "tomorrow", "see", "sorry", "going", "night", "dinner",
    "class", "busy", "movie", "thanks", "morning", "sleeping", "coming", "waiting",
];

/// CSV text with `text,label` columns, about a sixth of it spam.
#[allow(dead_code)]
pub fn sms_csv(rows: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::from("text,label\n");
    for _ in 0..rows {
        let spam = rng.gen_bool(0.17);
        let len = rng.gen_range(4..14);
        let words: Vec<&str> = (0..len)
            .map(|_| {
                let pool = if spam && rng.gen_bool(0.45) { SPAM } else { HAM };
                pool[rng.gen_range(0..pool.len())]
            })
            .collect();
        out.push_str(&format!("{},{}\n", words.join(" "), if spam { "Spam" } else { "Ham" }));
    }
    out
}

#[allow(dead_code)]
pub fn sms_dataset(rows: usize, seed: u64) -> LabeledDataset {
    let config = CorpusConfig::default();
    let docs = read_documents(sms_csv(rows, seed).as_bytes(), &config).expect("generated CSV parses");
    LabeledDataset::from_documents(&docs, &config).expect("both classes present")
}
