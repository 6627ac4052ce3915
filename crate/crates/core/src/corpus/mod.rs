//! Text ingestion: CSV loading, tokenization, Porter stemming and TF-IDF.

mod porter;

use std::collections::BTreeMap;
use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

pub use porter::porter_stem;

/// Character encoding of the input CSV.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Encoding {
    #[default]
    Utf8,
    /// ISO-8859-1: every byte maps to the code point of the same value.
    Latin1,
}

impl std::str::FromStr for Encoding {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "utf-8" | "utf8" => Ok(Encoding::Utf8),
            "iso-8859-1" | "latin1" | "latin-1" => Ok(Encoding::Latin1),
            other => Err(Error::Config(format!("unknown encoding {other:?}"))),
        }
    }
}

impl Encoding {
    fn decode(self, bytes: &[u8]) -> Option<String> {
        match self {
            Encoding::Utf8 => std::str::from_utf8(bytes).ok().map(str::to_owned),
            Encoding::Latin1 => Some(bytes.iter().map(|&b| char::from(b)).collect()),
        }
    }
}

/// Column names and class names used when reading a corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusConfig {
    pub text_col: String,
    pub label_col: String,
    pub positive_label: String,
    pub negative_label: String,
    pub encoding: Encoding,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            text_col: "text".into(),
            label_col: "label".into(),
            positive_label: "Spam".into(),
            negative_label: "Ham".into(),
            encoding: Encoding::Utf8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub text: String,
    pub label: String,
}

/// Reads one [`Document`] per data row, in file order.
pub fn load_csv(path: impl AsRef<Path>, config: &CorpusConfig) -> Result<Vec<Document>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_documents(file, config)
}

/// Same as [`load_csv`] over any reader.
pub fn read_documents<R: std::io::Read>(reader: R, config: &CorpusConfig) -> Result<Vec<Document>> {
    let mut rdr = csv::ReaderBuilder::new().flexible(false).from_reader(reader);
    let headers = rdr.byte_headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| config.encoding.decode(h).is_some_and(|h| h.trim() == name))
            .ok_or_else(|| Error::Config(format!("column {name:?} not found in CSV header")))
    };
    let text_idx = find(&config.text_col)?;
    let label_idx = find(&config.label_col)?;

    let mut docs = Vec::new();
    for (i, rec) in rdr.byte_records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| Error::Row {
            row,
            message: e.to_string(),
        })?;
        let field = |idx: usize| -> Result<String> {
            let raw = rec.get(idx).ok_or_else(|| Error::Row {
                row,
                message: "missing field".into(),
            })?;
            config.encoding.decode(raw).ok_or_else(|| Error::Row {
                row,
                message: "field is not valid for the configured encoding".into(),
            })
        };
        let text = field(text_idx)?;
        let label = field(label_idx)?.trim().to_string();
        if text.trim().is_empty() {
            return Err(Error::Row {
                row,
                message: "empty text".into(),
            });
        }
        if label != config.positive_label && label != config.negative_label {
            return Err(Error::Row {
                row,
                message: format!(
                    "label {label:?} is neither {:?} nor {:?}",
                    config.positive_label, config.negative_label
                ),
            });
        }
        docs.push(Document { text, label });
    }
    Ok(docs)
}

/// Splits on every character outside `[A-Za-z0-9-]` (so `@` never survives)
/// and lowercases. Stop words are kept.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !(c.is_ascii_alphanumeric() || c == '-'))
        .filter(|t| !t.is_empty())
        .map(str::to_ascii_lowercase)
        .collect()
}

/// Tokenizes and stems one document.
pub fn analyze(text: &str) -> Vec<String> {
    tokenize(text).iter().map(|t| porter_stem(t)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    terms: Vec<String>,
    df: Vec<usize>,
    n_docs: usize,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    /// Builds a vocabulary from `(term, df)` pairs over a corpus of `n_docs`
    /// documents; terms are re-sorted lexicographically and must be unique.
    pub fn from_terms(mut entries: Vec<(String, usize)>, n_docs: usize) -> Result<Self> {
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        if let Some(w) = entries.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::invalid(format!("duplicate term {:?}", w[0].0)));
        }
        if let Some((t, _)) = entries.iter().find(|(_, df)| *df == 0 || *df > n_docs) {
            return Err(Error::invalid(format!("term {t:?} has document frequency outside 1..={n_docs}")));
        }
        let (terms, df): (Vec<_>, Vec<_>) = entries.into_iter().unzip();
        let index = terms.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Ok(Vocabulary {
            terms,
            df,
            n_docs,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn term(&self, index: usize) -> Option<&str> {
        self.terms.get(index).map(String::as_str)
    }

    pub fn df(&self, index: usize) -> usize {
        self.df[index]
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    /// Number of documents the vocabulary was fitted on.
    pub fn n_docs(&self) -> usize {
        self.n_docs
    }
}

/// Collects every distinct stemmed token; indices follow lexicographic term order.
pub fn fit_vocabulary(docs: &[Document]) -> Result<Vocabulary> {
    if docs.is_empty() {
        return Err(Error::invalid("cannot fit a vocabulary on an empty corpus"));
    }
    let mut df: BTreeMap<String, usize> = BTreeMap::new();
    for doc in docs {
        let mut terms = analyze(&doc.text);
        terms.sort_unstable();
        terms.dedup();
        for t in terms {
            *df.entry(t).or_default() += 1;
        }
    }
    Vocabulary::from_terms(df.into_iter().collect(), docs.len())
}

/// Smoothed inverse document frequency `ln((1+n)/(1+df)) + 1`.
pub fn smoothed_idf(n_docs: usize, df: usize) -> f64 {
    ((1.0 + n_docs as f64) / (1.0 + df as f64)).ln() + 1.0
}

/// Raw-count TF times smoothed IDF, each nonzero row scaled to unit L2 norm.
/// Tokens outside the vocabulary are ignored; a row with none is left all-zero.
pub fn tfidf_transform(docs: &[Document], vocab: &Vocabulary) -> SparseMatrix {
    let idf: Vec<f64> = (0..vocab.len())
        .map(|j| smoothed_idf(vocab.n_docs(), vocab.df(j)))
        .collect();
    let mut m = SparseMatrix::empty(vocab.len());
    for doc in docs {
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for t in analyze(&doc.text) {
            if let Some(j) = vocab.index_of(&t) {
                *counts.entry(j).or_default() += 1;
            }
        }
        let mut row: Vec<(usize, f64)> = counts
            .into_iter()
            .map(|(j, c)| (j, c as f64 * idf[j]))
            .collect();
        let norm = row.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
        if norm > 0.0 {
            for e in &mut row {
                e.1 /= norm;
            }
        }
        m.push_row(&row).expect("indices come from the vocabulary");
    }
    m
}

/// Maps the positive class name to 1 and the negative one to 0.
pub fn encode_labels(docs: &[Document], positive: &str, negative: &str) -> Result<Vec<u8>> {
    docs.iter()
        .enumerate()
        .map(|(i, d)| {
            if d.label == positive {
                Ok(1)
            } else if d.label == negative {
                Ok(0)
            } else {
                Err(Error::Row {
                    row: i + 1,
                    message: format!("unknown label {:?}", d.label),
                })
            }
        })
        .collect()
}

/// Vectorized corpus: the search space the optimizer works over.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub matrix: SparseMatrix,
    pub labels: Vec<u8>,
    pub vocabulary: Vocabulary,
    pub positive_label: String,
}

impl LabeledDataset {
    pub fn new(
        matrix: SparseMatrix,
        labels: Vec<u8>,
        vocabulary: Vocabulary,
        positive_label: impl Into<String>,
    ) -> Result<Self> {
        if labels.len() != matrix.rows() {
            return Err(Error::Shape {
                expected: matrix.rows(),
                actual: labels.len(),
            });
        }
        if labels.iter().any(|&l| l > 1) {
            return Err(Error::invalid("labels must be 0 or 1"));
        }
        if vocabulary.len() != matrix.cols() {
            return Err(Error::Shape {
                expected: matrix.cols(),
                actual: vocabulary.len(),
            });
        }
        Ok(LabeledDataset {
            matrix,
            labels,
            vocabulary,
            positive_label: positive_label.into(),
        })
    }

    /// Runs the full pipeline over already-loaded documents.
    pub fn from_documents(docs: &[Document], config: &CorpusConfig) -> Result<Self> {
        let labels = encode_labels(docs, &config.positive_label, &config.negative_label)?;
        let vocab = fit_vocabulary(docs)?;
        let matrix = tfidf_transform(docs, &vocab);
        LabeledDataset::new(matrix, labels, vocab, config.positive_label.clone())
    }

    pub fn from_csv(path: impl AsRef<Path>, config: &CorpusConfig) -> Result<Self> {
        let docs = load_csv(path, config)?;
        Self::from_documents(&docs, config)
    }

    pub fn rows(&self) -> usize {
        self.labels.len()
    }

    pub fn positives(&self) -> usize {
        self.labels.iter().filter(|&&l| l == 1).count()
    }

    pub fn positive_share(&self) -> f64 {
        if self.labels.is_empty() {
            0.0
        } else {
            self.positives() as f64 / self.labels.len() as f64
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(text: &str, label: &str) -> Document {
        Document {
            text: text.into(),
            label: label.into(),
        }
    }

    #[test]
    fn tokenize_examples() {
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("Win FREE  entry!!"), ["win", "free", "entry"]);
        assert_eq!(tokenize("semi-final @user"), ["semi-final", "user"]);
        assert_eq!(tokenize("@@a.b,c"), ["a", "b", "c"]);
    }

    #[test]
    fn vocabulary_counts_documents() {
        let docs = [doc("a b", "Ham"), doc("b c", "Ham")];
        let v = fit_vocabulary(&docs).unwrap();
        assert_eq!(v.terms(), ["a", "b", "c"]);
        assert_eq!((v.df(0), v.df(1), v.df(2)), (1, 2, 1));

        let v = fit_vocabulary(&[doc("x x x", "Ham")]).unwrap();
        assert_eq!(v.terms(), ["x"]);
        assert_eq!(v.df(0), 1);

        assert!(fit_vocabulary(&[]).is_err());
    }

    #[test]
    fn idf_of_ubiquitous_term_is_one() {
        assert_eq!(smoothed_idf(2, 2), 1.0);
    }

    #[test]
    fn tfidf_rows() {
        let docs = [doc("alpha", "Ham"), doc("alpha beta beta", "Spam")];
        let v = fit_vocabulary(&docs).unwrap();
        let m = tfidf_transform(&docs, &v);
        assert_eq!(m.row(0).1, &[1.0]);
        // alpha: tf 1, idf 1; beta: tf 2, idf ln(3/2)+1
        let b = 2.0 * ((3.0f64 / 2.0).ln() + 1.0);
        let n = (1.0 + b * b).sqrt();
        let (_, vals) = m.row(1);
        assert!((vals[0] - 1.0 / n).abs() < 1e-15);
        assert!((vals[1] - b / n).abs() < 1e-15);

        let empty = tfidf_transform(&[doc("zzz", "Ham")], &v);
        assert_eq!(empty.row(0).0.len(), 0);
    }

    #[test]
    fn labels_encode() {
        let docs = [doc("x", "Ham"), doc("y", "Spam")];
        assert_eq!(encode_labels(&docs, "Spam", "Ham").unwrap(), [0, 1]);
        let docs = [doc("x", "Spam"), doc("y", "Spam"), doc("z", "Ham")];
        assert_eq!(encode_labels(&docs, "Spam", "Ham").unwrap(), [1, 1, 0]);
        assert!(encode_labels(&[doc("x", "Junk")], "Spam", "Ham").is_err());
    }

    #[test]
    fn csv_reading() {
        let cfg = CorpusConfig::default();
        let docs = read_documents("text,label\nhello there,Ham\nwin now,Spam\n".as_bytes(), &cfg).unwrap();
        assert_eq!(docs.len(), 2);
        assert_eq!(docs[1].text, "win now");

        let err = read_documents("text,label\nok,Ham\nbad,Junk\n".as_bytes(), &cfg).unwrap_err();
        assert!(matches!(err, Error::Row { row: 2, .. }), "{err}");

        let err = read_documents("body,label\nok,Ham\n".as_bytes(), &cfg).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn latin1_decoding() {
        let cfg = CorpusConfig {
            encoding: Encoding::Latin1,
            ..CorpusConfig::default()
        };
        let bytes = b"text,label\ncaf\xe9 ok,Ham\n";
        let docs = read_documents(&bytes[..], &cfg).unwrap();
        assert_eq!(docs[0].text, "caf\u{e9} ok");
        assert!(read_documents(&bytes[..], &CorpusConfig::default()).is_err());
    }
}
