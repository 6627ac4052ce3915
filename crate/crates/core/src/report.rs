//! On-disk formats. Every writer has a matching reader so artifacts can be
//! fed back into later steps.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::baselines::PcaSweepRow;
use crate::corpus::{LabeledDataset, Vocabulary};
use crate::error::{Error, Result};
use crate::eval::{CvSummary, Description, FoldRecord, Metric, MetricsReport};
use crate::ga::{Chromosome, ExperimentRecord, FeatureFrequency, GenerationStats};
use crate::gbt::BoosterParams;
use crate::sparse::SparseMatrix;
use crate::stats::{format_p, Combination, PairwiseMatrix};

pub const MATRIX_FILE: &str = "matrix.txt";
pub const VOCAB_FILE: &str = "vocab.tsv";
pub const LABELS_FILE: &str = "labels.txt";
pub const DATASET_META_FILE: &str = "dataset.json";

/// Shortest decimal that parses back to the same value.
pub fn fmt_float(v: f64) -> String {
    format!("{v}")
}

/// `v` rounded to six significant digits.
pub fn fmt_sig6(v: f64) -> String {
    let rounded: f64 = format!("{v:.5e}").parse().expect("formatted float parses");
    format!("{rounded}")
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    Ok(csv::Writer::from_writer(create(path)?))
}

fn csv_reader(path: &Path) -> Result<csv::Reader<BufReader<File>>> {
    Ok(csv::Reader::from_reader(open(path)?))
}

fn finish(path: &Path, mut w: csv::Writer<BufWriter<File>>) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

fn parse_num<T: std::str::FromStr>(path: &Path, line: usize, field: &str, raw: &str) -> Result<T> {
    raw.trim().parse().map_err(|_| Error::Row {
        row: line,
        message: format!("{}: bad {field} value {raw:?}", path.display()),
    })
}

/// Column positions looked up by header name.
struct Header(Vec<String>);

impl Header {
    fn read(r: &mut csv::Reader<BufReader<File>>) -> Result<Header> {
        Ok(Header(r.headers()?.iter().map(|h| h.trim().to_string()).collect()))
    }

    fn find(&self, name: &str) -> Option<usize> {
        self.0.iter().position(|h| h == name)
    }

    fn require(&self, path: &Path, name: &str) -> Result<usize> {
        self.find(name)
            .ok_or_else(|| Error::Config(format!("{}: missing column {name:?}", path.display())))
    }
}

// ---------------------------------------------------------------- dataset dump

/// Side information stored next to a dataset dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub rows: usize,
    pub features: usize,
    pub positive_label: String,
    /// Weighting used by the vectorizer, recorded so runs can be compared.
    pub idf: String,
    pub normalization: String,
}

/// Writes `rows cols` and one line of `index:weight` pairs per row.
pub fn write_matrix(path: &Path, x: &SparseMatrix) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "{} {}", x.rows(), x.cols()).map_err(io)?;
    for r in 0..x.rows() {
        let line: Vec<String> = x.row_entries(r).map(|(j, v)| format!("{j}:{}", fmt_sig6(v))).collect();
        writeln!(w, "{}", line.join(" ")).map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn read_matrix(path: &Path) -> Result<SparseMatrix> {
    let mut lines = open(path)?.lines();
    let io = |e| Error::io(path, e);
    let header = lines
        .next()
        .transpose()
        .map_err(io)?
        .ok_or_else(|| Error::invalid(format!("{}: empty matrix file", path.display())))?;
    let dims: Vec<&str> = header.split_whitespace().collect();
    if dims.len() != 2 {
        return Err(Error::invalid(format!("{}: header must be `rows cols`", path.display())));
    }
    let rows: usize = parse_num(path, 1, "rows", dims[0])?;
    let cols: usize = parse_num(path, 1, "cols", dims[1])?;
    let mut x = SparseMatrix::empty(cols);
    for (i, line) in lines.enumerate() {
        let line = line.map_err(io)?;
        let mut entries = Vec::new();
        for pair in line.split_whitespace() {
            let (j, v) = pair.split_once(':').ok_or_else(|| Error::Row {
                row: i + 2,
                message: format!("expected index:weight, got {pair:?}"),
            })?;
            entries.push((parse_num(path, i + 2, "index", j)?, parse_num(path, i + 2, "weight", v)?));
        }
        x.push_row(&entries).map_err(|e| Error::Row {
            row: i + 2,
            message: e.to_string(),
        })?;
    }
    if x.rows() != rows {
        return Err(Error::Shape {
            expected: rows,
            actual: x.rows(),
        });
    }
    Ok(x)
}

/// Writes `index\tterm\tdf`, one term per line.
pub fn write_vocabulary(path: &Path, vocab: &Vocabulary) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "index\tterm\tdf").map_err(io)?;
    for (i, t) in vocab.terms().iter().enumerate() {
        writeln!(w, "{i}\t{t}\t{}", vocab.df(i)).map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn read_vocabulary(path: &Path, n_docs: usize) -> Result<Vocabulary> {
    let mut entries = Vec::new();
    for (i, line) in open(path)?.lines().enumerate().skip(1) {
        let line = line.map_err(|e| Error::io(path, e))?;
        let parts: Vec<&str> = line.split('\t').collect();
        if parts.len() != 3 {
            return Err(Error::Row {
                row: i + 1,
                message: "expected index, term and df".into(),
            });
        }
        let index: usize = parse_num(path, i + 1, "index", parts[0])?;
        if index != entries.len() {
            return Err(Error::Row {
                row: i + 1,
                message: format!("index {index} out of sequence"),
            });
        }
        entries.push((parts[1].to_string(), parse_num(path, i + 1, "df", parts[2])?));
    }
    Vocabulary::from_terms(entries, n_docs)
}

/// One `0`/`1` label per line.
pub fn write_labels(path: &Path, labels: &[u8]) -> Result<()> {
    let mut w = create(path)?;
    for l in labels {
        writeln!(w, "{l}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_labels(path: &Path) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        match line.trim() {
            "0" => out.push(0),
            "1" => out.push(1),
            other => {
                return Err(Error::Row {
                    row: i + 1,
                    message: format!("label must be 0 or 1, got {other:?}"),
                })
            }
        }
    }
    Ok(out)
}

/// Dumps matrix, vocabulary, labels and metadata into `dir`.
pub fn save_dataset(dir: &Path, data: &LabeledDataset) -> Result<()> {
    write_matrix(&dir.join(MATRIX_FILE), &data.matrix)?;
    write_vocabulary(&dir.join(VOCAB_FILE), &data.vocabulary)?;
    write_labels(&dir.join(LABELS_FILE), &data.labels)?;
    let meta = DatasetMeta {
        rows: data.rows(),
        features: data.matrix.cols(),
        positive_label: data.positive_label.clone(),
        idf: "smoothed: ln((1+N)/(1+df))+1".into(),
        normalization: "l2".into(),
    };
    write_json(&dir.join(DATASET_META_FILE), &meta)
}

/// Reads a directory written by [`save_dataset`]. Weights come back rounded
/// to six significant digits.
pub fn load_dataset(dir: &Path) -> Result<LabeledDataset> {
    let meta: DatasetMeta = read_json(&dir.join(DATASET_META_FILE))?;
    let matrix = read_matrix(&dir.join(MATRIX_FILE))?;
    let labels = read_labels(&dir.join(LABELS_FILE))?;
    let vocab = read_vocabulary(&dir.join(VOCAB_FILE), labels.len())?;
    LabeledDataset::new(matrix, labels, vocab, meta.positive_label)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_reader(open(path)?)?)
}

// ------------------------------------------------------------------ optimizer

/// Streams `generation,best_fitness,mean_fitness` rows, flushing after each
/// so an interrupted run leaves a usable partial curve.
pub struct FitnessCurveWriter {
    path: std::path::PathBuf,
    inner: csv::Writer<BufWriter<File>>,
}

impl FitnessCurveWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let mut inner = csv_writer(path)?;
        inner.write_record(["generation", "best_fitness", "mean_fitness"])?;
        inner.flush().map_err(|e| Error::io(path, e))?;
        Ok(FitnessCurveWriter {
            path: path.to_path_buf(),
            inner,
        })
    }

    pub fn push(&mut self, s: &GenerationStats) -> Result<()> {
        self.inner.write_record([
            s.generation.to_string(),
            fmt_float(s.best_fitness),
            fmt_float(s.mean_fitness),
        ])?;
        self.inner.flush().map_err(|e| Error::io(&self.path, e))
    }
}

pub fn write_fitness_curve(path: &Path, trace: &[GenerationStats]) -> Result<()> {
    let mut w = FitnessCurveWriter::create(path)?;
    for s in trace {
        w.push(s)?;
    }
    Ok(())
}

pub fn read_fitness_curve(path: &Path) -> Result<Vec<GenerationStats>> {
    let mut r = csv_reader(path)?;
    let h = Header::read(&mut r)?;
    let (g, b, m) = (
        h.require(path, "generation")?,
        h.require(path, "best_fitness")?,
        h.require(path, "mean_fitness")?,
    );
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        out.push(GenerationStats {
            generation: parse_num(path, line, "generation", &rec[g])?,
            best_fitness: parse_num(path, line, "best_fitness", &rec[b])?,
            mean_fitness: parse_num(path, line, "mean_fitness", &rec[m])?,
        });
    }
    Ok(out)
}

/// Fitness curves of several experiments in one long-format CSV.
pub fn write_sweep_curves(path: &Path, records: &[ExperimentRecord]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["experiment_id", "generation", "best_fitness", "mean_fitness"])?;
    for rec in records {
        for s in &rec.trace {
            w.write_record([
                rec.experiment_id.clone(),
                s.generation.to_string(),
                fmt_float(s.best_fitness),
                fmt_float(s.mean_fitness),
            ])?;
        }
    }
    finish(path, w)
}

/// One row per experiment; a failed experiment has an empty fitness.
pub fn write_experiment_table(path: &Path, rows: &[(String, Option<f64>)]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["experiment_id", "best_fitness"])?;
    for (id, f) in rows {
        w.write_record([id.clone(), f.map(fmt_float).unwrap_or_default()])?;
    }
    finish(path, w)
}

pub fn read_experiment_table(path: &Path) -> Result<Vec<(String, Option<f64>)>> {
    let mut r = csv_reader(path)?;
    let h = Header::read(&mut r)?;
    let (id, f) = (h.require(path, "experiment_id")?, h.require(path, "best_fitness")?);
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let fitness = match rec[f].trim() {
            "" => None,
            raw => Some(parse_num(path, i + 2, "best_fitness", raw)?),
        };
        out.push((rec[id].to_string(), fitness));
    }
    Ok(out)
}

/// Booster settings as written to a chromosome file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedParams {
    pub learning_rate: f64,
    pub n_estimators: usize,
    pub max_depth: usize,
    pub min_child_weight: f64,
    pub gamma: f64,
    pub subsample: f64,
    pub colsample_bytree: f64,
    pub seed: u64,
    pub lambda: f64,
}

impl From<&BoosterParams> for NamedParams {
    fn from(p: &BoosterParams) -> Self {
        NamedParams {
            learning_rate: p.learning_rate,
            n_estimators: p.n_estimators,
            max_depth: p.max_depth,
            min_child_weight: p.min_child_weight,
            gamma: p.gamma,
            subsample: p.subsample,
            colsample_bytree: p.colsample_bytree,
            seed: p.seed,
            lambda: p.lambda,
        }
    }
}

impl From<&NamedParams> for BoosterParams {
    fn from(p: &NamedParams) -> Self {
        BoosterParams {
            learning_rate: p.learning_rate,
            n_estimators: p.n_estimators,
            max_depth: p.max_depth,
            min_child_weight: p.min_child_weight,
            gamma: p.gamma,
            subsample: p.subsample,
            colsample_bytree: p.colsample_bytree,
            seed: p.seed,
            lambda: p.lambda,
            base_score: None,
        }
    }
}

/// The best chromosome of a run: parameters by name, sorted feature indices
/// and the terms they stand for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChromosomeFile {
    pub experiment_id: String,
    pub fitness: f64,
    pub generation: usize,
    pub evaluations: usize,
    pub feature_space: usize,
    pub params: NamedParams,
    pub features: Vec<usize>,
    pub terms: Vec<String>,
}

impl ChromosomeFile {
    pub fn from_record(rec: &ExperimentRecord, vocab: &Vocabulary) -> Result<Self> {
        let params = rec.best.params(rec.config.booster_seed, rec.config.lambda);
        let features = rec.best.sorted_features();
        let terms = features
            .iter()
            .map(|&f| {
                vocab
                    .term(f)
                    .map(str::to_string)
                    .ok_or_else(|| Error::invalid(format!("feature {f} is outside the vocabulary")))
            })
            .collect::<Result<_>>()?;
        Ok(ChromosomeFile {
            experiment_id: rec.experiment_id.clone(),
            fitness: rec.best_fitness,
            generation: rec.best_generation,
            evaluations: rec.evaluations,
            feature_space: rec.feature_space,
            params: NamedParams::from(&params),
            features,
            terms,
        })
    }

    pub fn booster_params(&self) -> BoosterParams {
        BoosterParams::from(&self.params)
    }

    pub fn chromosome(&self) -> Chromosome {
        Chromosome::from_params(&self.booster_params(), self.features.clone())
    }

    /// Checks internal consistency and that every feature fits in `cols`.
    pub fn check(&self, cols: usize) -> Result<()> {
        self.booster_params().validate()?;
        if self.terms.len() != self.features.len() {
            return Err(Error::Shape {
                expected: self.features.len(),
                actual: self.terms.len(),
            });
        }
        if let Some(&f) = self.features.iter().find(|&&f| f >= cols) {
            return Err(Error::invalid(format!(
                "feature index {f} is out of range for a matrix with {cols} columns"
            )));
        }
        let mut sorted = self.features.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.features.len() {
            return Err(Error::invalid("chromosome repeats a feature index"));
        }
        Ok(())
    }
}

pub fn write_chromosome(path: &Path, c: &ChromosomeFile) -> Result<()> {
    write_json(path, c)
}

pub fn read_chromosome(path: &Path) -> Result<ChromosomeFile> {
    read_json(path)
}

/// `FeatureText,FNo,Freq` followed by one TRUE/FALSE column per experiment.
pub fn write_feature_frequency(path: &Path, experiment_ids: &[String], rows: &[FeatureFrequency]) -> Result<()> {
    let mut w = csv_writer(path)?;
    let mut header = vec!["FeatureText".to_string(), "FNo".into(), "Freq".into()];
    header.extend(experiment_ids.iter().cloned());
    w.write_record(&header)?;
    for row in rows {
        if row.presence.len() != experiment_ids.len() {
            return Err(Error::Shape {
                expected: experiment_ids.len(),
                actual: row.presence.len(),
            });
        }
        let mut rec = vec![row.term.clone(), row.index.to_string(), row.count.to_string()];
        rec.extend(row.presence.iter().map(|p| if *p { "TRUE" } else { "FALSE" }.to_string()));
        w.write_record(&rec)?;
    }
    finish(path, w)
}

pub fn read_feature_frequency(path: &Path) -> Result<(Vec<String>, Vec<FeatureFrequency>)> {
    let mut r = csv_reader(path)?;
    let h = Header::read(&mut r)?;
    if h.0.len() < 3 || h.0[..3] != ["FeatureText", "FNo", "Freq"] {
        return Err(Error::Config(format!(
            "{}: expected FeatureText,FNo,Freq columns",
            path.display()
        )));
    }
    let ids = h.0[3..].to_vec();
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let presence = rec
            .iter()
            .skip(3)
            .map(|v| match v {
                "TRUE" => Ok(true),
                "FALSE" => Ok(false),
                other => Err(Error::Row {
                    row: line,
                    message: format!("expected TRUE or FALSE, got {other:?}"),
                }),
            })
            .collect::<Result<_>>()?;
        rows.push(FeatureFrequency {
            term: rec[0].to_string(),
            index: parse_num(path, line, "FNo", &rec[1])?,
            count: parse_num(path, line, "Freq", &rec[2])?,
            presence,
        });
    }
    Ok((ids, rows))
}

// ----------------------------------------------------------------- validation

const FOLD_COLUMNS: [&str; 2] = ["repeat", "fold"];

/// `repeat,fold` followed by every metric; AUC is empty when undefined.
pub fn write_fold_records(path: &Path, records: &[FoldRecord]) -> Result<()> {
    let mut w = csv_writer(path)?;
    let mut header: Vec<&str> = FOLD_COLUMNS.to_vec();
    header.extend(Metric::ALL.iter().map(|m| m.name()));
    w.write_record(&header)?;
    for rec in records {
        let mut row = vec![rec.repeat.to_string(), rec.fold.to_string()];
        row.extend(Metric::ALL.iter().map(|&m| rec.report.get(m).map(fmt_float).unwrap_or_default()));
        w.write_record(&row)?;
    }
    finish(path, w)
}

/// Reads a per-fold CSV. The `flagged` and `degenerate` markers are not
/// stored and come back as false.
pub fn read_fold_records(path: &Path) -> Result<Vec<FoldRecord>> {
    let mut r = csv_reader(path)?;
    let h = Header::read(&mut r)?;
    let (rc, fc) = (h.require(path, "repeat")?, h.require(path, "fold")?);
    let cols: Vec<usize> = Metric::ALL
        .iter()
        .map(|m| h.require(path, m.name()))
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let mut vals = [None; 9];
        for (k, (&c, m)) in cols.iter().zip(Metric::ALL).enumerate() {
            let raw = rec[c].trim();
            if !raw.is_empty() {
                vals[k] = Some(parse_num::<f64>(path, line, m.name(), raw)?);
            } else if m != Metric::Auc {
                return Err(Error::Row {
                    row: line,
                    message: format!("missing {} value", m.name()),
                });
            }
        }
        let v = |m: Metric| vals[Metric::ALL.iter().position(|&x| x == m).expect("listed")];
        out.push(FoldRecord {
            repeat: parse_num(path, line, "repeat", &rec[rc])?,
            fold: parse_num(path, line, "fold", &rec[fc])?,
            report: MetricsReport {
                accuracy: v(Metric::Accuracy).expect("checked"),
                gmean: v(Metric::Gmean).expect("checked"),
                auc: v(Metric::Auc),
                tpr: v(Metric::Tpr).expect("checked"),
                tnr: v(Metric::Tnr).expect("checked"),
                ppv: v(Metric::Ppv).expect("checked"),
                fpr: v(Metric::Fpr).expect("checked"),
                f1: v(Metric::F1).expect("checked"),
                npv: v(Metric::Npv).expect("checked"),
                degenerate: false,
            },
            flagged: false,
        });
    }
    Ok(out)
}

/// One metric per `(repeat, fold)` from a per-fold CSV. Only the `repeat`,
/// `fold` and metric columns are required, so predictions scored by other
/// tools can be compared too.
pub fn read_metric_column(path: &Path, metric: Metric) -> Result<BTreeMap<(usize, usize), f64>> {
    let mut r = csv_reader(path)?;
    let h = Header::read(&mut r)?;
    let (rc, fc, mc) = (
        h.require(path, "repeat")?,
        h.require(path, "fold")?,
        h.require(path, metric.name())?,
    );
    let mut out = BTreeMap::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let key = (
            parse_num(path, line, "repeat", &rec[rc])?,
            parse_num(path, line, "fold", &rec[fc])?,
        );
        let value = parse_num(path, line, metric.name(), &rec[mc])?;
        if out.insert(key, value).is_some() {
            return Err(Error::Row {
                row: line,
                message: format!("duplicate repeat {} fold {}", key.0, key.1),
            });
        }
    }
    Ok(out)
}

/// `metric,min,avg,max,sd`, one row per metric.
pub fn write_summary(path: &Path, summary: &CvSummary) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["metric", "min", "avg", "max", "sd"])?;
    for (m, s) in &summary.stats {
        w.write_record([
            m.name().to_string(),
            fmt_float(s.min),
            fmt_float(s.avg),
            fmt_float(s.max),
            fmt_float(s.sd),
        ])?;
    }
    finish(path, w)
}

/// Rows of `(metric, [min, avg, max, sd])`.
pub fn read_summary(path: &Path) -> Result<Vec<(Metric, [f64; 4])>> {
    let mut r = csv_reader(path)?;
    let h = Header::read(&mut r)?;
    let m = h.require(path, "metric")?;
    let cols: Vec<usize> = ["min", "avg", "max", "sd"]
        .iter()
        .map(|c| h.require(path, c))
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let metric: Metric = rec[m].parse()?;
        let mut vals = [0.0; 4];
        for (v, &c) in vals.iter_mut().zip(&cols) {
            *v = parse_num(path, i + 2, "statistic", &rec[c])?;
        }
        out.push((metric, vals));
    }
    Ok(out)
}

/// `run,mean,sd,min,q25,median,q75,max`.
pub fn write_descriptions(path: &Path, rows: &[(String, Description)]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["run", "mean", "sd", "min", "q25", "median", "q75", "max"])?;
    for (name, d) in rows {
        let mut rec = vec![name.clone()];
        rec.extend([d.mean, d.sd, d.min, d.q25, d.median, d.q75, d.max].map(fmt_float));
        w.write_record(&rec)?;
    }
    finish(path, w)
}

pub fn read_descriptions(path: &Path) -> Result<Vec<(String, Description)>> {
    let mut r = csv_reader(path)?;
    let h = Header::read(&mut r)?;
    let names = ["run", "mean", "sd", "min", "q25", "median", "q75", "max"];
    let cols: Vec<usize> = names.iter().map(|c| h.require(path, c)).collect::<Result<_>>()?;
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let mut v = [0.0; 7];
        for (k, slot) in v.iter_mut().enumerate() {
            *slot = parse_num(path, i + 2, names[k + 1], &rec[cols[k + 1]])?;
        }
        out.push((
            rec[cols[0]].to_string(),
            Description {
                mean: v[0],
                sd: v[1],
                min: v[2],
                q25: v[3],
                median: v[4],
                q75: v[5],
                max: v[6],
            },
        ));
    }
    Ok(out)
}

// ----------------------------------------------------------------- comparison

/// A cell of the pairwise p-value matrix as printed.
#[derive(Debug, Clone, PartialEq)]
pub enum PCell {
    /// Diagonal and upper triangle.
    Blank,
    /// The test had no information (all differences zero).
    Na,
    /// Printed as `<1e-5`.
    BelowFloor,
    Value(f64),
}

impl PCell {
    fn render(&self) -> String {
        match self {
            PCell::Blank => String::new(),
            PCell::Na => "NA".into(),
            PCell::BelowFloor => "<1e-5".into(),
            PCell::Value(p) => format_p(*p),
        }
    }

    fn parse(raw: &str) -> Option<PCell> {
        Some(match raw.trim() {
            "" => PCell::Blank,
            "NA" => PCell::Na,
            "<1e-5" => PCell::BelowFloor,
            v => PCell::Value(v.parse().ok()?),
        })
    }
}

/// Lower-triangle matrix: header `run,<names>`, then one row per run.
pub fn write_pairwise(path: &Path, m: &PairwiseMatrix) -> Result<()> {
    let mut w = csv_writer(path)?;
    let mut header = vec!["run".to_string()];
    header.extend(m.names.iter().cloned());
    w.write_record(&header)?;
    for (i, name) in m.names.iter().enumerate() {
        let mut rec = vec![name.clone()];
        for j in 0..m.names.len() {
            let cell = if j >= i {
                PCell::Blank
            } else {
                match m.cells[i][j] {
                    None => PCell::Na,
                    Some(p) if p < 1e-5 => PCell::BelowFloor,
                    Some(p) => PCell::Value(p),
                }
            };
            rec.push(cell.render());
        }
        w.write_record(&rec)?;
    }
    finish(path, w)
}

pub fn read_pairwise(path: &Path) -> Result<(Vec<String>, Vec<Vec<PCell>>)> {
    let mut r = csv_reader(path)?;
    let h = Header::read(&mut r)?;
    let names = h.0[1..].to_vec();
    let mut cells = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = rec
            .iter()
            .skip(1)
            .map(|c| {
                PCell::parse(c).ok_or_else(|| Error::Row {
                    row: i + 2,
                    message: format!("bad p-value cell {c:?}"),
                })
            })
            .collect::<Result<_>>()?;
        cells.push(row);
    }
    Ok((names, cells))
}

/// `group_list,p_value`, where the group list reads like `R01, R02, R05`.
pub fn write_combinations(path: &Path, names: &[String], combos: &[Combination]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["group_list", "p_value"])?;
    for c in combos {
        let list: Vec<&str> = c.members.iter().map(|&i| names[i].as_str()).collect();
        w.write_record([list.join(", "), format_p(c.result.p_value)])?;
    }
    finish(path, w)
}

pub fn read_combinations(path: &Path) -> Result<Vec<(Vec<String>, PCell)>> {
    let mut r = csv_reader(path)?;
    let h = Header::read(&mut r)?;
    let (g, p) = (h.require(path, "group_list")?, h.require(path, "p_value")?);
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let cell = PCell::parse(&rec[p]).ok_or_else(|| Error::Row {
            row: i + 2,
            message: format!("bad p-value {:?}", &rec[p]),
        })?;
        out.push((rec[g].split(", ").map(str::to_string).collect(), cell));
    }
    Ok(out)
}

/// `index\tterm\tscore` for the given features, in the given order.
pub fn write_chi2_scores(path: &Path, order: &[usize], scores: &[f64], vocab: &Vocabulary) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "index\tterm\tscore").map_err(io)?;
    for &i in order {
        let term = vocab
            .term(i)
            .ok_or_else(|| Error::invalid(format!("feature {i} is outside the vocabulary")))?;
        writeln!(w, "{i}\t{term}\t{}", fmt_float(scores[i])).map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn read_chi2_scores(path: &Path) -> Result<Vec<(usize, String, f64)>> {
    let mut out = Vec::new();
    for (i, line) in open(path)?.lines().enumerate().skip(1) {
        let line = line.map_err(|e| Error::io(path, e))?;
        let parts: Vec<&str> = line.split('\t').collect();
        if parts.len() != 3 {
            return Err(Error::Row {
                row: i + 1,
                message: "expected index, term and score".into(),
            });
        }
        out.push((
            parse_num(path, i + 1, "index", parts[0])?,
            parts[1].to_string(),
            parse_num(path, i + 1, "score", parts[2])?,
        ));
    }
    Ok(out)
}

/// `components,accuracy_pct,accuracy_sd`, e.g. `20,91.53,0.010`: mean
/// accuracy in percent with two decimals and its SD as a fraction.
pub fn write_pca_sweep(path: &Path, rows: &[PcaSweepRow]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["components", "accuracy_pct", "accuracy_sd"])?;
    for r in rows {
        w.write_record([
            r.components.to_string(),
            format!("{:.2}", r.accuracy_mean * 100.0),
            format!("{:.3}", r.accuracy_sd),
        ])?;
    }
    finish(path, w)
}

/// Reads a PCA sweep CSV back; values carry the printed precision.
pub fn read_pca_sweep(path: &Path) -> Result<Vec<PcaSweepRow>> {
    let mut r = csv_reader(path)?;
    let h = Header::read(&mut r)?;
    let cols = [
        h.require(path, "components")?,
        h.require(path, "accuracy_pct")?,
        h.require(path, "accuracy_sd")?,
    ];
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        out.push(PcaSweepRow {
            components: parse_num(path, line, "components", &rec[cols[0]])?,
            accuracy_mean: parse_num::<f64>(path, line, "accuracy_pct", &rec[cols[1]])? / 100.0,
            accuracy_sd: parse_num(path, line, "accuracy_sd", &rec[cols[2]])?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{describe, MetricStats};
    use crate::stats::KruskalResult;

    #[test]
    fn significant_digits() {
        assert_eq!(fmt_sig6(0.123456789), "0.123457");
        assert_eq!(fmt_sig6(1.0), "1");
        assert_eq!(fmt_sig6(0.000012345678), "0.0000123457");
        assert_eq!(fmt_sig6(123456789.0), "123457000");
        assert_eq!(fmt_float(0.1), "0.1");
    }

    #[test]
    fn matrix_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.txt");
        let x = SparseMatrix::from_rows(5, vec![vec![(0, 0.5), (3, 0.25)], vec![], vec![(4, 1.0)]]).unwrap();
        write_matrix(&p, &x).unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "3 5\n0:0.5 3:0.25\n\n4:1\n");
        assert_eq!(read_matrix(&p).unwrap(), x);
        fs::write(&p, "2 5\n0:0.5\n").unwrap();
        assert!(read_matrix(&p).is_err());
        fs::write(&p, "1 5\n9:0.5\n").unwrap();
        assert!(read_matrix(&p).is_err());
    }

    #[test]
    fn dataset_round_trip() {
        use crate::corpus::{CorpusConfig, Document};
        let docs: Vec<Document> = [("win cash now", "Spam"), ("see you at lunch", "Ham"), ("cash prize", "Spam")]
            .iter()
            .map(|(t, l)| Document {
                text: t.to_string(),
                label: l.to_string(),
            })
            .collect();
        let data = LabeledDataset::from_documents(&docs, &CorpusConfig::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        save_dataset(dir.path(), &data).unwrap();
        let back = load_dataset(dir.path()).unwrap();
        assert_eq!(back.labels, data.labels);
        assert_eq!(back.vocabulary, data.vocabulary);
        assert_eq!(back.positive_label, "Spam");
        for r in 0..data.rows() {
            for ((j1, v1), (j2, v2)) in data.matrix.row_entries(r).zip(back.matrix.row_entries(r)) {
                assert_eq!(j1, j2);
                assert!((v1 - v2).abs() <= 1e-6 * v1.abs());
            }
        }
    }

    fn record(repeat: usize, fold: usize, auc: Option<f64>) -> FoldRecord {
        FoldRecord {
            repeat,
            fold,
            report: MetricsReport {
                accuracy: 0.1 + fold as f64 / 7.0,
                gmean: 1.0 / 3.0,
                auc,
                tpr: 0.25,
                tnr: 0.75,
                ppv: 0.6,
                fpr: 0.25,
                f1: 0.2,
                npv: 0.9,
                degenerate: false,
            },
            flagged: false,
        }
    }

    #[test]
    fn fold_records_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("folds.csv");
        let recs = vec![record(0, 0, Some(0.8)), record(0, 1, None), record(1, 0, Some(1.0 / 7.0))];
        write_fold_records(&p, &recs).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("repeat,fold,accuracy,gmean,auc,tpr,tnr,ppv,fpr,f1,npv\n"));
        assert!(text.contains("0,1,0.24285714285714285,0.3333333333333333,,0.25"));
        assert_eq!(read_fold_records(&p).unwrap(), recs);
        let g = read_metric_column(&p, Metric::Gmean).unwrap();
        assert_eq!(g.len(), 3);
        assert_eq!(g[&(1, 0)], 1.0 / 3.0);
        assert!(read_metric_column(&p, Metric::Auc).is_err());
    }

    #[test]
    fn summary_and_descriptions_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let summary = CvSummary::from_records(vec![record(0, 0, Some(0.5)), record(0, 1, None)]);
        let p = dir.path().join("summary.csv");
        write_summary(&p, &summary).unwrap();
        let back = read_summary(&p).unwrap();
        assert_eq!(back.len(), 9);
        let acc: &MetricStats = summary.stat(Metric::Accuracy).unwrap();
        assert_eq!(back[0], (Metric::Accuracy, [acc.min, acc.avg, acc.max, acc.sd]));

        let d = describe(&[0.8, 0.7, 0.9, 0.85]).unwrap();
        let p = dir.path().join("describe.csv");
        write_descriptions(&p, &[("R00".into(), d)]).unwrap();
        assert_eq!(read_descriptions(&p).unwrap(), vec![("R00".to_string(), d)]);
    }

    #[test]
    fn pairwise_and_combination_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let names: Vec<String> = ["R00", "R01", "R02"].iter().map(|s| s.to_string()).collect();
        let m = PairwiseMatrix {
            names: names.clone(),
            cells: vec![
                vec![None, None, None],
                vec![Some(0.0001), None, None],
                vec![Some(1e-9), None, None],
            ],
        };
        let p = dir.path().join("w.csv");
        write_pairwise(&p, &m).unwrap();
        assert_eq!(
            fs::read_to_string(&p).unwrap(),
            "run,R00,R01,R02\nR00,,,\nR01,0.00010,,\nR02,<1e-5,NA,\n"
        );
        let (n, cells) = read_pairwise(&p).unwrap();
        assert_eq!(n, names);
        assert_eq!(cells[1][0], PCell::Value(0.0001));
        assert_eq!(cells[2][0], PCell::BelowFloor);
        assert_eq!(cells[2][1], PCell::Na);
        assert_eq!(cells[0][0], PCell::Blank);

        let combos = vec![Combination {
            members: vec![0, 1, 2],
            result: KruskalResult {
                h: 1.0,
                p_value: 0.14449,
                df: 2,
            },
        }];
        let p = dir.path().join("k.csv");
        write_combinations(&p, &names, &combos).unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "group_list,p_value\n\"R00, R01, R02\",0.14449\n");
        assert_eq!(read_combinations(&p).unwrap(), vec![(names, PCell::Value(0.14449))]);
    }

    #[test]
    fn optimizer_files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let trace = vec![
            GenerationStats {
                generation: 0,
                best_fitness: 0.5,
                mean_fitness: 0.25,
            },
            GenerationStats {
                generation: 1,
                best_fitness: 0.6,
                mean_fitness: 1.0 / 3.0,
            },
        ];
        let p = dir.path().join("curve.csv");
        write_fitness_curve(&p, &trace).unwrap();
        assert_eq!(read_fitness_curve(&p).unwrap(), trace);

        let p = dir.path().join("table.csv");
        let rows = vec![("F1-P10-C2-G100".to_string(), Some(0.6418)), ("F1-P10-C3-G100".to_string(), None)];
        write_experiment_table(&p, &rows).unwrap();
        assert_eq!(
            fs::read_to_string(&p).unwrap(),
            "experiment_id,best_fitness\nF1-P10-C2-G100,0.6418\nF1-P10-C3-G100,\n"
        );
        assert_eq!(read_experiment_table(&p).unwrap(), rows);

        let ff = vec![FeatureFrequency {
            term: "call".into(),
            index: 2954,
            count: 1,
            presence: vec![true, false],
        }];
        let ids = vec!["a".to_string(), "b".to_string()];
        let p = dir.path().join("freq.csv");
        write_feature_frequency(&p, &ids, &ff).unwrap();
        assert_eq!(
            fs::read_to_string(&p).unwrap(),
            "FeatureText,FNo,Freq,a,b\ncall,2954,1,TRUE,FALSE\n"
        );
        assert_eq!(read_feature_frequency(&p).unwrap(), (ids, ff));
    }

    #[test]
    fn chromosome_file_round_trip_and_checks() {
        let dir = tempfile::tempdir().unwrap();
        let c = ChromosomeFile {
            experiment_id: "F10-P400-C240-G50".into(),
            fitness: 0.8485,
            generation: 31,
            evaluations: 7000,
            feature_space: 10,
            params: NamedParams {
                learning_rate: 0.47,
                n_estimators: 93,
                max_depth: 4,
                min_child_weight: 0.08,
                gamma: 0.42,
                subsample: 0.94,
                colsample_bytree: 0.84,
                seed: 723,
                lambda: 1.0,
            },
            features: vec![1, 4, 7],
            terms: vec!["a".into(), "b".into(), "c".into()],
        };
        let p = dir.path().join("best.json");
        write_chromosome(&p, &c).unwrap();
        let back = read_chromosome(&p).unwrap();
        assert_eq!(back, c);
        assert!(back.check(10).is_ok());
        assert!(back.check(7).is_err());
        assert_eq!(back.booster_params().n_estimators, 93);
        let mut dup = c.clone();
        dup.features = vec![1, 1, 7];
        assert!(dup.check(10).is_err());
    }

    #[test]
    fn baseline_files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("pca.csv");
        write_pca_sweep(
            &p,
            &[PcaSweepRow {
                components: 20,
                accuracy_mean: 0.91532,
                accuracy_sd: 0.0101,
            }],
        )
        .unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "components,accuracy_pct,accuracy_sd\n20,91.53,0.010\n");
        let back = read_pca_sweep(&p).unwrap();
        assert_eq!(back[0].components, 20);
        assert!((back[0].accuracy_mean - 0.9153).abs() < 1e-12);

        let vocab = Vocabulary::from_terms(vec![("a".into(), 1), ("b".into(), 2), ("c".into(), 1)], 3).unwrap();
        let p = dir.path().join("chi2.tsv");
        write_chi2_scores(&p, &[2, 0], &[1.5, 0.0, 3.25], &vocab).unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "index\tterm\tscore\n2\tc\t3.25\n0\ta\t1.5\n");
        assert_eq!(
            read_chi2_scores(&p).unwrap(),
            vec![(2, "c".to_string(), 3.25), (0, "a".to_string(), 1.5)]
        );
    }
}
