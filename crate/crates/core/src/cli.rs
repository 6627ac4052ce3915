//! The `genoboost` command line.
//!
//! Settings resolve as command-line flag, then config file, then the
//! `GENOBOOST_OUT` environment variable (output directory only), then
//! built-in defaults.

use std::collections::BTreeMap;
use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::baselines::{self, CvConfig};
use crate::corpus::{CorpusConfig, Encoding, LabeledDataset};
use crate::eval::{self, describe, CvSummary, Metric, ModelSpec};
use crate::ga::{self, GaConfig};
use crate::gbt::BoosterParams;
use crate::report::{self, ChromosomeFile, FitnessCurveWriter};
use crate::seed::derive_seed;
use crate::stats;

/// `println!` that tolerates a closed stdout (e.g. piped into `head`).
macro_rules! say {
    ($($arg:tt)*) => {{
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}

pub const OUT_ENV: &str = "GENOBOOST_OUT";
const DEFAULT_OUT: &str = "out";
const LOG_FILE: &str = "genoboost.log";

const DEFAULT_F: f64 = 10.0;
const DEFAULT_P: usize = 400;
const DEFAULT_CROSSOVER_RATIO: f64 = 0.6;
const DEFAULT_G: usize = 50;
const DEFAULT_REPEATS: usize = 50;
const DEFAULT_FOLDS: usize = 10;

#[derive(Debug, Parser)]
#[command(name = "genoboost", version, about = "Genetic feature selection and boosted-tree tuning for imbalanced text")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// JSON config file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed every random stream is derived from.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output directory [env: GENOBOOST_OUT] [default: out].
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tokenize, stem and TF-IDF a labelled CSV; write a dataset dump.
    Vectorize(VectorizeArgs),
    /// Run the genetic search (or a crossover sweep).
    Optimize(OptimizeArgs),
    /// Repeated stratified CV of a saved best chromosome.
    Validate(ValidateArgs),
    /// Significance tests between runs and the Chi-square / PCA baselines.
    Compare(CompareArgs),
    /// Descriptive statistics, feature frequency and positive-class swaps.
    Report(ReportArgs),
}

#[derive(Debug, Args, Default)]
pub struct DatasetArgs {
    /// Labelled CSV or a directory written by `vectorize`.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[arg(long)]
    pub text_col: Option<String>,
    #[arg(long)]
    pub label_col: Option<String>,
    #[arg(long)]
    pub positive_label: Option<String>,
    #[arg(long)]
    pub negative_label: Option<String>,
    /// utf-8 or iso-8859-1
    #[arg(long)]
    pub encoding: Option<String>,
}

#[derive(Debug, Args)]
pub struct VectorizeArgs {
    #[command(flatten)]
    pub data: DatasetArgs,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub data: DatasetArgs,
    /// Percent of features per chromosome.
    #[arg(long = "F")]
    pub f: Option<f64>,
    /// Population size.
    #[arg(long = "P")]
    pub p: Option<usize>,
    /// Parents kept per generation.
    #[arg(long = "C", conflicts_with = "crossover_ratio")]
    pub c: Option<usize>,
    /// Parents as a share of the population, in (0, 1].
    #[arg(long)]
    pub crossover_ratio: Option<f64>,
    /// Generations.
    #[arg(long = "G")]
    pub g: Option<usize>,
    /// Sweep specification, e.g. `crossover=0.1:1.0:0.1`.
    #[arg(long)]
    pub sweep: Option<String>,
}

#[derive(Debug, Args)]
pub struct CvArgs {
    #[arg(long)]
    pub repeats: Option<usize>,
    #[arg(long)]
    pub folds: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub data: DatasetArgs,
    #[command(flatten)]
    pub cv: CvArgs,
    /// Best-chromosome JSON written by `optimize`.
    #[arg(long)]
    pub chromosome: PathBuf,
    /// Prefix for output files (default: the chromosome's experiment id).
    #[arg(long)]
    pub name: Option<String>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub data: DatasetArgs,
    #[command(flatten)]
    pub cv: CvArgs,
    /// Per-fold CSVs to compare.
    #[arg(long, num_args = 1..)]
    pub runs: Vec<PathBuf>,
    /// Metric column used by the tests.
    #[arg(long, default_value = "gmean")]
    pub metric: Metric,
    /// Add a Chi-square arm keeping the top K features (needs --dataset).
    #[arg(long)]
    pub chi2_k: Option<usize>,
    /// PCA sweep over component counts, `a:b` or `a:b:step` (needs --dataset).
    #[arg(long)]
    pub pca_range: Option<String>,
    /// Keep only the N highest-p Kruskal combinations.
    #[arg(long)]
    pub top: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Per-fold CSVs to describe.
    #[arg(long, num_args = 1..)]
    pub runs: Vec<PathBuf>,
    #[arg(long, default_value = "gmean")]
    pub metric: Metric,
    /// Best-chromosome files for the feature frequency table.
    #[arg(long, num_args = 1..)]
    pub chromosomes: Vec<PathBuf>,
    /// Also write every run with the other class as positive.
    #[arg(long)]
    pub swap_positive: bool,
}

/// Config file schema. Every field is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub dataset: FileDataset,
    #[serde(default)]
    pub ga: FileGa,
    #[serde(default)]
    pub cv: FileCv,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileDataset {
    pub path: Option<PathBuf>,
    pub text_col: Option<String>,
    pub label_col: Option<String>,
    pub positive_label: Option<String>,
    pub negative_label: Option<String>,
    pub encoding: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileGa {
    pub feature_percent: Option<f64>,
    pub population: Option<usize>,
    pub parents: Option<usize>,
    pub crossover_ratio: Option<f64>,
    pub generations: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileCv {
    pub repeats: Option<usize>,
    pub folds: Option<usize>,
}

/// Settings shared by every subcommand after merging sources.
struct Settings {
    seed: u64,
    out: PathBuf,
    file: FileConfig,
}

impl Settings {
    fn cv(&self, args: &CvArgs) -> CvConfig {
        CvConfig {
            repeats: args.repeats.or(self.file.cv.repeats).unwrap_or(DEFAULT_REPEATS),
            folds: args.folds.or(self.file.cv.folds).unwrap_or(DEFAULT_FOLDS),
            seed: derive_seed(self.seed, "cv"),
        }
    }

    fn corpus_config(&self, a: &DatasetArgs) -> anyhow::Result<CorpusConfig> {
        let f = &self.file.dataset;
        let d = CorpusConfig::default();
        let encoding = match a.encoding.as_ref().or(f.encoding.as_ref()) {
            Some(e) => e.parse::<Encoding>()?,
            None => d.encoding,
        };
        Ok(CorpusConfig {
            text_col: a.text_col.clone().or(f.text_col.clone()).unwrap_or(d.text_col),
            label_col: a.label_col.clone().or(f.label_col.clone()).unwrap_or(d.label_col),
            positive_label: a.positive_label.clone().or(f.positive_label.clone()).unwrap_or(d.positive_label),
            negative_label: a.negative_label.clone().or(f.negative_label.clone()).unwrap_or(d.negative_label),
            encoding,
        })
    }

    fn dataset_path(&self, a: &DatasetArgs) -> Option<PathBuf> {
        a.dataset.clone().or(self.file.dataset.path.clone())
    }

    /// Loads a dump directory or vectorizes a CSV.
    fn load(&self, a: &DatasetArgs) -> anyhow::Result<LabeledDataset> {
        let path = self
            .dataset_path(a)
            .context("no dataset given; pass --dataset or set dataset.path in the config file")?;
        let data = if path.is_dir() {
            report::load_dataset(&path)?
        } else {
            LabeledDataset::from_csv(&path, &self.corpus_config(a)?)?
        };
        Ok(data)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    /// Appends a timestamped line to the sidecar log.
    fn log(&self, message: &str) {
        let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0);
        let _ = std::fs::create_dir_all(&self.out);
        if let Ok(mut f) = OpenOptions::new().create(true).append(true).open(self.path(LOG_FILE)) {
            let _ = writeln!(f, "{stamp:.3} {message}");
        }
    }
}

/// Entry point used by the binary; returns the process exit code.
pub fn main() -> i32 {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    let file: FileConfig = match &cli.global.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?
        }
        None => FileConfig::default(),
    };
    let out = cli
        .global
        .out
        .clone()
        .or(file.out.clone())
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let threads = cli.global.threads.or(file.threads).unwrap_or(0);
    let ctx = Settings {
        seed: cli.global.seed.or(file.seed).unwrap_or(0),
        out,
        file,
    };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
    let name = match &cli.command {
        Command::Vectorize(_) => "vectorize",
        Command::Optimize(_) => "optimize",
        Command::Validate(_) => "validate",
        Command::Compare(_) => "compare",
        Command::Report(_) => "report",
    };
    let started = Instant::now();
    let result = pool.install(|| match &cli.command {
        Command::Vectorize(a) => vectorize(&ctx, a),
        Command::Optimize(a) => optimize(&ctx, a),
        Command::Validate(a) => validate(&ctx, a),
        Command::Compare(a) => compare(&ctx, a),
        Command::Report(a) => report_cmd(&ctx, a),
    });
    let status = match &result {
        Ok(()) => "ok".to_string(),
        Err(e) => format!("failed: {e:#}"),
    };
    ctx.log(&format!(
        "{name} seed={} threads={} elapsed={:.3}s {status}",
        ctx.seed,
        pool.current_num_threads(),
        started.elapsed().as_secs_f64()
    ));
    result
}

fn vectorize(ctx: &Settings, a: &VectorizeArgs) -> anyhow::Result<()> {
    let path = ctx
        .dataset_path(&a.data)
        .context("no input CSV; pass --dataset or set dataset.path in the config file")?;
    if path.is_dir() {
        bail!("{} is a directory; vectorize expects a CSV file", path.display());
    }
    let data = LabeledDataset::from_csv(&path, &ctx.corpus_config(&a.data)?)?;
    report::save_dataset(&ctx.out, &data)?;
    say!(
        "rows={} features={} positive={:.1}%",
        data.rows(),
        data.matrix.cols(),
        data.positive_share() * 100.0
    );
    Ok(())
}

/// Parses `start:end` or `start:end:step` into an inclusive grid.
pub fn parse_range(spec: &str) -> anyhow::Result<Vec<f64>> {
    let parts: Vec<f64> = spec
        .split(':')
        .map(|s| s.trim().parse::<f64>().with_context(|| format!("bad number {s:?} in range {spec:?}")))
        .collect::<anyhow::Result<_>>()?;
    let (start, end, step) = match parts[..] {
        [a, b] => (a, b, 1.0),
        [a, b, s] => (a, b, s),
        _ => bail!("range must be start:end or start:end:step, got {spec:?}"),
    };
    if !(step > 0.0) || end < start {
        bail!("range {spec:?} is empty or has a non-positive step");
    }
    let n = ((end - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9).collect())
}

fn ga_config(ctx: &Settings, a: &OptimizeArgs) -> anyhow::Result<GaConfig> {
    let f = &ctx.file.ga;
    if f.parents.is_some() && f.crossover_ratio.is_some() {
        bail!("config file sets both ga.parents and ga.crossover_ratio");
    }
    let feature_percent = a.f.or(f.feature_percent).unwrap_or(DEFAULT_F);
    let population = a.p.or(f.population).unwrap_or(DEFAULT_P);
    let generations = a.g.or(f.generations).unwrap_or(DEFAULT_G);
    let config = match (a.c, a.crossover_ratio, f.parents, f.crossover_ratio) {
        (Some(c), _, _, _) => GaConfig::new(feature_percent, population, c, generations),
        (None, Some(r), _, _) => GaConfig::with_crossover_ratio(feature_percent, population, r, generations)?,
        (None, None, Some(c), _) => GaConfig::new(feature_percent, population, c, generations),
        (None, None, None, r) => GaConfig::with_crossover_ratio(
            feature_percent,
            population,
            r.unwrap_or(DEFAULT_CROSSOVER_RATIO),
            generations,
        )?,
    };
    let config = config.with_seed(ctx.seed);
    config.validate()?;
    Ok(config)
}

fn optimize(ctx: &Settings, a: &OptimizeArgs) -> anyhow::Result<()> {
    let base = ga_config(ctx, a)?;
    let data = ctx.load(&a.data)?;
    if let Some(spec) = &a.sweep {
        return sweep(ctx, &data, &base, spec);
    }
    let id = base.experiment_id();
    let curve_path = ctx.path(&format!("{id}.fitness.csv"));
    let mut curve = FitnessCurveWriter::create(&curve_path)?;
    let mut write_error = None;
    let rec = ga::run_with_observer(&data.matrix, &data.labels, &base, |s| {
        if let Err(e) = curve.push(s) {
            write_error.get_or_insert(e);
        }
    })?;
    if let Some(e) = write_error {
        return Err(e.into());
    }
    report::write_chromosome(
        &ctx.path(&format!("{id}.best.json")),
        &ChromosomeFile::from_record(&rec, &data.vocabulary)?,
    )?;
    report::write_experiment_table(&ctx.path("experiments.csv"), &[(id.clone(), Some(rec.best_fitness))])?;
    ctx.log(&format!("{id} wall_clock={:.3}s", rec.wall_clock_secs));
    say!(
        "{id} best_fitness={:.4} generation={} evaluations={} features={}",
        rec.best_fitness, rec.best_generation, rec.evaluations, rec.feature_genes
    );
    Ok(())
}

fn sweep(ctx: &Settings, data: &LabeledDataset, base: &GaConfig, spec: &str) -> anyhow::Result<()> {
    let (key, range) = spec.split_once('=').context("sweep must look like crossover=start:end:step")?;
    if key.trim() != "crossover" {
        bail!("only crossover sweeps are supported, got {key:?}");
    }
    let ratios = parse_range(range)?;
    let grid = ga::crossover_grid(base, &ratios, ctx.seed)?;
    let entries = ga::sensitivity_sweep(&data.matrix, &data.labels, &grid);
    let mut table = Vec::new();
    let mut records = Vec::new();
    let mut failures = 0;
    for e in &entries {
        match &e.result {
            Ok(rec) => {
                report::write_chromosome(
                    &ctx.path(&format!("{}.best.json", rec.experiment_id)),
                    &ChromosomeFile::from_record(rec, &data.vocabulary)?,
                )?;
                table.push((e.experiment_id.clone(), Some(rec.best_fitness)));
                say!("{}, {:.4}", e.experiment_id, rec.best_fitness);
                records.push(rec.clone());
            }
            Err(msg) => {
                eprintln!("{}: {msg}", e.experiment_id);
                ctx.log(&format!("{} failed: {msg}", e.experiment_id));
                table.push((e.experiment_id.clone(), None));
                failures += 1;
            }
        }
    }
    report::write_experiment_table(&ctx.path("sweep.csv"), &table)?;
    report::write_sweep_curves(&ctx.path("sweep_curves.csv"), &records)?;
    if failures > 0 {
        bail!("{failures} of {} sweep configurations failed", entries.len());
    }
    Ok(())
}

fn print_summary(name: &str, s: &CvSummary) {
    for m in [Metric::Gmean, Metric::Accuracy, Metric::Tpr, Metric::Tnr] {
        if let Some(st) = s.stat(m) {
            say!("{name} {m} avg={:.4} sd={:.4} min={:.4} max={:.4}", st.avg, st.sd, st.min, st.max);
        }
    }
    if s.flagged() > 0 {
        eprintln!("{name}: {} folds had undefined ratios (reported as 0)", s.flagged());
    }
}

fn validate(ctx: &Settings, a: &ValidateArgs) -> anyhow::Result<()> {
    let chromosome = report::read_chromosome(&a.chromosome)?;
    let data = ctx.load(&a.data)?;
    chromosome.check(data.matrix.cols())?;
    for (&f, term) in chromosome.features.iter().zip(&chromosome.terms) {
        if data.vocabulary.term(f) != Some(term.as_str()) {
            bail!("feature {f} is {term:?} in the chromosome but {:?} in the dataset", data.vocabulary.term(f));
        }
    }
    let cv = ctx.cv(&a.cv);
    let spec = ModelSpec {
        params: chromosome.booster_params(),
        features: Some(chromosome.features.clone()),
    };
    let summary = eval::repeated_cv(&data.matrix, &data.labels, &spec, cv.repeats, cv.folds, cv.seed)?;
    let name = a.name.clone().unwrap_or_else(|| chromosome.experiment_id.clone());
    report::write_fold_records(&ctx.path(&format!("{name}.folds.csv")), &summary.records)?;
    report::write_summary(&ctx.path(&format!("{name}.summary.csv")), &summary)?;
    print_summary(&name, &summary);
    Ok(())
}

/// Run name from a file path: the file name without `.folds.csv` / `.csv`.
fn run_name(path: &Path, suffix: &str) -> String {
    let file = path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
    file.strip_suffix(suffix)
        .or_else(|| file.strip_suffix(".csv"))
        .or_else(|| file.strip_suffix(".json"))
        .unwrap_or(&file)
        .to_string()
}

fn unique_names(paths: &[PathBuf], suffix: &str) -> anyhow::Result<Vec<String>> {
    let names: Vec<String> = paths.iter().map(|p| run_name(p, suffix)).collect();
    let mut seen = std::collections::HashSet::new();
    for n in &names {
        if !seen.insert(n) {
            bail!("two inputs share the run name {n:?}");
        }
    }
    Ok(names)
}

fn compare(ctx: &Settings, a: &CompareArgs) -> anyhow::Result<()> {
    let mut names = unique_names(&a.runs, ".folds.csv")?;
    let mut series: Vec<BTreeMap<(usize, usize), f64>> = a
        .runs
        .iter()
        .map(|p| report::read_metric_column(p, a.metric))
        .collect::<crate::Result<_>>()?;

    if a.chi2_k.is_some() || a.pca_range.is_some() {
        let data = ctx.load(&a.data)?;
        let cv = ctx.cv(&a.cv);
        if let Some(k) = a.chi2_k {
            let scores = baselines::chi2_scores(&data.matrix, &data.labels)?;
            let ranking = baselines::chi2_select(&scores, scores.len())?;
            report::write_chi2_scores(&ctx.path("chi2_scores.tsv"), &ranking, &scores, &data.vocabulary)?;
            let (_, summary) = baselines::chi2_arm(&data.matrix, &data.labels, k, cv)?;
            report::write_fold_records(&ctx.path("chi2.folds.csv"), &summary.records)?;
            report::write_summary(&ctx.path("chi2.summary.csv"), &summary)?;
            print_summary("chi2", &summary);
            if names.iter().any(|n| n == "chi2") {
                bail!("a run named \"chi2\" clashes with the Chi-square arm");
            }
            names.push("chi2".into());
            series.push(
                summary
                    .records
                    .iter()
                    .filter_map(|r| r.report.get(a.metric).map(|v| ((r.repeat, r.fold), v)))
                    .collect(),
            );
        }
        if let Some(range) = &a.pca_range {
            let ks: Vec<usize> = parse_range(range)?
                .into_iter()
                .map(|v| {
                    if v.fract() != 0.0 || v < 1.0 {
                        bail!("component counts must be positive integers, got {v}");
                    }
                    Ok(v as usize)
                })
                .collect::<anyhow::Result<_>>()?;
            let rows = baselines::pca_sweep(&data.matrix, &data.labels, &ks, cv, &BoosterParams::default())?;
            report::write_pca_sweep(&ctx.path("pca_sweep.csv"), &rows)?;
            for r in &rows {
                say!("pca {}, {:.2}, {:.3}", r.components, r.accuracy_mean * 100.0, r.accuracy_sd);
            }
        }
    }

    if series.len() < 2 {
        if a.runs.is_empty() && (a.chi2_k.is_some() || a.pca_range.is_some()) {
            return Ok(());
        }
        bail!("comparison needs at least two runs, got {}", series.len());
    }
    let keys: Vec<(usize, usize)> = series[0].keys().copied().collect();
    for (n, s) in names.iter().zip(&series).skip(1) {
        if !s.keys().copied().eq(keys.iter().copied()) {
            bail!(
                "run {n:?} has {} folds that do not pair with the {} folds of {:?}",
                s.len(),
                keys.len(),
                names[0]
            );
        }
    }
    let samples: Vec<Vec<f64>> = series.iter().map(|s| s.values().copied().collect()).collect();
    let matrix = stats::pairwise_wilcoxon(&names, &samples)?;
    report::write_pairwise(&ctx.path("wilcoxon.csv"), &matrix)?;
    say!("wilcoxon: {} runs on {} paired folds ({})", names.len(), keys.len(), a.metric);
    if samples.len() >= 3 {
        let mut combos = stats::kruskal_combinations(&samples)?;
        if let Some(top) = a.top {
            combos.truncate(top);
        }
        report::write_combinations(&ctx.path("kruskal.csv"), &names, &combos)?;
        say!("kruskal: {} combinations", combos.len());
    }
    Ok(())
}

fn report_cmd(ctx: &Settings, a: &ReportArgs) -> anyhow::Result<()> {
    if a.runs.is_empty() && a.chromosomes.is_empty() {
        bail!("nothing to report; pass --runs and/or --chromosomes");
    }
    if !a.runs.is_empty() {
        let names = unique_names(&a.runs, ".folds.csv")?;
        let mut rows = Vec::new();
        for (name, path) in names.iter().zip(&a.runs) {
            let records = report::read_fold_records(path)?;
            let values: Vec<f64> = records.iter().filter_map(|r| r.report.get(a.metric)).collect();
            let d = describe(&values).with_context(|| format!("{}: no {} values", path.display(), a.metric))?;
            say!(
                "{name} {} mean={:.4} sd={:.4} median={:.4}",
                a.metric, d.mean, d.sd, d.median
            );
            rows.push((name.clone(), d));
            if a.swap_positive {
                let mut swapped = records.clone();
                for r in &mut swapped {
                    r.report = r.report.swapped();
                }
                let summary = CvSummary::from_records(swapped);
                report::write_fold_records(&ctx.path(&format!("{name}.swapped.folds.csv")), &summary.records)?;
                report::write_summary(&ctx.path(&format!("{name}.swapped.summary.csv")), &summary)?;
            }
        }
        report::write_descriptions(&ctx.path("describe.csv"), &rows)?;
    }
    if !a.chromosomes.is_empty() {
        let ids = unique_names(&a.chromosomes, ".best.json")?;
        let files: Vec<ChromosomeFile> = a
            .chromosomes
            .iter()
            .map(|p| report::read_chromosome(p))
            .collect::<crate::Result<_>>()?;
        let mut terms = BTreeMap::new();
        for f in &files {
            if f.terms.len() != f.features.len() {
                bail!("{}: features and terms differ in length", f.experiment_id);
            }
            for (&i, t) in f.features.iter().zip(&f.terms) {
                if let Some(prev) = terms.insert(i, t.clone()) {
                    if &prev != t {
                        bail!("feature {i} is {prev:?} in one file and {t:?} in another");
                    }
                }
            }
        }
        let sets: Vec<&[usize]> = files.iter().map(|f| f.features.as_slice()).collect();
        let table = ga::feature_frequency_of(&sets, |i| terms.get(&i).cloned())?;
        report::write_feature_frequency(&ctx.path("feature_frequency.csv"), &ids, &table)?;
        say!("feature frequency: {} features across {} runs", table.len(), ids.len());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        let r = parse_range("0.1:1.0:0.1").unwrap();
        assert_eq!(r.len(), 10);
        assert_eq!(r[2], 0.3);
        assert_eq!(r[9], 1.0);
        assert_eq!(parse_range("1:20").unwrap().len(), 20);
        assert!(parse_range("3:1").is_err());
        assert!(parse_range("1:2:0").is_err());
        assert!(parse_range("1").is_err());
    }

    #[test]
    fn optimize_flags() {
        let cli = Cli::try_parse_from(["genoboost", "optimize", "--F", "10", "--P", "400", "--crossover-ratio", "0.6", "--G", "50"]).unwrap();
        let Command::Optimize(a) = &cli.command else { panic!() };
        let ctx = Settings {
            seed: 0,
            out: PathBuf::from("x"),
            file: FileConfig::default(),
        };
        assert_eq!(ga_config(&ctx, a).unwrap().experiment_id(), "F10-P400-C240-G50");
        let cli = Cli::try_parse_from(["genoboost", "optimize", "--crossover-ratio", "1.5"]).unwrap();
        let Command::Optimize(a) = &cli.command else { panic!() };
        assert!(ga_config(&ctx, a).is_err());
        assert!(Cli::try_parse_from(["genoboost", "optimize", "--C", "3", "--crossover-ratio", "0.5"]).is_err());
    }

    #[test]
    fn file_values_yield_to_flags() {
        let file: FileConfig =
            serde_json::from_str(r#"{"ga": {"feature_percent": 5, "population": 20, "parents": 12, "generations": 3}}"#)
                .unwrap();
        let ctx = Settings {
            seed: 0,
            out: PathBuf::from("x"),
            file,
        };
        let cli = Cli::try_parse_from(["genoboost", "optimize", "--G", "7"]).unwrap();
        let Command::Optimize(a) = &cli.command else { panic!() };
        assert_eq!(ga_config(&ctx, a).unwrap().experiment_id(), "F5-P20-C12-G7");
        assert!(serde_json::from_str::<FileConfig>(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn run_names() {
        assert_eq!(run_name(Path::new("a/R00.folds.csv"), ".folds.csv"), "R00");
        assert_eq!(run_name(Path::new("ext.csv"), ".folds.csv"), "ext");
        assert_eq!(run_name(Path::new("F1-P10-C6-G100.best.json"), ".best.json"), "F1-P10-C6-G100");
    }
}
