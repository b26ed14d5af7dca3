//! Command-line front end: `synth`, `extract`, `train-eval`,
//! `filterbank-report` and `pipeline`.
//!
//! Every command writes its files atomically and is deterministic given the
//! configuration and seed. `pipeline --out D` writes exactly the files that
//!
//! ```text
//! synth --out D
//! extract --manifest D/manifest.csv --out D/features.csv
//! train-eval --dataset D/features.csv --out D
//! ```
//!
//! would, byte for byte.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::classify::ClassifierKind;
use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::evaluate::{
    average_performance, cross_validate, write_confusion_csv, write_metrics_csv,
    write_parallel_coordinates_csv, ConfusionMatrix, MetricsReport,
};
use crate::io::{
    csv_writer, finish, fmt_real, read_dataset_csv, read_signal_csv, write_dataset_csv,
    write_signal_csv,
};
use crate::preprocess::preprocess_pipeline;
use crate::scattering::{build_filter_banks, ScatteringNetwork};
use crate::signal::{LabeledDataset, Signal};
use crate::synth::{generate_dataset, read_manifest, write_manifest, ManifestRow};

pub const MANIFEST_FILE: &str = "manifest.csv";
pub const RECORDINGS_DIR: &str = "recordings";
pub const FEATURES_FILE: &str = "features.csv";
pub const METRICS_FILE: &str = "metrics.csv";
pub const PARALLEL_COORDINATES_FILE: &str = "parallel_coordinates.csv";
pub const FILTERBANK_FILE: &str = "filterbank.csv";
pub const LITTLEWOOD_PALEY_FILE: &str = "littlewood_paley.csv";

#[derive(Debug, Parser)]
#[command(name = "dss-fdd", version, about = "Scattering-feature fault detection for motor-current signals")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// TOML configuration file; missing keys take defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory, or the dataset file for `extract`.
    #[arg(long)]
    pub out: PathBuf,
    /// Signal column, by zero-based index or header name.
    #[arg(long)]
    pub channel: Option<String>,
    #[arg(long)]
    pub sample_rate: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic labelled corpus and its manifest.
    Synth(CommonArgs),
    /// Segment every manifest recording and write one feature row per cycle.
    Extract {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Cross-validate each configured classifier on a feature dataset.
    TrainEval {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        dataset: PathBuf,
    },
    /// Export filter centres, bandwidths and the Littlewood-Paley sum.
    FilterbankReport(CommonArgs),
    /// synth, extract and train-eval into one directory.
    Pipeline(CommonArgs),
}

impl Command {
    fn common(&self) -> &CommonArgs {
        match self {
            Command::Synth(c) | Command::FilterbankReport(c) | Command::Pipeline(c) => c,
            Command::Extract { common, .. } | Command::TrainEval { common, .. } => common,
        }
    }
}

/// Loads the config file (or defaults) and applies flag overrides.
pub fn resolve_config(common: &CommonArgs) -> Result<PipelineConfig> {
    let mut cfg = match &common.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(c) = &common.channel {
        cfg.io.channel = c.clone();
    }
    if let Some(fs) = common.sample_rate {
        cfg.io.sample_rate_hz = fs;
    }
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSummary {
    pub manifest: PathBuf,
    pub rows: Vec<ManifestRow>,
}

/// Writes `recordings/rec_NNNN.csv` (one `current` column) and `manifest.csv`
/// under `out_dir`.
pub fn cmd_synth(cfg: &PipelineConfig, out_dir: &Path) -> Result<SynthSummary> {
    let specs = cfg.class_specs()?;
    let items = generate_dataset(
        &specs,
        &cfg.synth.counts,
        cfg.synth.speed_range,
        &cfg.recording_template(),
        cfg.seed,
    )?;
    let rec_dir = out_dir.join(RECORDINGS_DIR);
    std::fs::create_dir_all(&rec_dir).map_err(|e| Error::io(&rec_dir, e))?;
    let width = items.len().saturating_sub(1).to_string().len().max(4);
    let mut rows = Vec::with_capacity(items.len());
    for (i, item) in items.iter().enumerate() {
        let file = format!("{RECORDINGS_DIR}/rec_{i:0width$}.csv");
        write_signal_csv(&item.recording.signal, &out_dir.join(&file), Some("current"))?;
        rows.push(ManifestRow {
            file,
            class: specs[item.class_index].name.clone(),
            speed_percent: item.speed_percent,
            seed: item.seed,
        });
    }
    let manifest = out_dir.join(MANIFEST_FILE);
    write_manifest(&rows, &manifest)?;
    Ok(SynthSummary { manifest, rows })
}

/// Scattering network for the configured segment length and sample rate.
pub fn build_network(cfg: &PipelineConfig) -> Result<ScatteringNetwork> {
    ScatteringNetwork::new(build_filter_banks(&cfg.scattering_config()?)?)
}

/// Smooth, segment and scatter one recording; one feature vector per cycle.
/// Cycles longer than the network's segment length keep their central part.
pub fn recording_features(cfg: &PipelineConfig, net: &ScatteringNetwork, signal: &Signal) -> Result<Vec<Vec<f64>>> {
    if signal.len() < cfg.preprocess.sg_window {
        return Err(Error::data(format!(
            "recording has {} samples, shorter than the smoothing window {}",
            signal.len(),
            cfg.preprocess.sg_window
        )));
    }
    let segments = preprocess_pipeline(
        signal,
        cfg.preprocess.sg_window,
        cfg.preprocess.sg_order,
        &cfg.envelope_params()?,
        &cfg.segmentation_params()?,
    )?;
    let n = cfg.scattering.signal_length;
    segments
        .iter()
        .map(|seg| {
            let s = &seg.signal;
            let cropped;
            let input = if s.len() > n {
                let start = (s.len() - n) / 2;
                cropped = s.slice(start, start + n)?;
                &cropped
            } else {
                s
            };
            Ok(net.features(input)?.values)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractSummary {
    pub dataset: PathBuf,
    pub dim: usize,
    pub class_names: Vec<String>,
    pub class_counts: Vec<usize>,
    /// Manifest files that produced no segment.
    pub skipped: Vec<String>,
}

fn parallel_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get()).min(items.len().max(1));
    if threads <= 1 {
        return items.iter().map(f).collect();
    }
    let chunk = items.len().div_ceil(threads);
    std::thread::scope(|scope| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|part| {
                let f = &f;
                scope.spawn(move || part.iter().map(f).collect::<Vec<R>>())
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("extraction worker panicked"))
            .collect()
    })
}

/// Features for every manifest recording, labelled by its class. Class
/// indices follow first appearance in the manifest.
pub fn cmd_extract(cfg: &PipelineConfig, manifest: &Path, out: &Path) -> Result<ExtractSummary> {
    let rows = read_manifest(manifest)?;
    if rows.is_empty() {
        return Err(Error::data(format!("{}: manifest has no rows", manifest.display())));
    }
    let base = manifest.parent().unwrap_or_else(|| Path::new(""));
    let net = build_network(cfg)?;
    let channel = cfg.channel();
    let fs = cfg.io.sample_rate_hz;
    let per_recording = parallel_map(&rows, |row| {
        let signal = read_signal_csv(&base.join(&row.file), &channel, fs)?;
        recording_features(cfg, &net, &signal).map_err(|e| match e {
            Error::InvalidData(m) => Error::data(format!("{}: {m}", row.file)),
            other => other,
        })
    });

    let mut class_names: Vec<String> = Vec::new();
    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut skipped = Vec::new();
    for (row, result) in rows.iter().zip(per_recording) {
        let label = match class_names.iter().position(|c| c == &row.class) {
            Some(i) => i,
            None => {
                class_names.push(row.class.clone());
                class_names.len() - 1
            }
        };
        let feats = result?;
        if feats.is_empty() {
            skipped.push(row.file.clone());
            continue;
        }
        labels.extend(std::iter::repeat_n(label, feats.len()));
        features.extend(feats);
    }
    if features.is_empty() {
        return Err(Error::data("no segments found in any recording"));
    }
    let names = net.paths().iter().map(|p| p.label()).collect();
    let dataset = LabeledDataset::new(features, labels, class_names.clone(), names)?;
    write_dataset_csv(&dataset, out)?;
    Ok(ExtractSummary {
        dataset: out.to_path_buf(),
        dim: dataset.dim(),
        class_counts: dataset.class_counts(),
        class_names,
        skipped,
    })
}

#[derive(Debug, Clone)]
pub struct TrainEvalSummary {
    pub rows: Vec<(String, MetricsReport)>,
    pub average: MetricsReport,
    pub confusions: Vec<(String, ConfusionMatrix)>,
    /// Highest overall accuracy; the first configured kind wins ties.
    pub best: String,
}

fn summed(confusions: &[ConfusionMatrix]) -> Result<ConfusionMatrix> {
    let mut total = ConfusionMatrix::zeros(confusions[0].class_names.clone());
    for cm in confusions {
        total.merge(cm)?;
    }
    Ok(total)
}

/// Cross-validates every configured kind and writes `metrics.csv`,
/// `confusion_<kind>.csv` (summed over repeats) and the top-feature
/// parallel-coordinate table under `out_dir`.
pub fn cmd_train_eval(cfg: &PipelineConfig, dataset: &Path, out_dir: &Path) -> Result<TrainEvalSummary> {
    let ds = read_dataset_csv(dataset, None)?;
    train_eval_dataset(cfg, &ds, out_dir)
}

pub fn train_eval_dataset(cfg: &PipelineConfig, ds: &LabeledDataset, out_dir: &Path) -> Result<TrainEvalSummary> {
    let kinds: Vec<ClassifierKind> = cfg.classifier_kinds()?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut rows = Vec::with_capacity(kinds.len());
    let mut confusions = Vec::with_capacity(kinds.len());
    for kind in &kinds {
        let outcome = cross_validate(ds, kind, cfg.evaluate.folds, cfg.evaluate.repeats, cfg.seed)?;
        let name = kind.kind.name().to_string();
        confusions.push((name.clone(), summed(&outcome.confusions)?));
        rows.push((name, outcome.report));
    }
    let reports: Vec<MetricsReport> = rows.iter().map(|(_, r)| r.clone()).collect();
    let average = average_performance(&reports)?;
    write_metrics_csv(&rows, &average, &out_dir.join(METRICS_FILE))?;
    for (name, cm) in &confusions {
        write_confusion_csv(cm, &out_dir.join(format!("confusion_{name}.csv")))?;
    }
    write_parallel_coordinates_csv(ds, cfg.evaluate.top_features, &out_dir.join(PARALLEL_COORDINATES_FILE))?;
    let mut best = 0;
    for (i, (_, r)) in rows.iter().enumerate() {
        if r.overall_accuracy > rows[best].1.overall_accuracy {
            best = i;
        }
    }
    Ok(TrainEvalSummary {
        best: rows[best].0.clone(),
        rows,
        average,
        confusions,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterbankSummary {
    pub filterbank: PathBuf,
    pub littlewood_paley: PathBuf,
    pub bank_sizes: (usize, usize),
    pub path_count: usize,
    pub lp_max: f64,
}

/// `filterbank.csv` (index, center_hz, bandwidth_hz, bank; the scaling filter
/// is bank 0) and `littlewood_paley.csv` (frequency_hz, lp_bank1, lp_bank2)
/// over the non-negative FFT bins.
pub fn cmd_filterbank_report(cfg: &PipelineConfig, out_dir: &Path) -> Result<FilterbankSummary> {
    let net = build_network(cfg)?;
    let banks = net.banks();
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let fb_path = out_dir.join(FILTERBANK_FILE);
    let to_err = |p: &Path| {
        let p = p.to_path_buf();
        move |e: csv::Error| Error::csv(&p, e)
    };
    let mut w = csv_writer();
    w.write_record(["index", "center_hz", "bandwidth_hz", "bank"]).map_err(to_err(&fb_path))?;
    w.write_record(["0", "0", &fmt_real(2.0 * banks.phi.cutoff_hz), "0"]).map_err(to_err(&fb_path))?;
    for (b, bank) in [(1, &banks.bank1), (2, &banks.bank2)] {
        for (i, f) in bank.iter().enumerate() {
            w.write_record([
                i.to_string(),
                fmt_real(f.center_frequency_hz),
                fmt_real(f.bandwidth_hz),
                b.to_string(),
            ])
            .map_err(to_err(&fb_path))?;
        }
    }
    finish(&fb_path, w)?;

    let lp_path = out_dir.join(LITTLEWOOD_PALEY_FILE);
    let p = banks.transform_length();
    let fs = cfg.io.sample_rate_hz;
    let (lp1, lp2) = (banks.littlewood_paley(1), banks.littlewood_paley(2));
    let mut w = csv_writer();
    w.write_record(["frequency_hz", "lp_bank1", "lp_bank2"]).map_err(to_err(&lp_path))?;
    let mut lp_max = 0f64;
    for k in 0..=p / 2 {
        lp_max = lp_max.max(lp1[k]).max(lp2[k]);
        w.write_record([fmt_real(k as f64 * fs / p as f64), fmt_real(lp1[k]), fmt_real(lp2[k])])
            .map_err(to_err(&lp_path))?;
    }
    finish(&lp_path, w)?;

    Ok(FilterbankSummary {
        filterbank: fb_path,
        littlewood_paley: lp_path,
        bank_sizes: (banks.bank1.len(), banks.bank2.len()),
        path_count: net.paths().len(),
        lp_max,
    })
}

fn print_synth(s: &SynthSummary) {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    let mut order = Vec::new();
    for r in &s.rows {
        let c = counts.entry(&r.class).or_insert(0);
        if *c == 0 {
            order.push(r.class.as_str());
        }
        *c += 1;
    }
    println!("wrote {} recordings to {}", s.rows.len(), s.manifest.display());
    for name in order {
        println!("  {name}: {}", counts[name]);
    }
}

fn print_extract(s: &ExtractSummary) {
    for f in &s.skipped {
        eprintln!("warning: {f}: no cycles found, skipped");
    }
    println!("feature dimension: {}", s.dim);
    for (name, n) in s.class_names.iter().zip(&s.class_counts) {
        println!("  {name}: {n} segments");
    }
    println!("wrote {}", s.dataset.display());
}

fn print_train_eval(s: &TrainEvalSummary) {
    for (name, r) in &s.rows {
        println!("{name:<24} accuracy {:.4}  overall {:.4}", r.accuracy, r.overall_accuracy);
    }
    let best = s.rows.iter().find(|(n, _)| *n == s.best).map(|(_, r)| r.overall_accuracy);
    println!("best: {} ({:.4})", s.best, best.unwrap_or(f64::NAN));
}

fn execute(cli: Cli) -> Result<()> {
    let common = cli.command.common();
    let cfg = resolve_config(common)?;
    let out = &common.out;
    match &cli.command {
        Command::Synth(_) => print_synth(&cmd_synth(&cfg, out)?),
        Command::Extract { manifest, .. } => print_extract(&cmd_extract(&cfg, manifest, out)?),
        Command::TrainEval { dataset, .. } => print_train_eval(&cmd_train_eval(&cfg, dataset, out)?),
        Command::FilterbankReport(_) => {
            let s = cmd_filterbank_report(&cfg, out)?;
            println!(
                "bank1 {} wavelets, bank2 {} wavelets, {} paths, max LP sum {:.6}",
                s.bank_sizes.0, s.bank_sizes.1, s.path_count, s.lp_max
            );
            println!("wrote {} and {}", s.filterbank.display(), s.littlewood_paley.display());
        }
        Command::Pipeline(_) => {
            let synth = cmd_synth(&cfg, out)?;
            print_synth(&synth);
            let features = out.join(FEATURES_FILE);
            print_extract(&cmd_extract(&cfg, &synth.manifest, &features)?);
            print_train_eval(&cmd_train_eval(&cfg, &features, out)?);
        }
    }
    Ok(())
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code: 0 success, 1 usage error, 2 data or I/O error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return 0;
        }
        Err(e) => {
            let text = e.to_string();
            let line = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("usage error");
            eprintln!("{line}");
            return 1;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.to_string().replace('\n', " "));
            if e.is_usage() {
                1
            } else {
                2
            }
        }
    }
}
