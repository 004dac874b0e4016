//! Command-line front end. Human-readable summaries go to standard output;
//! machine-readable results only to files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::dataset_io::{self, ConvertOptions};
use crate::error::{GlrError, Result};
use crate::evaluation::{
    self, csv_field, BenchmarkConfig, DatasetEntry, JsonlSink, RunRecord, DEFAULT_K,
    DEFAULT_REPEATS, DEFAULT_TIME_LIMIT_SECONDS,
};
use crate::graph::{dataset_stats, SparseGraph};
use crate::homophily::{high_feature_homophily_ranking, HomophilyProfile};
use crate::models::{ModelKind, ModelSpec};

pub const DATA_DIR_ENV: &str = "GLR_DATA_DIR";

/// Outcome of a subcommand, mapped to the process exit code.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Clean,
    Fatal,
    PartialFailure,
}

impl Status {
    pub fn code(self) -> i32 {
        match self {
            Status::Clean => 0,
            Status::Fatal => 1,
            Status::PartialFailure => 2,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "glr", version, about = "Graph-aware logistic regression and node classification baselines")]
pub struct Cli {
    /// Worker threads for the benchmark (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Convert raw edge/feature/label files into a canonical dataset directory.
    Convert(ConvertArgs),
    /// Print dataset statistics.
    Stats(StatsArgs),
    /// Per-node label and feature homophily.
    Homophily(HomophilyArgs),
    /// Stratified k-fold benchmark.
    Evaluate(EvaluateArgs),
    /// Accuracy as a function of the test-set fraction.
    Sweep(SweepArgs),
    /// Plot-ready tables from an evaluation directory.
    Report(ReportArgs),
}

#[derive(Args, Debug)]
pub struct ConvertArgs {
    #[arg(long)]
    pub edges: PathBuf,
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub name: Option<String>,
    /// Single-character field separator (default: whitespace or comma).
    #[arg(long)]
    pub delimiter: Option<char>,
    #[arg(long)]
    pub string_ids: bool,
    #[arg(long)]
    pub dense_features: bool,
    #[arg(long)]
    pub drop_dangling_edges: bool,
    #[arg(long)]
    pub source_url: Option<String>,
}

#[derive(Args, Debug)]
pub struct StatsArgs {
    /// Dataset directories (or names under $GLR_DATA_DIR).
    #[arg(required = true)]
    pub datasets: Vec<PathBuf>,
    /// Write the full statistics as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct HomophilyArgs {
    #[arg(required = true)]
    pub datasets: Vec<PathBuf>,
    /// Directory for `homophily_<dataset>.csv` files.
    #[arg(long, default_value = "results")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    #[arg(long = "dataset", required = true, num_args = 1..)]
    pub datasets: Vec<PathBuf>,
    /// Model kinds, or JSON specs such as '{"kind":"knn_spectral_x","hyperparams":{"k_neighbors":3}}'.
    #[arg(long = "model", num_args = 1.., default_values_t = ModelKind::ALL.map(|k| k.as_str().to_string()))]
    pub models: Vec<String>,
    #[arg(long, default_value_t = DEFAULT_K)]
    pub k: usize,
    #[arg(long, default_value_t = DEFAULT_REPEATS)]
    pub repeats: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long = "time-limit", default_value_t = DEFAULT_TIME_LIMIT_SECONDS)]
    pub time_limit: f64,
    #[arg(long, default_value = "results")]
    pub out: PathBuf,
    /// Serial execution; timings go to a separate timings.jsonl.
    #[arg(long)]
    pub deterministic: bool,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long, default_value = "glr")]
    pub model: String,
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.1, 0.25, 0.5, 0.75])]
    pub fractions: Vec<f64>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value = "results/sweep.csv")]
    pub out: PathBuf,
    /// Leave wall-clock columns out of the CSV.
    #[arg(long)]
    pub deterministic: bool,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// Directory written by `evaluate`.
    #[arg(long = "run-dir", default_value = "results")]
    pub run_dir: PathBuf,
    /// Output directory (default: the run directory).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn data_root() -> Option<PathBuf> {
    std::env::var_os(DATA_DIR_ENV).map(PathBuf::from)
}

fn resolve(arg: &Path) -> PathBuf {
    dataset_io::resolve_dataset_dir(arg, data_root().as_deref())
}

fn load(arg: &Path) -> Result<SparseGraph> {
    let dir = resolve(arg);
    dataset_io::load_dataset(&dir).map(|(g, _)| g)
}

fn write_file(path: &Path, body: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| GlrError::io(parent, e))?;
    }
    fs::write(path, body).map_err(|e| GlrError::io(path, e))
}

/// Parses model arguments, rejecting unknown kinds up front.
pub fn parse_models(args: &[String]) -> Result<Vec<ModelSpec>> {
    args.iter().map(|s| s.parse()).collect()
}

pub fn run(cli: Cli) -> Status {
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            log::warn!("could not size the thread pool: {e}");
        }
    }
    let result = match cli.command {
        Command::Convert(a) => cmd_convert(&a),
        Command::Stats(a) => cmd_stats(&a),
        Command::Homophily(a) => cmd_homophily(&a),
        Command::Evaluate(a) => cmd_evaluate(&a),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::Report(a) => cmd_report(&a),
    };
    match result {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            Status::Fatal
        }
    }
}

pub fn cmd_convert(a: &ConvertArgs) -> Result<Status> {
    let opts = ConvertOptions {
        name: a.name.clone(),
        delimiter: a.delimiter,
        string_ids: a.string_ids,
        dense_features: a.dense_features,
        drop_dangling_edges: a.drop_dangling_edges,
        source_url: a.source_url.clone(),
    };
    let m = dataset_io::convert_edgelist(&a.edges, &a.features, &a.labels, &a.out, &opts)?;
    println!(
        "{}: n={} m={} ({} undirected edges) L={} C={} -> {}",
        m.name,
        m.n,
        m.m,
        m.undirected_edges(),
        m.n_features,
        m.n_classes,
        a.out.display()
    );
    Ok(Status::Clean)
}

pub fn cmd_stats(a: &StatsArgs) -> Result<Status> {
    let mut reports = Vec::new();
    for d in &a.datasets {
        let g = load(d)?;
        let s = dataset_stats(&g);
        println!(
            "{}: n={} m={} undirected_edges={} L={} C={} density={:.3e} (pairs {:.3e}, n^2 {:.3e}) isolated={}",
            s.name,
            s.n,
            s.m,
            s.undirected_edges,
            s.n_features,
            s.class_count,
            s.density,
            s.density_pairs,
            s.density_square,
            s.isolated_nodes
        );
        reports.push(s);
    }
    if let Some(out) = &a.out {
        write_file(out, &(serde_json::to_string_pretty(&reports)? + "\n"))?;
    }
    Ok(Status::Clean)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// `node,label_homophily,feature_homophily,degree`; isolated nodes have
/// empty homophily fields.
pub fn homophily_csv(g: &SparseGraph, p: &HomophilyProfile) -> String {
    let mut out = String::from("node,label_homophily,feature_homophily,degree\n");
    for u in 0..g.n_nodes() {
        writeln!(
            out,
            "{u},{},{},{}",
            fmt_opt(p.per_node_label[u]),
            fmt_opt(p.per_node_feature[u]),
            g.degree(u)
        )
        .expect("string write");
    }
    out
}

fn homophily_file(dir: &Path, dataset: &str) -> PathBuf {
    dir.join(format!("homophily_{dataset}.csv"))
}

pub fn cmd_homophily(a: &HomophilyArgs) -> Result<Status> {
    for d in &a.datasets {
        let g = load(d)?;
        let p = HomophilyProfile::compute(&g);
        write_file(&homophily_file(&a.out, g.name()), &homophily_csv(&g, &p))?;
        println!(
            "{}: label homophily {:.4}, feature homophily {:.4} ({} isolated nodes excluded)",
            g.name(),
            p.graph_label,
            p.graph_feature,
            p.excluded_isolated
        );
    }
    Ok(Status::Clean)
}

pub fn cmd_evaluate(a: &EvaluateArgs) -> Result<Status> {
    let models = parse_models(&a.models)?;
    let cfg = BenchmarkConfig {
        k: a.k,
        repeats: a.repeats,
        seed: a.seed,
        time_limit_seconds: a.time_limit,
        deterministic: a.deterministic,
    };
    fs::create_dir_all(&a.out).map_err(|e| GlrError::io(&a.out, e))?;

    let mut datasets = Vec::new();
    for d in &a.datasets {
        match load(d) {
            Ok(g) => {
                let p = HomophilyProfile::compute(&g);
                write_file(&homophily_file(&a.out, g.name()), &homophily_csv(&g, &p))?;
                datasets.push(DatasetEntry::from(g));
            }
            Err(e) => {
                let name = d
                    .file_name()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| d.display().to_string());
                eprintln!("dataset {name}: {e}");
                datasets.push(DatasetEntry::Failed {
                    name,
                    error: e.to_string(),
                });
            }
        }
    }

    let sink = JsonlSink::create(&a.out, a.deterministic)?;
    let records = evaluation::run_benchmark(&datasets, &models, &cfg, &sink)?;
    sink.flush()?;
    let summary = evaluation::summarize(&records)?;
    write_file(&a.out.join("summary.csv"), &summary.to_csv())?;
    print!("{}", summary.to_grid());

    let failures = records.iter().filter(|r| !r.is_success()).count();
    let mut reported = std::collections::BTreeSet::new();
    for r in records.iter().filter(|r| r.error.is_some()) {
        if reported.insert((r.dataset.clone(), r.model_key())) {
            eprintln!(
                "{} / {}: {}",
                r.dataset,
                r.model_key(),
                r.error.as_deref().unwrap_or_default()
            );
        }
    }
    println!(
        "{} records written to {}",
        records.len(),
        sink.runs_path().display()
    );
    Ok(if failures > 0 {
        eprintln!("{failures} runs failed or timed out");
        Status::PartialFailure
    } else {
        Status::Clean
    })
}

pub fn cmd_sweep(a: &SweepArgs) -> Result<Status> {
    let spec: ModelSpec = a.model.parse()?;
    let g = load(&a.dataset)?;
    let records = evaluation::split_size_sweep(&g, &spec, &a.fractions, a.seed)?;
    write_file(&a.out, &evaluation::sweep_csv(&records, !a.deterministic))?;
    for r in &records {
        println!(
            "{} {} test fraction {:.2}: accuracy {:.4} ({} train / {} test)",
            r.dataset, r.model, r.test_fraction, r.accuracy, r.n_train, r.n_test
        );
    }
    Ok(Status::Clean)
}

/// Parses a `homophily_<dataset>.csv` file back into a profile.
pub fn read_homophily_csv(path: &Path, dataset: &str) -> Result<(HomophilyProfile, Vec<usize>)> {
    let text = fs::read_to_string(path).map_err(|e| GlrError::io(path, e))?;
    let mut label = Vec::new();
    let mut feature = Vec::new();
    let mut degree = Vec::new();
    let opt = |line: usize, s: &str| -> Result<Option<f64>> {
        if s.is_empty() {
            Ok(None)
        } else {
            s.parse().map(Some).map_err(|_| GlrError::Parse {
                path: path.to_path_buf(),
                line,
                msg: format!("bad homophily value `{s}`"),
            })
        }
    };
    for (i, l) in text.lines().enumerate().skip(1) {
        let f: Vec<&str> = l.split(',').collect();
        if f.len() != 4 {
            return Err(GlrError::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                msg: "expected 4 fields".into(),
            });
        }
        label.push(opt(i + 1, f[1])?);
        feature.push(opt(i + 1, f[2])?);
        degree.push(f[3].parse().map_err(|_| GlrError::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            msg: format!("bad degree `{}`", f[3]),
        })?);
    }
    let mean = |v: &[Option<f64>]| {
        let d: Vec<f64> = v.iter().flatten().copied().collect();
        if d.is_empty() {
            f64::NAN
        } else {
            d.iter().sum::<f64>() / d.len() as f64
        }
    };
    let profile = HomophilyProfile {
        dataset: dataset.to_string(),
        graph_label: mean(&label),
        graph_feature: mean(&feature),
        excluded_isolated: label.iter().filter(|v| v.is_none()).count(),
        per_node_label: label,
        per_node_feature: feature,
    };
    Ok((profile, degree))
}

/// Merges timings from a `timings.jsonl` sidecar into records whose own
/// timings were stripped.
fn merge_timings(records: &mut [RunRecord], path: &Path) -> Result<()> {
    let text = fs::read_to_string(path).map_err(|e| GlrError::io(path, e))?;
    let mut by_id = BTreeMap::new();
    for (i, l) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let t: evaluation::TimingRecord = serde_json::from_str(l).map_err(|e| GlrError::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            msg: e.to_string(),
        })?;
        by_id.insert((t.dataset.clone(), t.model.clone(), t.fold, t.repeat), t);
    }
    for r in records {
        if let Some(t) = by_id.get(&(r.dataset.clone(), r.model_key(), r.fold, r.repeat)) {
            r.fit_seconds = r.fit_seconds.or(t.fit_seconds);
            r.predict_seconds = r.predict_seconds.or(t.predict_seconds);
        }
    }
    Ok(())
}

pub fn cmd_report(a: &ReportArgs) -> Result<Status> {
    let runs = a.run_dir.join("runs.jsonl");
    if !runs.exists() {
        return Err(GlrError::MissingFile(runs));
    }
    let out_dir = a.out.clone().unwrap_or_else(|| a.run_dir.clone());
    let mut records = evaluation::read_records(&runs)?;
    let timings = a.run_dir.join("timings.jsonl");
    if timings.exists() {
        merge_timings(&mut records, &timings)?;
    }
    let summary = evaluation::summarize(&records)?;
    let mut status = Status::Clean;

    let mut tradeoff = String::from("model,dataset,mean_accuracy,mean_total_seconds\n");
    for c in &summary.cells {
        writeln!(
            tradeoff,
            "{},{},{},{}",
            csv_field(&c.model),
            csv_field(&c.dataset),
            fmt_opt(c.mean_accuracy),
            fmt_opt(c.mean_total_seconds())
        )
        .expect("string write");
    }
    write_file(&out_dir.join("tradeoff.csv"), &tradeoff)?;

    let mut profiles = BTreeMap::new();
    let mut distributions = String::from("dataset,node,label_homophily,feature_homophily,degree\n");
    for d in &summary.datasets {
        let path = homophily_file(&a.run_dir, d);
        if !path.exists() {
            eprintln!("missing homophily profile for {d}: {}", path.display());
            status = Status::PartialFailure;
            continue;
        }
        let (p, degrees) = read_homophily_csv(&path, d)?;
        for (u, deg) in degrees.iter().enumerate() {
            writeln!(
                distributions,
                "{},{u},{},{},{deg}",
                csv_field(d),
                fmt_opt(p.per_node_label[u]),
                fmt_opt(p.per_node_feature[u])
            )
            .expect("string write");
        }
        profiles.insert(d.clone(), p);
    }
    write_file(&out_dir.join("homophily_distributions.csv"), &distributions)?;

    match high_feature_homophily_ranking(&records, &profiles) {
        Ok(table) => {
            let mut csv = String::from("model,average_rank,threshold,qualifying_datasets\n");
            let qualifying = table.qualifying.join(";");
            for (m, r) in &table.average_ranks {
                writeln!(csv, "{},{r},{},{}", csv_field(m), table.threshold, csv_field(&qualifying))
                    .expect("string write");
            }
            write_file(&out_dir.join("ranking_high_feature_homophily.csv"), &csv)?;
            println!(
                "feature homophily median {:.4}; qualifying datasets: {}",
                table.threshold, qualifying
            );
            for (m, r) in &table.average_ranks {
                println!("  {m:<16} {r:.2}");
            }
        }
        Err(e) => {
            eprintln!("high feature homophily ranking unavailable: {e}");
            status = Status::PartialFailure;
        }
    }

    // Measured time ratio of GLR against the slowest baseline on the largest dataset.
    if let Some(largest) = summary
        .datasets
        .iter()
        .max_by_key(|d| profiles.get(*d).map_or(0, |p| p.per_node_label.len()))
    {
        let cells: Vec<_> = summary.cells.iter().filter(|c| &c.dataset == largest).collect();
        let glr = cells
            .iter()
            .find(|c| c.model == ModelKind::Glr.as_str())
            .and_then(|c| c.mean_total_seconds());
        let slowest = cells
            .iter()
            .filter(|c| c.model != ModelKind::Glr.as_str())
            .filter_map(|c| c.mean_total_seconds().map(|t| (t, &c.model)))
            .max_by(|a, b| a.0.total_cmp(&b.0));
        if let (Some(g), Some((t, m))) = (glr, slowest) {
            println!(
                "{largest}: GLR {g:.4}s per run, slowest baseline {m} {t:.4}s (ratio {:.2})",
                t / g
            );
        }
    }
    Ok(status)
}
