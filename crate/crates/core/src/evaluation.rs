//! Stratified k-fold benchmark harness: fold plans, run records, summaries
//! and the split-size sweep.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{GlrError, Result};
use crate::graph::SparseGraph;
use crate::models::{self, ModelSpec};

pub const RECORD_SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_K: usize = 4;
pub const DEFAULT_REPEATS: usize = 3;
pub const DEFAULT_TIME_LIMIT_SECONDS: f64 = 300.0;

/// Per-node fold ids for one seeded stratified split.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub seed: u64,
    pub assignments: Vec<usize>,
}

impl FoldPlan {
    pub fn test_nodes(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&u| self.assignments[u] == fold)
            .collect()
    }

    pub fn train_nodes(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&u| self.assignments[u] != fold)
            .collect()
    }
}

fn nodes_by_class(labels: &[usize]) -> Vec<Vec<usize>> {
    let n_classes = labels.iter().copied().max().map_or(0, |c| c + 1);
    let mut by_class = vec![Vec::new(); n_classes];
    for (u, &c) in labels.iter().enumerate() {
        by_class[c].push(u);
    }
    by_class
}

/// Shuffles each class with a seeded PRNG and deals its nodes round-robin to
/// the folds. The dealing position carries over from one class to the next so
/// the remainders spread across folds instead of piling onto fold 0.
pub fn make_folds(labels: &[usize], k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(GlrError::InvalidArgument(format!("k must be at least 2, got {k}")));
    }
    let by_class = nodes_by_class(labels);
    for (class, members) in by_class.iter().enumerate() {
        if !members.is_empty() && members.len() < k {
            return Err(GlrError::ClassTooSmall {
                class,
                size: members.len(),
                k,
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignments = vec![0; labels.len()];
    let mut next = 0;
    for mut members in by_class {
        members.shuffle(&mut rng);
        for u in members {
            assignments[u] = next;
            next = (next + 1) % k;
        }
    }
    Ok(FoldPlan {
        k,
        seed,
        assignments,
    })
}

/// Per-class stratified holdout: `round(fraction * class_size)` nodes of every
/// class go to the test side. Returns `(train, test)`, both sorted.
pub fn stratified_holdout(
    labels: &[usize],
    test_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(GlrError::InvalidArgument(format!(
            "test fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (class, mut members) in nodes_by_class(labels).into_iter().enumerate() {
        if members.is_empty() {
            continue;
        }
        members.shuffle(&mut rng);
        let n_test = (test_fraction * members.len() as f64).round() as usize;
        if n_test >= members.len() {
            return Err(GlrError::InvalidArgument(format!(
                "test fraction {test_fraction} leaves class {class} without training nodes"
            )));
        }
        test.extend_from_slice(&members[..n_test]);
        train.extend_from_slice(&members[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Seed handed to a model for one (fold, repeat) run.
pub fn run_seed(base: u64, fold: usize, repeat: usize) -> u64 {
    let mut z = base
        .wrapping_add((fold as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add((repeat as u64).wrapping_mul(0xBF58_476D_1CE4_E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Short stable identifier of a model configuration.
pub fn config_hash(spec: &ModelSpec) -> String {
    let json = serde_json::to_string(spec).expect("model spec serializes");
    hex::encode(&Sha256::digest(json.as_bytes())[..8])
}

/// Name used for a model in tables: the kind, plus its overrides when any.
pub fn model_key(spec: &ModelSpec) -> String {
    if spec.hyperparams == models::Hyperparams::default() {
        spec.label().to_string()
    } else {
        let h = serde_json::to_string(&spec.hyperparams).expect("hyperparams serialize");
        format!("{}{}", spec.label(), h)
    }
}

/// One (dataset, model, fold, repeat) outcome.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema_version: u32,
    pub dataset: String,
    pub model: ModelSpec,
    pub config_hash: String,
    pub fold: usize,
    pub repeat: usize,
    /// Absent when the cell timed out or the run failed.
    pub accuracy: Option<f64>,
    pub fit_seconds: Option<f64>,
    pub predict_seconds: Option<f64>,
    pub timed_out: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub seed: u64,
}

impl RunRecord {
    fn blank(dataset: &str, spec: &ModelSpec, fold: usize, repeat: usize, seed: u64) -> Self {
        Self {
            schema_version: RECORD_SCHEMA_VERSION,
            dataset: dataset.to_string(),
            model: spec.clone(),
            config_hash: config_hash(spec),
            fold,
            repeat,
            accuracy: None,
            fit_seconds: None,
            predict_seconds: None,
            timed_out: false,
            error: None,
            seed,
        }
    }

    pub fn model_key(&self) -> String {
        model_key(&self.model)
    }

    pub fn is_success(&self) -> bool {
        self.accuracy.is_some() && !self.timed_out && self.error.is_none()
    }
}

/// Wall-clock timings split off from a record, keyed by its identity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingRecord {
    pub dataset: String,
    pub model: String,
    pub fold: usize,
    pub repeat: usize,
    pub fit_seconds: Option<f64>,
    pub predict_seconds: Option<f64>,
}

/// Destination for finished cells. Must tolerate concurrent callers.
pub trait RecordSink: Sync {
    fn write_cell(&self, records: &[RunRecord]) -> Result<()>;
}

/// Collects records in memory.
#[derive(Default)]
pub struct MemorySink {
    records: Mutex<Vec<RunRecord>>,
}

impl MemorySink {
    pub fn into_records(self) -> Vec<RunRecord> {
        self.records.into_inner().expect("sink poisoned")
    }
}

impl RecordSink for MemorySink {
    fn write_cell(&self, records: &[RunRecord]) -> Result<()> {
        self.records
            .lock()
            .expect("sink poisoned")
            .extend_from_slice(records);
        Ok(())
    }
}

struct JsonlFiles {
    runs: BufWriter<File>,
    timings: Option<BufWriter<File>>,
}

/// Appends records to `runs.jsonl`.
///
/// With `split_timings`, wall-clock times are written to a `timings.jsonl`
/// sidecar and nulled in the main stream, which then depends only on the
/// inputs and the seed.
pub struct JsonlSink {
    runs_path: PathBuf,
    timings_path: Option<PathBuf>,
    files: Mutex<JsonlFiles>,
}

impl JsonlSink {
    pub fn create(dir: &Path, split_timings: bool) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| GlrError::io(dir, e))?;
        let runs_path = dir.join("runs.jsonl");
        let runs = BufWriter::new(File::create(&runs_path).map_err(|e| GlrError::io(&runs_path, e))?);
        let (timings_path, timings) = if split_timings {
            let p = dir.join("timings.jsonl");
            let f = BufWriter::new(File::create(&p).map_err(|e| GlrError::io(&p, e))?);
            (Some(p), Some(f))
        } else {
            (None, None)
        };
        Ok(Self {
            runs_path,
            timings_path,
            files: Mutex::new(JsonlFiles { runs, timings }),
        })
    }

    pub fn runs_path(&self) -> &Path {
        &self.runs_path
    }

    pub fn flush(&self) -> Result<()> {
        let mut files = self.files.lock().expect("sink poisoned");
        files.runs.flush().map_err(|e| GlrError::io(&self.runs_path, e))?;
        if let (Some(t), Some(p)) = (files.timings.as_mut(), &self.timings_path) {
            t.flush().map_err(|e| GlrError::io(p, e))?;
        }
        Ok(())
    }
}

impl RecordSink for JsonlSink {
    fn write_cell(&self, records: &[RunRecord]) -> Result<()> {
        let mut files = self.files.lock().expect("sink poisoned");
        for r in records {
            if let Some(t) = files.timings.as_mut() {
                let timing = TimingRecord {
                    dataset: r.dataset.clone(),
                    model: r.model_key(),
                    fold: r.fold,
                    repeat: r.repeat,
                    fit_seconds: r.fit_seconds,
                    predict_seconds: r.predict_seconds,
                };
                let p = self.timings_path.as_ref().expect("timings path");
                serde_json::to_writer(&mut *t, &timing)?;
                t.write_all(b"\n").map_err(|e| GlrError::io(p, e))?;
                let mut stripped = r.clone();
                stripped.fit_seconds = None;
                stripped.predict_seconds = None;
                serde_json::to_writer(&mut files.runs, &stripped)?;
            } else {
                serde_json::to_writer(&mut files.runs, r)?;
            }
            files
                .runs
                .write_all(b"\n")
                .map_err(|e| GlrError::io(&self.runs_path, e))?;
        }
        files.runs.flush().map_err(|e| GlrError::io(&self.runs_path, e))
    }
}

/// Reads a `runs.jsonl` stream.
pub fn read_records(path: &Path) -> Result<Vec<RunRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| GlrError::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| GlrError::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                msg: e.to_string(),
            })
        })
        .collect()
}

/// A dataset slot in a benchmark: either loaded or failed to load.
#[derive(Clone, Debug)]
pub enum DatasetEntry {
    Ready(Arc<SparseGraph>),
    Failed { name: String, error: String },
}

impl DatasetEntry {
    pub fn name(&self) -> &str {
        match self {
            DatasetEntry::Ready(g) => g.name(),
            DatasetEntry::Failed { name, .. } => name,
        }
    }
}

impl From<SparseGraph> for DatasetEntry {
    fn from(g: SparseGraph) -> Self {
        DatasetEntry::Ready(Arc::new(g))
    }
}

#[derive(Clone, Debug)]
pub struct BenchmarkConfig {
    pub k: usize,
    pub repeats: usize,
    pub seed: u64,
    /// Budget for all fits and predictions of one model on one dataset.
    pub time_limit_seconds: f64,
    /// Run cells serially in a fixed order.
    pub deterministic: bool,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self {
            k: DEFAULT_K,
            repeats: DEFAULT_REPEATS,
            seed: 0,
            time_limit_seconds: DEFAULT_TIME_LIMIT_SECONDS,
            deterministic: false,
        }
    }
}

impl BenchmarkConfig {
    fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(GlrError::InvalidArgument("k must be at least 2".into()));
        }
        if self.repeats == 0 {
            return Err(GlrError::InvalidArgument("repeats must be at least 1".into()));
        }
        if !(self.time_limit_seconds > 0.0) {
            return Err(GlrError::InvalidArgument(
                "time limit must be positive".into(),
            ));
        }
        Ok(())
    }
}

fn failed_cell(dataset: &str, spec: &ModelSpec, cfg: &BenchmarkConfig, error: &str) -> Vec<RunRecord> {
    let mut out = Vec::with_capacity(cfg.k * cfg.repeats);
    for fold in 0..cfg.k {
        for repeat in 0..cfg.repeats {
            let mut r = RunRecord::blank(dataset, spec, fold, repeat, cfg.seed);
            r.error = Some(error.to_string());
            out.push(r);
        }
    }
    out
}

/// Runs every fold and repeat of one model on one dataset.
///
/// The time budget is checked between runs: once the accumulated fit and
/// predict time passes it, the remaining runs are skipped and every record of
/// the cell is marked timed out.
fn run_cell(
    g: &SparseGraph,
    plan: &FoldPlan,
    spec: &ModelSpec,
    cfg: &BenchmarkConfig,
) -> Vec<RunRecord> {
    let mut out = Vec::with_capacity(cfg.k * cfg.repeats);
    let mut spent = 0.0;
    let mut timed_out = false;
    for fold in 0..cfg.k {
        let train = plan.train_nodes(fold);
        let test = plan.test_nodes(fold);
        for repeat in 0..cfg.repeats {
            let mut r = RunRecord::blank(g.name(), spec, fold, repeat, cfg.seed);
            if timed_out {
                out.push(r);
                continue;
            }
            let seed = run_seed(cfg.seed, fold, repeat);
            let t0 = Instant::now();
            match models::fit(spec, g, &train, seed) {
                Ok(model) => {
                    let fit_s = t0.elapsed().as_secs_f64();
                    let t1 = Instant::now();
                    match models::predict(&model, g, &test) {
                        Ok(pred) => {
                            r.accuracy = Some(models::accuracy(&pred, g, &test));
                            r.predict_seconds = Some(t1.elapsed().as_secs_f64());
                        }
                        Err(e) => r.error = Some(format!("predict failed: {e}")),
                    }
                    r.fit_seconds = Some(fit_s);
                }
                Err(e) => r.error = Some(format!("fit failed: {e}")),
            }
            spent += t0.elapsed().as_secs_f64();
            if spent > cfg.time_limit_seconds {
                log::warn!(
                    "{} on {} exceeded the {}s time limit",
                    model_key(spec),
                    g.name(),
                    cfg.time_limit_seconds
                );
                timed_out = true;
            }
            out.push(r);
        }
    }
    if timed_out {
        for r in &mut out {
            r.timed_out = true;
            r.accuracy = None;
        }
    }
    out
}

/// Runs the full protocol for every (dataset, model) cell. Each finished cell
/// is handed to `sink` at once; the returned records are in (dataset, model,
/// fold, repeat) order regardless of execution order.
pub fn run_benchmark(
    datasets: &[DatasetEntry],
    models: &[ModelSpec],
    cfg: &BenchmarkConfig,
    sink: &dyn RecordSink,
) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    let mut plans: Vec<std::result::Result<FoldPlan, String>> = Vec::new();
    for d in datasets {
        plans.push(match d {
            DatasetEntry::Ready(g) => {
                make_folds(g.labels(), cfg.k, cfg.seed).map_err(|e| format!("fold planning failed: {e}"))
            }
            DatasetEntry::Failed { error, .. } => Err(format!("dataset load failed: {error}")),
        });
    }
    let cells: Vec<(usize, usize)> = (0..datasets.len())
        .flat_map(|d| (0..models.len()).map(move |m| (d, m)))
        .collect();
    let exec = |&(d, m): &(usize, usize)| -> Result<Vec<RunRecord>> {
        let spec = &models[m];
        let records = match (&datasets[d], &plans[d]) {
            (DatasetEntry::Ready(g), Ok(plan)) => run_cell(g, plan, spec, cfg),
            (_, Err(msg)) => failed_cell(datasets[d].name(), spec, cfg, msg),
            (DatasetEntry::Failed { .. }, Ok(_)) => unreachable!(),
        };
        sink.write_cell(&records)?;
        Ok(records)
    };
    let per_cell: Vec<Vec<RunRecord>> = if cfg.deterministic {
        cells.iter().map(exec).collect::<Result<_>>()?
    } else {
        cells.par_iter().map(exec).collect::<Result<_>>()?
    };
    Ok(per_cell.into_iter().flatten().collect())
}

/// Averaged ranks: items with equal scores share the mean of the positions
/// they span. Higher scores rank first.
pub fn average_ranks(scores: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut ranks = vec![0.0; scores.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let shared = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            ranks[o] = shared;
        }
        i = j + 1;
    }
    ranks
}

/// Mean accuracy of a (dataset, model) cell, or `None` when any of its runs
/// timed out or failed.
fn cell_mean(records: &[&RunRecord]) -> Option<f64> {
    if records.is_empty() || records.iter().any(|r| !r.is_success()) {
        return None;
    }
    Some(records.iter().map(|r| r.accuracy.unwrap()).sum::<f64>() / records.len() as f64)
}

fn group_cells(records: &[RunRecord]) -> BTreeMap<String, BTreeMap<String, Vec<&RunRecord>>> {
    let mut cells: BTreeMap<String, BTreeMap<String, Vec<&RunRecord>>> = BTreeMap::new();
    for r in records {
        cells
            .entry(r.dataset.clone())
            .or_default()
            .entry(r.model_key())
            .or_default()
            .push(r);
    }
    cells
}

/// Per-dataset model ranks by mean accuracy. Models that timed out or failed
/// on a dataset all take the worst rank, the number of models there.
pub fn rank_cells(records: &[RunRecord]) -> BTreeMap<String, BTreeMap<String, f64>> {
    group_cells(records)
        .into_iter()
        .map(|(dataset, by_model)| {
            let worst = by_model.len() as f64;
            let means: Vec<(String, Option<f64>)> = by_model
                .iter()
                .map(|(m, rs)| (m.clone(), cell_mean(rs)))
                .collect();
            let ok: Vec<f64> = means.iter().filter_map(|(_, v)| *v).collect();
            let mut ok_ranks = average_ranks(&ok).into_iter();
            let ranks = means
                .into_iter()
                .map(|(m, v)| {
                    let r = match v {
                        Some(_) => ok_ranks.next().unwrap(),
                        None => worst,
                    };
                    (m, r)
                })
                .collect();
            (dataset, ranks)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub dataset: String,
    pub model: String,
    pub runs: usize,
    pub mean_accuracy: Option<f64>,
    /// Population standard deviation over all fold x repeat runs.
    pub std_accuracy: Option<f64>,
    pub mean_fit_seconds: Option<f64>,
    pub mean_predict_seconds: Option<f64>,
    pub timed_out: bool,
    pub failed: bool,
}

impl CellSummary {
    pub fn mean_total_seconds(&self) -> Option<f64> {
        Some(self.mean_fit_seconds? + self.mean_predict_seconds?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkSummary {
    pub datasets: Vec<String>,
    pub models: Vec<String>,
    pub cells: Vec<CellSummary>,
    pub ranks: BTreeMap<String, BTreeMap<String, f64>>,
    /// (model, mean rank over datasets), in model order.
    pub average_ranks: Vec<(String, f64)>,
}

fn mean_of(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Option<Vec<f64>> = values.collect();
    let v = v?;
    if v.is_empty() {
        None
    } else {
        Some(v.iter().sum::<f64>() / v.len() as f64)
    }
}

/// Aggregates records per cell and ranks the models. Everything is derived
/// from the records alone.
pub fn summarize(records: &[RunRecord]) -> Result<BenchmarkSummary> {
    if records.is_empty() {
        return Err(GlrError::InvalidArgument("no records to summarize".into()));
    }
    let mut datasets: Vec<String> = Vec::new();
    let mut models: Vec<String> = Vec::new();
    for r in records {
        if !datasets.contains(&r.dataset) {
            datasets.push(r.dataset.clone());
        }
        let key = r.model_key();
        if !models.contains(&key) {
            models.push(key);
        }
    }
    let grouped = group_cells(records);
    let mut cells = Vec::new();
    for d in &datasets {
        for m in &models {
            let Some(rs) = grouped.get(d).and_then(|x| x.get(m)) else {
                continue;
            };
            let mean = cell_mean(rs);
            let std = mean.map(|mu| {
                let var = rs
                    .iter()
                    .map(|r| (r.accuracy.unwrap() - mu).powi(2))
                    .sum::<f64>()
                    / rs.len() as f64;
                var.sqrt()
            });
            cells.push(CellSummary {
                dataset: d.clone(),
                model: m.clone(),
                runs: rs.len(),
                mean_accuracy: mean,
                std_accuracy: std,
                mean_fit_seconds: mean_of(rs.iter().map(|r| r.fit_seconds)),
                mean_predict_seconds: mean_of(rs.iter().map(|r| r.predict_seconds)),
                timed_out: rs.iter().any(|r| r.timed_out),
                failed: rs.iter().any(|r| r.error.is_some()),
            });
        }
    }
    let ranks = rank_cells(records);
    let average_ranks = models
        .iter()
        .map(|m| {
            let rs: Vec<f64> = ranks.values().filter_map(|x| x.get(m).copied()).collect();
            (m.clone(), rs.iter().sum::<f64>() / rs.len() as f64)
        })
        .collect();
    Ok(BenchmarkSummary {
        datasets,
        models,
        cells,
        ranks,
        average_ranks,
    })
}

impl BenchmarkSummary {
    pub fn cell(&self, dataset: &str, model: &str) -> Option<&CellSummary> {
        self.cells
            .iter()
            .find(|c| c.dataset == dataset && c.model == model)
    }

    fn cell_text(&self, dataset: &str, model: &str) -> String {
        match self.cell(dataset, model) {
            None => String::new(),
            Some(c) if c.timed_out => "timeout".into(),
            Some(c) => match (c.mean_accuracy, c.std_accuracy) {
                (Some(m), Some(s)) => format!("{m:.4} ± {s:.4}"),
                _ => "error".into(),
            },
        }
    }

    /// Models as rows, datasets as columns, "mean ± std" cells, then the
    /// average rank.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("model");
        for d in &self.datasets {
            out.push(',');
            out.push_str(&csv_field(d));
        }
        out.push_str(",average_rank\n");
        for (m, rank) in &self.average_ranks {
            out.push_str(&csv_field(m));
            for d in &self.datasets {
                out.push(',');
                out.push_str(&csv_field(&self.cell_text(d, m)));
            }
            out.push_str(&format!(",{rank:.2}\n"));
        }
        out
    }

    /// Fixed-width grid for the terminal.
    pub fn to_grid(&self) -> String {
        let mw = self.models.iter().map(|m| m.chars().count()).max().unwrap_or(5).max(5);
        let cw = self
            .datasets
            .iter()
            .map(|d| d.chars().count())
            .max()
            .unwrap_or(0)
            .max(17);
        let mut out = format!("{:<mw$}", "model");
        for d in &self.datasets {
            out.push_str(&format!("  {d:>cw$}"));
        }
        out.push_str("  avg rank\n");
        for (m, rank) in &self.average_ranks {
            out.push_str(&format!("{m:<mw$}"));
            for d in &self.datasets {
                out.push_str(&format!("  {:>cw$}", self.cell_text(d, m)));
            }
            out.push_str(&format!("  {rank:>8.2}\n"));
        }
        out
    }
}

pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub dataset: String,
    pub model: String,
    pub test_fraction: f64,
    pub n_train: usize,
    pub n_test: usize,
    pub accuracy: f64,
    pub fit_seconds: f64,
    pub predict_seconds: f64,
    pub seed: u64,
}

/// One stratified holdout per test fraction, fit and scored.
pub fn split_size_sweep(
    g: &SparseGraph,
    spec: &ModelSpec,
    test_fractions: &[f64],
    seed: u64,
) -> Result<Vec<SweepRecord>> {
    let mut out = Vec::with_capacity(test_fractions.len());
    for (i, &fraction) in test_fractions.iter().enumerate() {
        let (train, test) = stratified_holdout(g.labels(), fraction, seed)?;
        let t0 = Instant::now();
        let model = models::fit(spec, g, &train, run_seed(seed, i, 0))?;
        let fit_seconds = t0.elapsed().as_secs_f64();
        let t1 = Instant::now();
        let pred = models::predict(&model, g, &test)?;
        let predict_seconds = t1.elapsed().as_secs_f64();
        out.push(SweepRecord {
            dataset: g.name().to_string(),
            model: model_key(spec),
            test_fraction: fraction,
            n_train: train.len(),
            n_test: test.len(),
            accuracy: models::accuracy(&pred, g, &test),
            fit_seconds,
            predict_seconds,
            seed,
        });
    }
    Ok(out)
}

pub fn sweep_csv(records: &[SweepRecord], include_timings: bool) -> String {
    let mut out = String::from("dataset,model,test_fraction,n_train,n_test,accuracy");
    if include_timings {
        out.push_str(",fit_seconds,predict_seconds");
    }
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{}",
            csv_field(&r.dataset),
            csv_field(&r.model),
            r.test_fraction,
            r.n_train,
            r.n_test,
            r.accuracy
        ));
        if include_timings {
            out.push_str(&format!(",{},{}", r.fit_seconds, r.predict_seconds));
        }
        out.push('\n');
    }
    out
}
