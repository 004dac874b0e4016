//! Canonical dataset directories and the converter that produces them.
//!
//! A dataset directory holds four UTF-8 files with 0-based indices:
//!
//! - `meta.json`: name, counts (`n`, `m`, `L`, `C`), optional source URL and checksum
//! - `edges.csv`: `src,dst`, one line per undirected edge with `src < dst`
//! - `features.csv`: `row,col,value` triplets
//! - `labels.csv`: `node,label`, labels dense in `0..C`
//!
//! `m` counts stored adjacency entries, i.e. twice the undirected edges. The
//! checksum is the SHA-256 of the three CSV files concatenated in the order
//! above, so a manifest pins the exact matrices used.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{GlrError, Result};
use crate::graph::{build_graph, SparseGraph};

pub const META_FILE: &str = "meta.json";
pub const EDGES_FILE: &str = "edges.csv";
pub const FEATURES_FILE: &str = "features.csv";
pub const LABELS_FILE: &str = "labels.csv";
pub const LABEL_MAPPING_FILE: &str = "label_mapping.csv";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub name: String,
    pub n: usize,
    /// Stored adjacency entries (each undirected edge counts twice).
    pub m: usize,
    #[serde(rename = "L")]
    pub n_features: usize,
    #[serde(rename = "C")]
    pub n_classes: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_url: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checksum: Option<String>,
}

impl DatasetManifest {
    pub fn undirected_edges(&self) -> usize {
        self.m / 2
    }
}

fn read(path: &Path) -> Result<String> {
    if !path.exists() {
        return Err(GlrError::MissingFile(path.to_path_buf()));
    }
    fs::read_to_string(path).map_err(|e| GlrError::io(path, e))
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> GlrError {
    GlrError::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

/// Data lines of a canonical CSV file, checking the header first.
fn csv_rows<'a>(
    path: &'a Path,
    text: &'a str,
    header: &'static str,
    width: usize,
) -> Result<impl Iterator<Item = (usize, Vec<&'a str>)> + 'a> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == header => {}
        Some((_, h)) => {
            return Err(parse_err(path, 1, format!("expected header `{header}`, found `{h}`")))
        }
        None => return Err(parse_err(path, 1, format!("empty file, expected header `{header}`"))),
    }
    let rows: Vec<(usize, Vec<&str>)> = lines
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| (i + 1, l.split(',').map(str::trim).collect::<Vec<_>>()))
        .collect();
    for (line, fields) in &rows {
        if fields.len() != width {
            return Err(parse_err(
                path,
                *line,
                format!("expected {width} fields, found {}", fields.len()),
            ));
        }
    }
    Ok(rows.into_iter())
}

fn field<T: std::str::FromStr>(path: &Path, line: usize, what: &str, s: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    s.parse()
        .map_err(|e| parse_err(path, line, format!("bad {what} `{s}`: {e}")))
}

fn checksum_of(edges: &str, features: &str, labels: &str) -> String {
    let mut h = Sha256::new();
    h.update(edges.as_bytes());
    h.update(features.as_bytes());
    h.update(labels.as_bytes());
    hex::encode(h.finalize())
}

fn count_check(field: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(GlrError::CountMismatch {
            field,
            expected,
            found,
        });
    }
    Ok(())
}

/// Loads and validates a canonical dataset directory.
pub fn load_dataset(dir: &Path) -> Result<(SparseGraph, DatasetManifest)> {
    let meta_path = dir.join(META_FILE);
    let manifest: DatasetManifest =
        serde_json::from_str(&read(&meta_path)?).map_err(|e| parse_err(&meta_path, e.line(), e.to_string()))?;

    let edges_path = dir.join(EDGES_FILE);
    let features_path = dir.join(FEATURES_FILE);
    let labels_path = dir.join(LABELS_FILE);
    let edges_text = read(&edges_path)?;
    let features_text = read(&features_path)?;
    let labels_text = read(&labels_path)?;

    if let Some(expected) = &manifest.checksum {
        let found = checksum_of(&edges_text, &features_text, &labels_text);
        if !expected.eq_ignore_ascii_case(&found) {
            return Err(GlrError::ChecksumMismatch {
                expected: expected.clone(),
                found,
            });
        }
    }

    let n = manifest.n;
    let mut labels: Vec<Option<i64>> = vec![None; n];
    let mut label_rows = 0;
    for (line, f) in csv_rows(&labels_path, &labels_text, "node,label", 2)? {
        let node: usize = field(&labels_path, line, "node", f[0])?;
        let label: i64 = field(&labels_path, line, "label", f[1])?;
        if node >= n {
            return Err(parse_err(&labels_path, line, format!("node {node} out of range for n={n}")));
        }
        if labels[node].replace(label).is_some() {
            return Err(parse_err(&labels_path, line, format!("node {node} labelled twice")));
        }
        label_rows += 1;
    }
    count_check("labels", n, label_rows)?;
    let labels: Vec<i64> = labels.into_iter().map(|l| l.expect("counted")).collect();

    let mut edges = Vec::new();
    for (line, f) in csv_rows(&edges_path, &edges_text, "src,dst", 2)? {
        let u: usize = field(&edges_path, line, "src", f[0])?;
        let v: usize = field(&edges_path, line, "dst", f[1])?;
        if u >= n || v >= n {
            return Err(parse_err(&edges_path, line, format!("edge ({u},{v}) out of range for n={n}")));
        }
        edges.push((u, v));
    }

    let mut triplets = Vec::new();
    for (line, f) in csv_rows(&features_path, &features_text, "row,col,value", 3)? {
        let r: usize = field(&features_path, line, "row", f[0])?;
        let c: usize = field(&features_path, line, "col", f[1])?;
        let v: f64 = field(&features_path, line, "value", f[2])?;
        if r >= n || c >= manifest.n_features {
            return Err(parse_err(
                &features_path,
                line,
                format!("entry ({r},{c}) out of range for n={n}, L={}", manifest.n_features),
            ));
        }
        if !v.is_finite() {
            return Err(parse_err(&features_path, line, "non-finite feature value"));
        }
        triplets.push((r, c, v));
    }

    let g = build_graph(&manifest.name, &edges, &triplets, &labels, n, manifest.n_features)?;
    count_check("m", manifest.m, g.adjacency().nnz())?;
    count_check("C", manifest.n_classes, g.class_count())?;
    Ok((g, manifest))
}

/// Writes `g` as a canonical directory and returns its manifest.
pub fn write_dataset(g: &SparseGraph, dir: &Path, source_url: Option<String>) -> Result<DatasetManifest> {
    fs::create_dir_all(dir).map_err(|e| GlrError::io(dir, e))?;
    let mut edges = String::from("src,dst\n");
    for (u, v) in g.edge_list() {
        writeln!(edges, "{u},{v}").expect("string write");
    }
    let mut features = String::from("row,col,value\n");
    for r in 0..g.n_nodes() {
        let (cols, vals) = g.features().row(r);
        for (c, v) in cols.iter().zip(vals) {
            writeln!(features, "{r},{c},{v}").expect("string write");
        }
    }
    let mut labels = String::from("node,label\n");
    for (u, l) in g.labels().iter().enumerate() {
        writeln!(labels, "{u},{l}").expect("string write");
    }
    let manifest = DatasetManifest {
        name: g.name().to_string(),
        n: g.n_nodes(),
        m: g.adjacency().nnz(),
        n_features: g.n_features(),
        n_classes: g.class_count(),
        source_url,
        checksum: Some(checksum_of(&edges, &features, &labels)),
    };
    let write = |name: &str, body: &str| {
        let p = dir.join(name);
        fs::write(&p, body).map_err(|e| GlrError::io(&p, e))
    };
    write(EDGES_FILE, &edges)?;
    write(FEATURES_FILE, &features)?;
    write(LABELS_FILE, &labels)?;
    write(META_FILE, &(serde_json::to_string_pretty(&manifest)? + "\n"))?;
    Ok(manifest)
}

#[derive(Clone, Debug, Default)]
pub struct ConvertOptions {
    /// Dataset name; defaults to the output directory's file name.
    pub name: Option<String>,
    /// Field separator. By default any run of whitespace or commas separates.
    pub delimiter: Option<char>,
    /// Node ids are arbitrary strings, densified in lexicographic order.
    /// Without this flag ids must be non-negative integers, densified in
    /// numeric order.
    pub string_ids: bool,
    /// Feature lines are `node v_0 v_1 ... v_{L-1}`. A trailing token that
    /// is not a number (a class column, as in Planetoid `.content` files) is
    /// ignored. Otherwise lines are `node col value` triplets.
    pub dense_features: bool,
    /// Drop edges whose endpoints have no label instead of failing.
    pub drop_dangling_edges: bool,
    pub source_url: Option<String>,
}

/// Known canonical headers, skipped when they open an input file.
const HEADERS: [&str; 3] = ["src,dst", "row,col,value", "node,label"];

fn tokenized<'a>(text: &'a str, opts: &ConvertOptions) -> Vec<(usize, Vec<&'a str>)> {
    text.lines()
        .enumerate()
        .filter(|(i, l)| {
            let t = l.trim();
            !(t.is_empty() || t.starts_with('#') || t.starts_with('%') || (*i == 0 && HEADERS.contains(&t)))
        })
        .map(|(i, l)| {
            let toks: Vec<&str> = match opts.delimiter {
                Some(d) => l.split(d).map(str::trim).collect(),
                None => l
                    .split(|c: char| c.is_whitespace() || c == ',')
                    .filter(|s| !s.is_empty())
                    .collect(),
            };
            (i + 1, toks)
        })
        .collect()
}

/// Orders raw ids: numerically when they are integers, lexicographically
/// under `string_ids`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum RawId {
    Int(u64),
    Str(String),
}

fn raw_id(path: &Path, line: usize, tok: &str, string_ids: bool) -> Result<RawId> {
    if string_ids {
        Ok(RawId::Str(tok.to_string()))
    } else {
        tok.parse().map(RawId::Int).map_err(|_| {
            parse_err(
                path,
                line,
                format!("node id `{tok}` is not a non-negative integer (use string ids)"),
            )
        })
    }
}

/// Converts raw edge, feature and label files into a canonical directory.
///
/// The node set is the set of labelled nodes. Labels are mapped to dense ids
/// in numeric order when every label is an integer, lexicographic otherwise;
/// the mapping is written to `label_mapping.csv`. Re-running on the same input
/// rewrites byte-identical files.
pub fn convert_edgelist(
    edge_file: &Path,
    feature_file: &Path,
    label_file: &Path,
    out_dir: &Path,
    opts: &ConvertOptions,
) -> Result<DatasetManifest> {
    // Labels define the node set: `node ... label`, extra middle columns ignored.
    let label_text = read(label_file)?;
    let mut raw_labels: BTreeMap<RawId, String> = BTreeMap::new();
    for (line, toks) in tokenized(&label_text, opts) {
        if toks.len() < 2 {
            return Err(parse_err(label_file, line, "expected `node label`"));
        }
        let id = raw_id(label_file, line, toks[0], opts.string_ids)?;
        let label = toks[toks.len() - 1].to_string();
        if let Some(prev) = raw_labels.insert(id, label.clone()) {
            if prev != label {
                return Err(parse_err(label_file, line, format!("node `{}` has two labels", toks[0])));
            }
        }
    }
    if raw_labels.is_empty() {
        return Err(GlrError::InvalidGraph("label file lists no nodes".into()));
    }
    let index: BTreeMap<&RawId, usize> = raw_labels.keys().enumerate().map(|(i, k)| (k, i)).collect();
    let n = index.len();

    let distinct: BTreeSet<&String> = raw_labels.values().collect();
    let numeric: Option<Vec<i64>> = distinct.iter().map(|s| s.parse().ok()).collect();
    let is_numeric = numeric.is_some();
    let canonical = |s: &str| -> String {
        if is_numeric {
            s.parse::<i64>().expect("checked numeric").to_string()
        } else {
            s.to_string()
        }
    };
    let label_order: Vec<String> = match numeric {
        Some(mut v) => {
            v.sort_unstable();
            v.dedup();
            v.into_iter().map(|x| x.to_string()).collect()
        }
        None => distinct.into_iter().cloned().collect(),
    };
    let label_id: BTreeMap<&str, i64> = label_order
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i as i64))
        .collect();
    let labels: Vec<i64> = raw_labels
        .values()
        .map(|l| label_id[canonical(l).as_str()])
        .collect();

    let edge_text = read(edge_file)?;
    let mut edges = Vec::new();
    let mut dropped = 0usize;
    for (line, toks) in tokenized(&edge_text, opts) {
        if toks.len() < 2 {
            return Err(parse_err(edge_file, line, "expected `src dst`"));
        }
        let a = raw_id(edge_file, line, toks[0], opts.string_ids)?;
        let b = raw_id(edge_file, line, toks[1], opts.string_ids)?;
        match (index.get(&a), index.get(&b)) {
            (Some(&u), Some(&v)) => edges.push((u, v)),
            _ if opts.drop_dangling_edges => dropped += 1,
            _ => {
                return Err(parse_err(
                    edge_file,
                    line,
                    format!("edge endpoint without a label: `{}` `{}`", toks[0], toks[1]),
                ))
            }
        }
    }
    if dropped > 0 {
        log::warn!("dropped {dropped} edges with unlabelled endpoints");
    }

    let feature_text = read(feature_file)?;
    let mut triplets = Vec::new();
    let mut n_features = 0usize;
    for (line, toks) in tokenized(&feature_text, opts) {
        let id = raw_id(feature_file, line, toks[0], opts.string_ids)?;
        let &row = index.get(&id).ok_or_else(|| {
            parse_err(feature_file, line, format!("dangling feature row `{}`", toks[0]))
        })?;
        if opts.dense_features {
            let mut values = &toks[1..];
            if let Some(last) = values.last() {
                if last.parse::<f64>().is_err() {
                    values = &values[..values.len() - 1];
                }
            }
            n_features = n_features.max(values.len());
            for (col, tok) in values.iter().enumerate() {
                let v: f64 = field(feature_file, line, "feature value", tok)?;
                if v != 0.0 {
                    triplets.push((row, col, v));
                }
            }
        } else {
            if toks.len() != 3 {
                return Err(parse_err(feature_file, line, "expected `node col value`"));
            }
            let col: usize = field(feature_file, line, "column", toks[1])?;
            let v: f64 = field(feature_file, line, "feature value", toks[2])?;
            n_features = n_features.max(col + 1);
            triplets.push((row, col, v));
        }
    }
    if triplets.iter().any(|t| !t.2.is_finite()) {
        return Err(GlrError::InvalidMatrix("non-finite feature value".into()));
    }

    let name = opts.name.clone().unwrap_or_else(|| {
        out_dir
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "dataset".into())
    });
    let g = build_graph(&name, &edges, &triplets, &labels, n, n_features)?;
    let manifest = write_dataset(&g, out_dir, opts.source_url.clone())?;

    let mut mapping = String::from("label,original\n");
    for (i, s) in label_order.iter().enumerate() {
        writeln!(mapping, "{i},{}", crate::evaluation::csv_field(s)).expect("string write");
    }
    let p = out_dir.join(LABEL_MAPPING_FILE);
    fs::write(&p, mapping).map_err(|e| GlrError::io(&p, e))?;
    log::info!(
        "converted {}: n={} undirected edges={} L={} C={}",
        manifest.name,
        manifest.n,
        manifest.undirected_edges(),
        manifest.n_features,
        manifest.n_classes
    );
    Ok(manifest)
}

/// Resolves a dataset argument: an existing path as given, otherwise a name
/// under `data_root` (typically from `GLR_DATA_DIR`).
pub fn resolve_dataset_dir(arg: &Path, data_root: Option<&Path>) -> PathBuf {
    if arg.exists() {
        return arg.to_path_buf();
    }
    match data_root {
        Some(root) if arg.is_relative() => root.join(arg),
        _ => arg.to_path_buf(),
    }
}
