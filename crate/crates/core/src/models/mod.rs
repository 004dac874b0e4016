//! The model zoo: GLR and the non-neural baselines behind one fit/predict contract.
//!
//! All models are transductive. Fitting may look at the structure and features
//! of every node but only at the labels of the training nodes.

pub mod diffusion;
pub mod knn;
pub mod spectral;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{GlrError, Result};
use crate::graph::{CsrMatrix, SparseGraph};
use crate::optimizer::{argmax_first, fit_softmax, predict_softmax, FitConfig, SoftmaxParams};

pub use diffusion::{DiffusionConfig, DiffusionOutcome};
pub use knn::KnnIndex;
pub use spectral::spectral_embed;

pub const DEFAULT_K_NEIGHBORS: usize = 5;
pub const DEFAULT_EMBED_DIM: usize = 16;
pub const DEFAULT_DIFFUSION_ALPHA: f64 = 0.9;
pub const DEFAULT_DIFFUSION_ITERS: usize = 50;
pub const DEFAULT_DIFFUSION_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Glr,
    LrA,
    LrX,
    DiffusionA,
    DiffusionX,
    KnnSpectralA,
    KnnSpectralX,
}

impl ModelKind {
    pub const ALL: [ModelKind; 7] = [
        ModelKind::Glr,
        ModelKind::LrA,
        ModelKind::LrX,
        ModelKind::DiffusionA,
        ModelKind::DiffusionX,
        ModelKind::KnnSpectralA,
        ModelKind::KnnSpectralX,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Glr => "glr",
            ModelKind::LrA => "lr_a",
            ModelKind::LrX => "lr_x",
            ModelKind::DiffusionA => "diffusion_a",
            ModelKind::DiffusionX => "diffusion_x",
            ModelKind::KnnSpectralA => "knn_spectral_a",
            ModelKind::KnnSpectralX => "knn_spectral_x",
        }
    }

    fn is_softmax(self) -> bool {
        matches!(self, ModelKind::Glr | ModelKind::LrA | ModelKind::LrX)
    }

    fn is_diffusion(self) -> bool {
        matches!(self, ModelKind::DiffusionA | ModelKind::DiffusionX)
    }

    fn is_knn(self) -> bool {
        matches!(self, ModelKind::KnnSpectralA | ModelKind::KnnSpectralX)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = GlrError;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        ModelKind::ALL
            .into_iter()
            .find(|k| k.as_str() == norm)
            .ok_or_else(|| GlrError::UnknownModel(s.to_string()))
    }
}

/// Optional overrides; anything left unset takes the documented default.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Hyperparams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_neighbors: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embed_dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diffusion_alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diffusion_iters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diffusion_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l2_penalty: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grad_tol: Option<f64>,
    /// Scale every design row to unit L2 norm before fitting.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalize_rows: Option<bool>,
}

/// Declarative model configuration, `{"kind":"glr","hyperparams":{...}}` in JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModelSpec")]
pub struct ModelSpec {
    pub kind: ModelKind,
    #[serde(default)]
    pub hyperparams: Hyperparams,
}

#[derive(Deserialize)]
struct RawModelSpec {
    kind: ModelKind,
    #[serde(default)]
    hyperparams: Hyperparams,
}

impl TryFrom<RawModelSpec> for ModelSpec {
    type Error = GlrError;

    fn try_from(raw: RawModelSpec) -> Result<Self> {
        ModelSpec::new(raw.kind, raw.hyperparams)
    }
}

impl ModelSpec {
    /// Builds a spec, rejecting hyperparameters that do not apply to `kind`
    /// or are out of range.
    pub fn new(kind: ModelKind, hyperparams: Hyperparams) -> Result<Self> {
        let h = &hyperparams;
        let reject = |name: &str| {
            Err(GlrError::InvalidArgument(format!(
                "hyperparameter `{name}` does not apply to model `{kind}`"
            )))
        };
        if !kind.is_knn() {
            if h.k_neighbors.is_some() {
                return reject("k_neighbors");
            }
            if h.embed_dim.is_some() {
                return reject("embed_dim");
            }
        }
        if !kind.is_diffusion() {
            if h.diffusion_alpha.is_some() {
                return reject("diffusion_alpha");
            }
            if h.diffusion_iters.is_some() {
                return reject("diffusion_iters");
            }
            if h.diffusion_tol.is_some() {
                return reject("diffusion_tol");
            }
        }
        if !kind.is_softmax() {
            if h.l2_penalty.is_some() {
                return reject("l2_penalty");
            }
            if h.max_iter.is_some() {
                return reject("max_iter");
            }
            if h.grad_tol.is_some() {
                return reject("grad_tol");
            }
            if h.normalize_rows.is_some() {
                return reject("normalize_rows");
            }
        }
        let spec = Self { kind, hyperparams };
        spec.validate_ranges()?;
        Ok(spec)
    }

    pub fn of(kind: ModelKind) -> Self {
        Self {
            kind,
            hyperparams: Hyperparams::default(),
        }
    }

    fn validate_ranges(&self) -> Result<()> {
        let bad = |msg: String| Err(GlrError::InvalidArgument(msg));
        if self.k_neighbors() == 0 {
            return bad("k_neighbors must be at least 1".into());
        }
        if self.embed_dim() == 0 {
            return bad("embed_dim must be at least 1".into());
        }
        let a = self.diffusion_alpha();
        if !(a > 0.0 && a < 1.0) {
            return bad(format!("diffusion_alpha must lie in (0, 1), got {a}"));
        }
        if !(self.diffusion_tol() >= 0.0) {
            return bad("diffusion_tol must be non-negative".into());
        }
        if self.kind.is_softmax() {
            self.fit_config(0).validate()?;
        }
        Ok(())
    }

    /// Short name used in tables and record keys.
    pub fn label(&self) -> &'static str {
        self.kind.as_str()
    }

    pub fn k_neighbors(&self) -> usize {
        self.hyperparams.k_neighbors.unwrap_or(DEFAULT_K_NEIGHBORS)
    }

    pub fn embed_dim(&self) -> usize {
        self.hyperparams.embed_dim.unwrap_or(DEFAULT_EMBED_DIM)
    }

    pub fn diffusion_alpha(&self) -> f64 {
        self.hyperparams
            .diffusion_alpha
            .unwrap_or(DEFAULT_DIFFUSION_ALPHA)
    }

    pub fn diffusion_config(&self) -> DiffusionConfig {
        DiffusionConfig {
            alpha: self.diffusion_alpha(),
            max_iter: self
                .hyperparams
                .diffusion_iters
                .unwrap_or(DEFAULT_DIFFUSION_ITERS),
            tol: self.diffusion_tol(),
        }
    }

    fn diffusion_tol(&self) -> f64 {
        self.hyperparams.diffusion_tol.unwrap_or(DEFAULT_DIFFUSION_TOL)
    }

    pub fn fit_config(&self, seed: u64) -> FitConfig {
        let d = FitConfig::default();
        FitConfig {
            l2_penalty: self.hyperparams.l2_penalty.unwrap_or(d.l2_penalty),
            max_iter: self.hyperparams.max_iter.unwrap_or(d.max_iter),
            grad_tol: self.hyperparams.grad_tol.unwrap_or(d.grad_tol),
            seed,
        }
    }

    fn normalize_rows(&self) -> bool {
        self.hyperparams.normalize_rows.unwrap_or(false)
    }
}

impl FromStr for ModelSpec {
    type Err = GlrError;

    /// Accepts a bare kind name (`glr`) or the JSON form.
    fn from_str(s: &str) -> Result<Self> {
        if s.trim_start().starts_with('{') {
            Ok(serde_json::from_str(s)?)
        } else {
            Ok(ModelSpec::of(s.parse()?))
        }
    }
}

/// Which blocks of the node representation feed the softmax model.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DesignLayout {
    pub use_adjacency: bool,
    pub use_features: bool,
    pub normalize_rows: bool,
}

impl DesignLayout {
    fn for_kind(kind: ModelKind, normalize_rows: bool) -> Self {
        let (use_adjacency, use_features) = match kind {
            ModelKind::Glr => (true, true),
            ModelKind::LrA => (true, false),
            ModelKind::LrX => (false, true),
            _ => unreachable!("not a softmax model"),
        };
        Self {
            use_adjacency,
            use_features,
            normalize_rows,
        }
    }

    /// Design rows for `nodes`: `CONCAT(A_u, X_u)` for GLR, `A_u` or `X_u` for
    /// the single-source baselines.
    pub fn design(&self, g: &SparseGraph, nodes: &[usize]) -> Result<CsrMatrix> {
        let full = match (self.use_adjacency, self.use_features) {
            (true, true) => CsrMatrix::hconcat(g.adjacency(), g.features())?,
            (true, false) => g.adjacency().clone(),
            (false, true) => g.features().clone(),
            (false, false) => unreachable!(),
        };
        let rows = full.row_submatrix(nodes)?;
        Ok(if self.normalize_rows {
            rows.l2_row_normalized()
        } else {
            rows
        })
    }

    pub fn width(&self, g: &SparseGraph) -> usize {
        let a = if self.use_adjacency { g.n_nodes() } else { 0 };
        let x = if self.use_features { g.n_features() } else { 0 };
        a + x
    }
}

#[derive(Clone, Debug)]
pub enum ModelState {
    Softmax {
        params: SoftmaxParams,
        layout: DesignLayout,
    },
    Diffusion {
        scores: Array2<f64>,
    },
    Knn {
        index: KnnIndex,
    },
}

#[derive(Clone, Debug)]
pub struct TrainedModel {
    pub spec: ModelSpec,
    pub state: ModelState,
    pub fit_seconds: f64,
    n_nodes: usize,
    n_features: usize,
    n_classes: usize,
}

fn check_nodes(nodes: &[usize], n: usize, what: &str, require_unique: bool) -> Result<()> {
    if let Some(&bad) = nodes.iter().find(|&&u| u >= n) {
        return Err(GlrError::IndexOutOfRange {
            what: "node",
            index: bad,
            bound: n,
        });
    }
    if require_unique {
        let mut seen = vec![false; n];
        for &u in nodes {
            if std::mem::replace(&mut seen[u], true) {
                return Err(GlrError::InvalidArgument(format!(
                    "node {u} appears twice in the {what} set"
                )));
            }
        }
    }
    Ok(())
}

/// Fits `spec` on `g` using the labels of `train_nodes` only.
pub fn fit(
    spec: &ModelSpec,
    g: &SparseGraph,
    train_nodes: &[usize],
    seed: u64,
) -> Result<TrainedModel> {
    if train_nodes.is_empty() {
        return Err(GlrError::InvalidArgument("empty training set".into()));
    }
    check_nodes(train_nodes, g.n_nodes(), "training", true)?;
    let start = Instant::now();
    let labels = g.labels();

    let state = match spec.kind {
        ModelKind::Glr | ModelKind::LrA | ModelKind::LrX => {
            let layout = DesignLayout::for_kind(spec.kind, spec.normalize_rows());
            let design = layout.design(g, train_nodes)?;
            let targets: Vec<usize> = train_nodes.iter().map(|&u| labels[u]).collect();
            let (params, _) =
                fit_softmax(&design, &targets, g.class_count(), &spec.fit_config(seed))?;
            ModelState::Softmax { params, layout }
        }
        ModelKind::DiffusionA | ModelKind::DiffusionX => {
            let seeds =
                diffusion::seed_matrix(g.n_nodes(), g.class_count(), train_nodes, labels);
            let cfg = spec.diffusion_config();
            let outcome = if spec.kind == ModelKind::DiffusionA {
                let prop = diffusion::AdjacencyPropagator::new(g.adjacency());
                diffusion::diffuse(&prop, &seeds, train_nodes, &cfg)?
            } else {
                let prop = diffusion::FeatureKernelPropagator::new(g.features())?;
                diffusion::diffuse(&prop, &seeds, train_nodes, &cfg)?
            };
            ModelState::Diffusion {
                scores: outcome.scores,
            }
        }
        ModelKind::KnnSpectralA | ModelKind::KnnSpectralX => {
            let source = if spec.kind == ModelKind::KnnSpectralA {
                g.adjacency()
            } else {
                g.features()
            };
            // A graph with n nodes has at most n - 1 informative directions here.
            let dim = spec.embed_dim().min(g.n_nodes().saturating_sub(1)).max(1);
            if dim < spec.embed_dim() {
                log::debug!("embedding dimension clamped to {dim} for {} nodes", g.n_nodes());
            }
            let embedding = spectral_embed(source, dim, seed)?;
            ModelState::Knn {
                index: KnnIndex::new(embedding, train_nodes, labels, spec.k_neighbors()),
            }
        }
    };

    Ok(TrainedModel {
        spec: spec.clone(),
        state,
        fit_seconds: start.elapsed().as_secs_f64(),
        n_nodes: g.n_nodes(),
        n_features: g.n_features(),
        n_classes: g.class_count(),
    })
}

/// Predicted classes for `test_nodes`.
pub fn predict(model: &TrainedModel, g: &SparseGraph, test_nodes: &[usize]) -> Result<Vec<usize>> {
    if g.n_nodes() != model.n_nodes
        || g.n_features() != model.n_features
        || g.class_count() != model.n_classes
    {
        return Err(GlrError::DimensionMismatch(format!(
            "model was fit on a graph with {} nodes, {} features, {} classes; got {}, {}, {}",
            model.n_nodes,
            model.n_features,
            model.n_classes,
            g.n_nodes(),
            g.n_features(),
            g.class_count()
        )));
    }
    check_nodes(test_nodes, g.n_nodes(), "test", false)?;
    match &model.state {
        ModelState::Softmax { params, layout } => {
            let design = layout.design(g, test_nodes)?;
            Ok(predict_softmax(params, &design)?.0)
        }
        ModelState::Diffusion { scores } => Ok(test_nodes
            .iter()
            .map(|&u| argmax_first(scores.row(u).as_slice().expect("row-major")))
            .collect()),
        ModelState::Knn { index } => Ok(test_nodes
            .iter()
            .map(|&u| index.classify(index.embedding().row(u), model.n_classes))
            .collect()),
    }
}

/// Fraction of `nodes` whose prediction equals the true label.
pub fn accuracy(predicted: &[usize], g: &SparseGraph, nodes: &[usize]) -> f64 {
    if nodes.is_empty() {
        return f64::NAN;
    }
    let hits = predicted
        .iter()
        .zip(nodes)
        .filter(|(&p, &u)| p == g.labels()[u])
        .count();
    hits as f64 / nodes.len() as f64
}
