//! Attributed graph data model.

mod csr;
mod stats;

pub use csr::CsrMatrix;
pub use stats::{dataset_stats, StatsReport};

use serde::{Deserialize, Serialize};

use crate::error::{GlrError, Result};

/// Immutable attributed graph: symmetric binary adjacency without self-loops,
/// a sparse `n x L` feature matrix and one dense class id per node.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseGraph {
    name: String,
    adjacency: CsrMatrix,
    features: CsrMatrix,
    labels: Vec<usize>,
    class_count: usize,
    /// Original label value of each dense class id.
    label_mapping: Vec<i64>,
}

/// Per-node degree, `degrees[u]` = number of stored entries in adjacency row `u`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeVector(pub Vec<usize>);

impl SparseGraph {
    /// Assembles a graph from already-canonical parts and checks every invariant.
    pub fn from_parts(
        name: impl Into<String>,
        adjacency: CsrMatrix,
        features: CsrMatrix,
        labels: Vec<usize>,
        class_count: usize,
    ) -> Result<Self> {
        let n = adjacency.n_rows();
        if n == 0 {
            return Err(GlrError::InvalidGraph("graph has no nodes".into()));
        }
        if adjacency.n_cols() != n {
            return Err(GlrError::InvalidGraph(format!(
                "adjacency is {}x{}, expected square",
                n,
                adjacency.n_cols()
            )));
        }
        if features.n_rows() != n {
            return Err(GlrError::InvalidGraph(format!(
                "features have {} rows for {} nodes",
                features.n_rows(),
                n
            )));
        }
        if labels.len() != n {
            return Err(GlrError::InvalidGraph(format!(
                "{} labels for {} nodes",
                labels.len(),
                n
            )));
        }
        let mut seen = vec![false; class_count];
        for &y in &labels {
            if y >= class_count {
                return Err(GlrError::IndexOutOfRange {
                    what: "class",
                    index: y,
                    bound: class_count,
                });
            }
            seen[y] = true;
        }
        if let Some(c) = seen.iter().position(|s| !s) {
            return Err(GlrError::InvalidGraph(format!("class {c} has no members")));
        }
        for u in 0..n {
            let (cols, vals) = adjacency.row(u);
            for (&v, &w) in cols.iter().zip(vals) {
                if v == u {
                    return Err(GlrError::InvalidGraph(format!("self-loop on node {u}")));
                }
                if w != 1.0 {
                    return Err(GlrError::InvalidGraph(format!(
                        "adjacency entry ({u},{v}) is {w}, expected 1"
                    )));
                }
                if adjacency.row(v).0.binary_search(&u).is_err() {
                    return Err(GlrError::InvalidGraph(format!(
                        "edge ({u},{v}) has no reverse entry"
                    )));
                }
            }
        }
        Ok(Self {
            name: name.into(),
            adjacency,
            features,
            labels,
            class_count,
            label_mapping: (0..class_count as i64).collect(),
        })
    }

    /// Replaces the recorded original label values (one per dense class id).
    pub fn with_label_mapping(mut self, mapping: Vec<i64>) -> Result<Self> {
        if mapping.len() != self.class_count {
            return Err(GlrError::InvalidGraph(format!(
                "label mapping has {} entries for {} classes",
                mapping.len(),
                self.class_count
            )));
        }
        self.label_mapping = mapping;
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_nodes(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.features.n_cols()
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn adjacency(&self) -> &CsrMatrix {
        &self.adjacency
    }

    pub fn features(&self) -> &CsrMatrix {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label_mapping(&self) -> &[i64] {
        &self.label_mapping
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adjacency.row_nnz(u)
    }

    pub fn degrees(&self) -> DegreeVector {
        DegreeVector((0..self.n_nodes()).map(|u| self.degree(u)).collect())
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        self.adjacency.row(u).0
    }

    /// Each undirected edge once, as `(u, v)` with `u < v`, in row order.
    pub fn edge_list(&self) -> Vec<(usize, usize)> {
        (0..self.n_nodes())
            .flat_map(|u| {
                self.neighbors(u)
                    .iter()
                    .filter(move |&&v| v > u)
                    .map(move |&v| (u, v))
            })
            .collect()
    }

    /// Same graph with a new label vector (must keep the class count valid).
    pub fn with_labels(&self, labels: Vec<usize>) -> Result<Self> {
        SparseGraph::from_parts(
            self.name.clone(),
            self.adjacency.clone(),
            self.features.clone(),
            labels,
            self.class_count,
        )
    }

    /// Same graph with a replacement feature matrix.
    pub fn with_features(&self, features: CsrMatrix) -> Result<Self> {
        SparseGraph::from_parts(
            self.name.clone(),
            self.adjacency.clone(),
            features,
            self.labels.clone(),
            self.class_count,
        )
        .and_then(|g| g.with_label_mapping(self.label_mapping.clone()))
    }
}

/// Builds a canonical graph from raw edges, feature triplets and labels.
///
/// Edges are symmetrized, self-loops dropped and duplicates collapsed; every
/// adjacency value is 1. Raw labels are remapped to `0..C` in increasing order
/// of their original value, and that mapping is kept on the graph.
pub fn build_graph(
    name: &str,
    edges: &[(usize, usize)],
    features: &[(usize, usize, f64)],
    labels: &[i64],
    n: usize,
    n_features: usize,
) -> Result<SparseGraph> {
    if n == 0 {
        return Err(GlrError::InvalidGraph("graph has no nodes".into()));
    }
    if labels.len() != n {
        return Err(GlrError::InvalidGraph(format!(
            "{} labels for {} nodes",
            labels.len(),
            n
        )));
    }
    let mut pairs = Vec::with_capacity(edges.len() * 2);
    for &(u, v) in edges {
        for x in [u, v] {
            if x >= n {
                return Err(GlrError::IndexOutOfRange {
                    what: "node",
                    index: x,
                    bound: n,
                });
            }
        }
        if u != v {
            pairs.push((u, v));
            pairs.push((v, u));
        }
    }
    pairs.sort_unstable();
    pairs.dedup();
    let mut row_ptr = vec![0usize; n + 1];
    for &(u, _) in &pairs {
        row_ptr[u + 1] += 1;
    }
    for u in 0..n {
        row_ptr[u + 1] += row_ptr[u];
    }
    let col_idx: Vec<usize> = pairs.iter().map(|&(_, v)| v).collect();
    let values = vec![1.0; col_idx.len()];
    let adjacency = CsrMatrix::new(n, n, row_ptr, col_idx, values)?;

    let features = CsrMatrix::from_triplets(n, n_features, features)?;

    let mut distinct: Vec<i64> = labels.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    let dense: Vec<usize> = labels
        .iter()
        .map(|l| distinct.binary_search(l).expect("label present"))
        .collect();
    let class_count = distinct.len();
    SparseGraph::from_parts(name, adjacency, features, dense, class_count)?
        .with_label_mapping(distinct)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_edge_is_symmetrized() {
        let g = build_graph("e", &[(0, 1)], &[], &[0, 1], 2, 1).unwrap();
        assert_eq!(g.neighbors(0), &[1]);
        assert_eq!(g.neighbors(1), &[0]);
        assert_eq!(g.degrees(), DegreeVector(vec![1, 1]));
    }

    #[test]
    fn self_loops_and_duplicates_are_removed() {
        let g = build_graph("e", &[(0, 0), (0, 1), (1, 0)], &[], &[0, 1], 2, 1).unwrap();
        assert_eq!(g.adjacency().nnz(), 2);
    }

    #[test]
    fn labels_are_remapped_densely() {
        let g = build_graph("e", &[], &[], &[7, -3, 7], 3, 1).unwrap();
        assert_eq!(g.labels(), &[1, 0, 1]);
        assert_eq!(g.class_count(), 2);
        assert_eq!(g.label_mapping(), &[-3, 7]);
    }

    #[test]
    fn rejects_out_of_range_and_empty() {
        assert!(matches!(
            build_graph("e", &[(0, 5)], &[], &[0, 0], 2, 1),
            Err(GlrError::IndexOutOfRange { .. })
        ));
        assert!(build_graph("e", &[], &[], &[], 0, 1).is_err());
        assert!(build_graph("e", &[], &[(0, 3, 1.0)], &[0], 1, 2).is_err());
    }

    #[test]
    fn from_parts_rejects_asymmetric() {
        let adj = CsrMatrix::from_triplets(2, 2, &[(0, 1, 1.0)]).unwrap();
        let err = SparseGraph::from_parts("x", adj, CsrMatrix::zeros(2, 1), vec![0, 1], 2);
        assert!(matches!(err, Err(GlrError::InvalidGraph(_))));
    }

    #[test]
    fn from_parts_rejects_empty_class() {
        let err = SparseGraph::from_parts(
            "x",
            CsrMatrix::zeros(2, 2),
            CsrMatrix::zeros(2, 1),
            vec![0, 0],
            2,
        );
        assert!(err.is_err());
    }

    #[test]
    fn rebuild_from_edge_dump_is_identical() {
        let g = build_graph(
            "e",
            &[(3, 1), (1, 3), (2, 0), (0, 3), (4, 4)],
            &[(0, 0, 1.0)],
            &[0, 1, 0, 1, 0],
            5,
            2,
        )
        .unwrap();
        let again = build_graph("e", &g.edge_list(), &[(0, 0, 1.0)], &[0, 1, 0, 1, 0], 5, 2).unwrap();
        assert_eq!(g, again);
    }
}
