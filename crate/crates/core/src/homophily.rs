//! Label and feature homophily, per node and per graph.
//!
//! Both node scores average over the neighbourhood and divide by the degree,
//! so isolated nodes have no defined value. They are reported as `None` and
//! left out of the graph-level mean.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{GlrError, Result};
use crate::evaluation::{rank_cells, RunRecord};
use crate::graph::{CsrMatrix, SparseGraph};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomophilyProfile {
    pub dataset: String,
    pub per_node_label: Vec<Option<f64>>,
    pub per_node_feature: Vec<Option<f64>>,
    pub graph_label: f64,
    pub graph_feature: f64,
    pub excluded_isolated: usize,
}

impl HomophilyProfile {
    pub fn compute(g: &SparseGraph) -> Self {
        let (per_node_label, graph_label) = label_homophily(g);
        let (per_node_feature, graph_feature) = feature_homophily(g);
        let excluded_isolated = per_node_label.iter().filter(|v| v.is_none()).count();
        Self {
            dataset: g.name().to_string(),
            per_node_label,
            per_node_feature,
            graph_label,
            graph_feature,
            excluded_isolated,
        }
    }
}

fn mean_defined(values: &[Option<f64>]) -> f64 {
    let (sum, count) = values
        .iter()
        .flatten()
        .fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    if count == 0 {
        f64::NAN
    } else {
        sum / count as f64
    }
}

/// Fraction of each node's neighbours sharing its label, and the mean over
/// non-isolated nodes (NaN when every node is isolated).
pub fn label_homophily(g: &SparseGraph) -> (Vec<Option<f64>>, f64) {
    let y = g.labels();
    let per_node: Vec<Option<f64>> = (0..g.n_nodes())
        .map(|u| {
            let nbrs = g.neighbors(u);
            if nbrs.is_empty() {
                return None;
            }
            let same = nbrs.iter().filter(|&&v| y[v] == y[u]).count();
            Some(same as f64 / nbrs.len() as f64)
        })
        .collect();
    let graph = mean_defined(&per_node);
    (per_node, graph)
}

/// Cosine similarity of two sparse rows with sorted column indices.
/// Zero when either row is the zero vector.
pub fn sparse_cosine(m: &CsrMatrix, u: usize, v: usize, norms: &[f64]) -> f64 {
    if norms[u] == 0.0 || norms[v] == 0.0 {
        return 0.0;
    }
    let (cu, vu) = m.row(u);
    let (cv, vv) = m.row(v);
    let (mut i, mut j, mut dot) = (0, 0, 0.0);
    while i < cu.len() && j < cv.len() {
        match cu[i].cmp(&cv[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                dot += vu[i] * vv[j];
                i += 1;
                j += 1;
            }
        }
    }
    dot / (norms[u] * norms[v])
}

/// Mean cosine similarity between each node's features and its neighbours'.
pub fn feature_homophily(g: &SparseGraph) -> (Vec<Option<f64>>, f64) {
    let x = g.features();
    let norms = x.row_norms();
    let per_node: Vec<Option<f64>> = (0..g.n_nodes())
        .map(|u| {
            let nbrs = g.neighbors(u);
            if nbrs.is_empty() {
                return None;
            }
            let total: f64 = nbrs.iter().map(|&v| sparse_cosine(x, u, v, &norms)).sum();
            Some(total / nbrs.len() as f64)
        })
        .collect();
    let graph = mean_defined(&per_node);
    (per_node, graph)
}

/// Median of a non-empty list (mean of the two middle values for even length).
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 0 {
        0.5 * (v[mid - 1] + v[mid])
    } else {
        v[mid]
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankingTable {
    /// Median graph feature homophily over all datasets with a profile.
    pub threshold: f64,
    /// Datasets with graph feature homophily at or above the threshold.
    pub qualifying: Vec<String>,
    /// (model label, average rank over qualifying datasets), best first.
    pub average_ranks: Vec<(String, f64)>,
}

/// Ranks models over the datasets whose feature homophily is at least the
/// median across all profiled datasets.
pub fn high_feature_homophily_ranking(
    records: &[RunRecord],
    profiles: &BTreeMap<String, HomophilyProfile>,
) -> Result<RankingTable> {
    let values: Vec<f64> = profiles.values().map(|p| p.graph_feature).collect();
    let threshold = median(&values).ok_or(GlrError::NoQualifyingDatasets)?;
    let qualifying: Vec<String> = profiles
        .iter()
        .filter(|(_, p)| p.graph_feature >= threshold)
        .map(|(name, _)| name.clone())
        .collect();

    let per_dataset = rank_cells(records);
    let mut totals: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    let mut any = false;
    for dataset in &qualifying {
        if let Some(ranks) = per_dataset.get(dataset) {
            any = true;
            for (model, rank) in ranks {
                let e = totals.entry(model.clone()).or_insert((0.0, 0));
                e.0 += rank;
                e.1 += 1;
            }
        }
    }
    if !any {
        return Err(GlrError::NoQualifyingDatasets);
    }
    let mut average_ranks: Vec<(String, f64)> = totals
        .into_iter()
        .map(|(m, (s, c))| (m, s / c as f64))
        .collect();
    average_ranks.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    Ok(RankingTable {
        threshold,
        qualifying,
        average_ranks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_graph;

    #[test]
    fn triangle_same_label_is_fully_homophilous() {
        let g = build_graph("t", &[(0, 1), (1, 2), (2, 0)], &[], &[4, 4, 4], 3, 1).unwrap();
        let (nodes, graph) = label_homophily(&g);
        assert_eq!(nodes, vec![Some(1.0); 3]);
        assert_eq!(graph, 1.0);
    }

    #[test]
    fn heterophilous_edge_scores_zero() {
        let g = build_graph("e", &[(0, 1)], &[], &[0, 1], 2, 1).unwrap();
        assert_eq!(label_homophily(&g).0, vec![Some(0.0), Some(0.0)]);
    }

    #[test]
    fn identical_features_give_one_orthogonal_give_zero() {
        let same = build_graph("s", &[(0, 1)], &[(0, 0, 2.0), (1, 0, 5.0)], &[0, 1], 2, 2).unwrap();
        assert_eq!(feature_homophily(&same).0, vec![Some(1.0), Some(1.0)]);
        let orth = build_graph("o", &[(0, 1)], &[(0, 0, 1.0), (1, 1, 1.0)], &[0, 1], 2, 2).unwrap();
        assert_eq!(feature_homophily(&orth).0, vec![Some(0.0), Some(0.0)]);
    }

    #[test]
    fn zero_feature_vector_has_zero_similarity() {
        let g = build_graph("z", &[(0, 1)], &[(0, 0, 1.0)], &[0, 1], 2, 1).unwrap();
        assert_eq!(feature_homophily(&g).0, vec![Some(0.0), Some(0.0)]);
    }

    #[test]
    fn isolated_nodes_are_excluded() {
        let g = build_graph("i", &[(0, 1)], &[], &[0, 0, 1], 3, 1).unwrap();
        let p = HomophilyProfile::compute(&g);
        assert_eq!(p.per_node_label[2], None);
        assert_eq!(p.excluded_isolated, 1);
        assert_eq!(p.graph_label, 1.0);
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&[]), None);
    }
}
