use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::SparseGraph;

/// Summary statistics of a graph.
///
/// `m` counts stored adjacency entries, so each undirected edge contributes 2.
/// Three density conventions are reported:
/// * `density`: `m / (n(n-1))`, the fraction of ordered node pairs that are linked;
/// * `density_pairs`: `m / (n(n-1)/2)`, the stored-entry count against unordered pairs
///   (the convention used by the usual published dataset tables);
/// * `density_square`: `m / n^2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub name: String,
    pub n: usize,
    pub m: usize,
    pub undirected_edges: usize,
    pub n_features: usize,
    pub class_count: usize,
    pub density: f64,
    pub density_pairs: f64,
    pub density_square: f64,
    pub isolated_nodes: usize,
    /// degree -> number of nodes with that degree
    pub degree_counts: BTreeMap<usize, usize>,
    /// (degree d, number of nodes with degree <= d), increasing in d
    pub cumulative_degree_counts: Vec<(usize, usize)>,
    pub class_counts: Vec<usize>,
}

pub fn dataset_stats(g: &SparseGraph) -> StatsReport {
    let n = g.n_nodes();
    let m = g.adjacency().nnz();
    let ordered_pairs = (n as f64) * (n as f64 - 1.0);
    let ratio = |denominator: f64| if denominator > 0.0 { m as f64 / denominator } else { 0.0 };

    let mut degree_counts = BTreeMap::new();
    for d in g.degrees().0 {
        *degree_counts.entry(d).or_insert(0usize) += 1;
    }
    let mut running = 0;
    let cumulative_degree_counts = degree_counts
        .iter()
        .map(|(&d, &c)| {
            running += c;
            (d, running)
        })
        .collect();

    let mut class_counts = vec![0; g.class_count()];
    for &y in g.labels() {
        class_counts[y] += 1;
    }

    StatsReport {
        name: g.name().to_string(),
        n,
        m,
        undirected_edges: m / 2,
        n_features: g.n_features(),
        class_count: g.class_count(),
        density: ratio(ordered_pairs),
        density_pairs: ratio(ordered_pairs / 2.0),
        density_square: ratio((n as f64) * (n as f64)),
        isolated_nodes: degree_counts.get(&0).copied().unwrap_or(0),
        degree_counts,
        cumulative_degree_counts,
        class_counts,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_graph;

    #[test]
    fn complete_graph_has_unit_density() {
        let edges: Vec<_> = (0..4)
            .flat_map(|u| (u + 1..4).map(move |v| (u, v)))
            .collect();
        let g = build_graph("k4", &edges, &[], &[0, 0, 1, 1], 4, 1).unwrap();
        let s = dataset_stats(&g);
        assert_eq!(s.density, 1.0);
        assert_eq!(s.m, 12);
        assert_eq!(s.undirected_edges, 6);
    }

    #[test]
    fn star_degree_distribution() {
        let edges: Vec<_> = (1..6).map(|v| (0, v)).collect();
        let g = build_graph("s5", &edges, &[], &[0, 1, 1, 1, 1, 1], 6, 1).unwrap();
        let s = dataset_stats(&g);
        assert_eq!(s.degree_counts, BTreeMap::from([(1, 5), (5, 1)]));
        assert_eq!(s.cumulative_degree_counts, vec![(1, 5), (5, 6)]);
        assert_eq!(s.class_counts, vec![1, 5]);
    }

    #[test]
    fn density_conventions_on_cora_sized_graph() {
        // 2708 nodes and 5278 undirected edges, as in the usual Cora table.
        let n = 2708;
        let mut edges: Vec<(usize, usize)> = (0..n).map(|u| (u, (u + 1) % n)).collect();
        edges.extend((0..5278 - n).map(|u| (u, u + 7)));
        let g = build_graph("cora-sized", &edges, &[], &vec![0; n], n, 1).unwrap();
        let s = dataset_stats(&g);
        assert_eq!(s.m, 10556);
        assert!((s.density - 1.44e-3).abs() < 5e-6);
        assert!((s.density_pairs - 2.88e-3).abs() < 5e-6);
        assert!(s.density_square < s.density);
    }
}
