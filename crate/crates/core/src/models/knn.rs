//! Exact k-nearest-neighbour majority vote in an embedding space.

use ndarray::{Array2, ArrayView1};

/// Training rows of an embedding plus their labels.
#[derive(Clone, Debug)]
pub struct KnnIndex {
    embedding: Array2<f64>,
    train_nodes: Vec<usize>,
    train_labels: Vec<usize>,
    k: usize,
}

impl KnnIndex {
    /// `embedding` holds one row per node; only `train_nodes` are searchable.
    pub fn new(embedding: Array2<f64>, train_nodes: &[usize], labels: &[usize], k: usize) -> Self {
        Self {
            train_labels: train_nodes.iter().map(|&u| labels[u]).collect(),
            train_nodes: train_nodes.to_vec(),
            embedding,
            k,
        }
    }

    pub fn embedding(&self) -> &Array2<f64> {
        &self.embedding
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Indices into the training set of the `k` nearest rows to `query`.
    /// Distance ties go to the smaller node id.
    pub fn neighbours(&self, query: ArrayView1<f64>) -> Vec<usize> {
        let mut dist: Vec<(f64, usize, usize)> = self
            .train_nodes
            .iter()
            .enumerate()
            .map(|(i, &u)| {
                let row = self.embedding.row(u);
                let d: f64 = row
                    .iter()
                    .zip(query.iter())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                (d, u, i)
            })
            .collect();
        let k = self.k.min(dist.len());
        let cmp = |a: &(f64, usize, usize), b: &(f64, usize, usize)| {
            a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
        };
        if k < dist.len() {
            dist.select_nth_unstable_by(k, cmp);
            dist.truncate(k);
        }
        dist.sort_by(cmp);
        dist.into_iter().map(|t| t.2).collect()
    }

    /// Majority class among the neighbours; vote ties go to the smaller class.
    pub fn classify(&self, query: ArrayView1<f64>, n_classes: usize) -> usize {
        let mut votes = vec![0usize; n_classes];
        for i in self.neighbours(query) {
            votes[self.train_labels[i]] += 1;
        }
        let mut best = 0;
        for (c, &v) in votes.iter().enumerate() {
            if v > votes[best] {
                best = c;
            }
        }
        best
    }
}
