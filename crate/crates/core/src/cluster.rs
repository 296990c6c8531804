//! Collective-motion clusters: connected components of the coherence
//! matrix after thresholding.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::ncl::CoherenceMatrix;

/// Disjoint-set forest with path compression and union by size.
#[derive(Debug, Clone)]
struct DisjointSet {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[x] != root {
            let next = self.parent[x];
            self.parent[x] = root;
            x = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
    }
}

/// Cluster id per node. Ids are dense and numbered in order of each
/// cluster's lowest node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterLabeling {
    pub labels: Vec<usize>,
    pub n_clusters: usize,
    pub sizes: Vec<usize>,
}

impl ClusterLabeling {
    /// Relabels arbitrary group keys densely by first appearance.
    pub fn from_keys(keys: &[usize]) -> Self {
        let mut dense = BTreeMap::new();
        let mut labels = Vec::with_capacity(keys.len());
        let mut sizes = Vec::new();
        for &k in keys {
            let next = dense.len();
            let id = *dense.entry(k).or_insert(next);
            if id == sizes.len() {
                sizes.push(0);
            }
            sizes[id] += 1;
            labels.push(id);
        }
        Self {
            labels,
            n_clusters: sizes.len(),
            sizes,
        }
    }
}

/// Links `i` and `j` when their mean mutual coherence exceeds `c_thre`
/// and returns the connected components.
pub fn threshold_cluster(z: &CoherenceMatrix, c_thre: f64) -> Result<ClusterLabeling> {
    if c_thre.is_nan() {
        return Err(Error::param("clustering threshold is NaN"));
    }
    let n = z.n();
    let mut sets = DisjointSet::new(n);
    for i in 0..n {
        for j in (i + 1)..n {
            if (z.get(i, j) + z.get(j, i)) / 2.0 > c_thre {
                sets.union(i, j);
            }
        }
    }
    let roots: Vec<usize> = (0..n).map(|i| sets.find(i)).collect();
    Ok(ClusterLabeling::from_keys(&roots))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterStats {
    pub n_clusters: usize,
    /// Clusters with at least two members.
    pub n_nontrivial: usize,
    /// Cluster size -> number of clusters of that size.
    pub size_histogram: BTreeMap<usize, usize>,
}

pub fn cluster_stats(labeling: &ClusterLabeling) -> ClusterStats {
    let mut size_histogram = BTreeMap::new();
    for &s in &labeling.sizes {
        *size_histogram.entry(s).or_insert(0) += 1;
    }
    ClusterStats {
        n_clusters: labeling.n_clusters,
        n_nontrivial: labeling.sizes.iter().filter(|&&s| s >= 2).count(),
        size_histogram,
    }
}

/// Writes `node,cluster` rows.
pub fn write_labels_csv(labeling: &ClusterLabeling, path: &Path) -> Result<()> {
    let mut body = String::from("node,cluster\n");
    for (node, c) in labeling.labels.iter().enumerate() {
        body.push_str(&format!("{node},{c}\n"));
    }
    crate::ncl::write_file(path, &body)
}
