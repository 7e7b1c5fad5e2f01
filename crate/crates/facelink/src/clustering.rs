//! Per-profile agglomerative single-linkage clustering with a flat distance
//! cut.
//!
//! A single-linkage flat cut at threshold t is exactly the set of connected
//! components of the graph whose edges join records at distance <= t, so the
//! implementation is union-find over all pairs rather than a dendrogram.

use crate::embedding::{l2_distance, FaceRecord};
use crate::error::Result;

/// A partition of record indices, ordered by (size descending, smallest
/// member index ascending). Members within a cluster are ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSet {
    pub clusters: Vec<Vec<usize>>,
    pub threshold: f64,
}

impl ClusterSet {
    pub fn count(&self) -> usize {
        self.clusters.len()
    }
}

struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, x: usize, y: usize) {
        let (mut a, mut b) = (self.find(x), self.find(y));
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

/// Clusters records so that two records share a cluster iff they are
/// connected by a chain of pairwise distances <= threshold (ties merge).
pub fn cluster_single_linkage(records: &[FaceRecord], threshold: f64) -> Result<ClusterSet> {
    let n = records.len();
    let mut uf = UnionFind::new(n);
    for i in 0..n {
        for j in (i + 1)..n {
            if l2_distance(&records[i].embedding, &records[j].embedding)? <= threshold {
                uf.union(i, j);
            }
        }
    }
    let mut by_root: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let root = uf.find(i);
        by_root.entry(root).or_default().push(i);
    }
    let mut clusters: Vec<Vec<usize>> = by_root.into_values().collect();
    // members are ascending already; order clusters by size desc, then by
    // smallest member index for deterministic tie-breaks
    clusters.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
    Ok(ClusterSet {
        clusters,
        threshold,
    })
}
