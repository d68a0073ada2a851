//! Clustering algorithms and partition comparison.
//!
//! Hierarchical clustering and affinity propagation read a
//! [`DistanceMatrix`](crate::DistanceMatrix) directly; k-means++ needs
//! coordinates and works on an [`Embedding`](crate::Embedding).

mod affinity;
mod ari;
mod hierarchical;
mod kmeans;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use affinity::{affinity_propagation, AffinityOptions, AffinityOutcome, Preference};
pub use ari::ari;
pub use hierarchical::{hc_cluster, Linkage};
pub use kmeans::{kmeanspp, KMeansOutcome, MAX_LLOYD_ITERATIONS};

/// Cluster labels `0..n_clusters` for N items.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    labels: Vec<usize>,
    n_clusters: usize,
}

impl Partition {
    pub fn new(labels: Vec<usize>, n_clusters: usize) -> Result<Self> {
        if n_clusters == 0 {
            return Err(Error::InvalidParameter("a partition needs at least one cluster".into()));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= n_clusters) {
            return Err(Error::InvalidParameter(format!(
                "label {bad} out of range for {n_clusters} clusters"
            )));
        }
        Ok(Self { labels, n_clusters })
    }

    /// Partition whose cluster count is one more than the largest label.
    pub fn from_labels(labels: Vec<usize>) -> Result<Self> {
        let q = labels.iter().max().map_or(1, |m| m + 1);
        Self::new(labels, q)
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn n_clusters(&self) -> usize {
        self.n_clusters
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Members per label.
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.n_clusters];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    /// Same grouping, labels renumbered by first appearance.
    pub fn canonical(&self) -> Partition {
        let mut map = vec![usize::MAX; self.n_clusters];
        let mut next = 0;
        let labels = self
            .labels
            .iter()
            .map(|&l| {
                if map[l] == usize::MAX {
                    map[l] = next;
                    next += 1;
                }
                map[l]
            })
            .collect();
        Partition {
            labels,
            n_clusters: next.max(1),
        }
    }
}

/// One agglomeration step. Leaves are `0..N`; the cluster created at step
/// `s` gets id `N + s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub a: usize,
    pub b: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Dendrogram {
    pub merges: Vec<Merge>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_validation() {
        assert!(Partition::new(vec![0, 1, 2], 3).is_ok());
        assert!(Partition::new(vec![0, 3], 3).is_err());
        assert!(Partition::new(vec![], 0).is_err());
        assert_eq!(Partition::from_labels(vec![2, 0]).unwrap().n_clusters(), 3);
    }

    #[test]
    fn canonical_relabels_by_first_appearance() {
        let p = Partition::new(vec![3, 3, 1, 0, 1], 4).unwrap();
        let c = p.canonical();
        assert_eq!(c.labels(), &[0, 0, 1, 2, 1]);
        assert_eq!(c.n_clusters(), 3);
        assert_eq!(p.sizes(), vec![1, 2, 0, 2]);
    }
}
