//! Agglomerative clustering with Lance–Williams updates.

use std::fmt;
use std::str::FromStr;

use super::{Dendrogram, Merge, Partition};
use crate::metrics::DistanceMatrix;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Linkage {
    /// Mean inter-cluster distance (UPGMA).
    Average,
    /// Minimum variance increase, run on squared distances.
    Ward,
}

impl fmt::Display for Linkage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Linkage::Average => "average",
            Linkage::Ward => "ward",
        })
    }
}

impl FromStr for Linkage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "average" => Ok(Linkage::Average),
            "ward" => Ok(Linkage::Ward),
            other => Err(Error::InvalidParameter(format!("unknown linkage {other:?}"))),
        }
    }
}

/// Agglomerates `d` down to `q` clusters and returns the partition together
/// with the full dendrogram (all `N − 1` merges).
///
/// Clusters live in the slot of their smallest member. At each step the
/// closest pair of live slots `(a, b)`, `a < b`, is merged into `a`; among
/// equal linkage values the lexicographically smallest pair wins. Ward
/// heights are reported on the distance scale (square root of the updated
/// squared linkage).
pub fn hc_cluster(d: &DistanceMatrix, linkage: Linkage, q: usize) -> Result<(Partition, Dendrogram)> {
    let n = d.n();
    if q == 0 || q > n {
        return Err(Error::InvalidParameter(format!(
            "cluster count {q} must lie in 1..={n}"
        )));
    }
    // DistanceMatrix guarantees symmetry and a zero diagonal.
    let mut work: Vec<f64> = match linkage {
        Linkage::Average => d.values().to_vec(),
        Linkage::Ward => d.values().iter().map(|v| v * v).collect(),
    };
    let mut alive = vec![true; n];
    let mut size = vec![1usize; n];
    let mut node_id: Vec<usize> = (0..n).collect();
    let mut owner: Vec<usize> = (0..n).collect();
    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    let mut cut: Option<Vec<usize>> = if q == n { Some(owner.clone()) } else { None };

    for step in 0..n.saturating_sub(1) {
        let mut best = (f64::INFINITY, usize::MAX, usize::MAX);
        for a in (0..n).filter(|&a| alive[a]) {
            let row = &work[a * n..(a + 1) * n];
            for b in ((a + 1)..n).filter(|&b| alive[b]) {
                if row[b] < best.0 {
                    best = (row[b], a, b);
                }
            }
        }
        let (dab, a, b) = best;
        let (na, nb) = (size[a] as f64, size[b] as f64);
        for k in (0..n).filter(|&k| alive[k] && k != a && k != b) {
            let (dak, dbk) = (work[a * n + k], work[b * n + k]);
            let updated = match linkage {
                Linkage::Average => (na * dak + nb * dbk) / (na + nb),
                Linkage::Ward => {
                    let nk = size[k] as f64;
                    ((na + nk) * dak + (nb + nk) * dbk - nk * dab) / (na + nb + nk)
                }
            };
            work[a * n + k] = updated;
            work[k * n + a] = updated;
        }
        alive[b] = false;
        size[a] += size[b];
        for o in owner.iter_mut().filter(|o| **o == b) {
            *o = a;
        }
        let height = match linkage {
            Linkage::Average => dab,
            Linkage::Ward => dab.max(0.0).sqrt(),
        };
        merges.push(Merge {
            a: node_id[a].min(node_id[b]),
            b: node_id[a].max(node_id[b]),
            height,
            size: size[a],
        });
        node_id[a] = n + step;
        if step + 1 == n - q {
            cut = Some(owner.clone());
        }
    }

    let owners = cut.expect("cut reached before the last merge");
    let partition = Partition::from_labels(owners)?.canonical();
    Ok((partition, Dendrogram { merges }))
}
