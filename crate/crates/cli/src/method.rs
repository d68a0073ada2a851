//! A clustering method is a distance kind plus an algorithm; this module runs
//! one on a panel or on a precomputed matrix.

use std::fmt;
use std::str::FromStr;

use gnpr::cluster::{
    affinity_propagation, hc_cluster, kmeanspp, AffinityOptions, Dendrogram, Linkage, Partition,
};
use gnpr::metrics::{
    gpr_distance_matrix, l2_distance_matrix, l2_embedding, pearson_distance_matrix,
    pearson_embedding,
};
use gnpr::{
    build_representation, distance_matrix, gnpr_embedding, DistanceKind, DistanceMatrix, Embedding,
    Panel, ThetaWeight,
};
use serde::Serialize;

use crate::error::{invalid, CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    HcAverage,
    HcWard,
    Kmeanspp,
    Ap,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::HcAverage => "hc-average",
            Algorithm::HcWard => "hc-ward",
            Algorithm::Kmeanspp => "kmeanspp",
            Algorithm::Ap => "ap",
        }
    }

    /// Affinity propagation picks its own cluster count.
    pub fn needs_q(self) -> bool {
        !matches!(self, Algorithm::Ap)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "hc-average" | "hc-al" => Ok(Algorithm::HcAverage),
            "hc-ward" => Ok(Algorithm::HcWard),
            "kmeanspp" | "km++" => Ok(Algorithm::Kmeanspp),
            "ap" => Ok(Algorithm::Ap),
            other => Err(invalid(format!(
                "unknown algorithm {other:?} (expected hc-average, hc-ward, kmeanspp or ap)"
            ))),
        }
    }
}

/// `kind:algorithm`, e.g. `gnpr:hc-ward`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Method {
    pub kind: DistanceKind,
    pub algorithm: Algorithm,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.kind, self.algorithm)
    }
}

impl FromStr for Method {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, algorithm) = s
            .split_once(':')
            .ok_or_else(|| invalid(format!("method {s:?} is not of the form kind:algorithm")))?;
        Ok(Method {
            kind: kind.trim().parse()?,
            algorithm: algorithm.parse()?,
        })
    }
}

/// Knobs shared by every method.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    pub bins: usize,
    pub theta: ThetaWeight,
    pub seed: u64,
    pub restarts: usize,
    pub affinity: AffinityOptions,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    pub partition: Partition,
    pub dendrogram: Option<Dendrogram>,
    pub affinity: Option<AffinitySummary>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AffinitySummary {
    pub preference: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub fn matrix_for(panel: &Panel, kind: DistanceKind, s: &Settings) -> Result<DistanceMatrix> {
    Ok(match kind {
        DistanceKind::Gnpr => distance_matrix(&build_representation(panel, s.bins)?, s.theta),
        DistanceKind::Gpr => gpr_distance_matrix(panel, s.theta)?,
        DistanceKind::L2 => l2_distance_matrix(panel),
        DistanceKind::Pearson => pearson_distance_matrix(panel)?,
    })
}

pub fn embedding_for(panel: &Panel, kind: DistanceKind, s: &Settings) -> Result<Embedding> {
    Ok(match kind {
        DistanceKind::Gnpr => gnpr_embedding(&build_representation(panel, s.bins)?, s.theta),
        DistanceKind::L2 => l2_embedding(panel),
        DistanceKind::Pearson => pearson_embedding(panel)?,
        DistanceKind::Gpr => {
            return Err(invalid("kmeanspp needs an embeddable distance: gnpr, l2 or pearson"))
        }
    })
}

fn need_q(algorithm: Algorithm, q: Option<usize>) -> Result<usize> {
    q.ok_or_else(|| invalid(format!("{algorithm} needs the cluster count Q")))
}

/// Runs a matrix-based algorithm; k-means++ needs the panel instead.
pub fn cluster_matrix(
    d: &DistanceMatrix,
    algorithm: Algorithm,
    q: Option<usize>,
    s: &Settings,
) -> Result<Clustering> {
    let hc = |linkage| -> Result<Clustering> {
        let (partition, dendrogram) = hc_cluster(d, linkage, need_q(algorithm, q)?)?;
        Ok(Clustering {
            partition,
            dendrogram: Some(dendrogram),
            affinity: None,
        })
    };
    match algorithm {
        Algorithm::HcAverage => hc(Linkage::Average),
        Algorithm::HcWard => hc(Linkage::Ward),
        Algorithm::Ap => {
            let out = affinity_propagation(d, &s.affinity)?;
            if !out.converged {
                log::warn!("affinity propagation did not converge in {} iterations", out.iterations);
            }
            Ok(Clustering {
                partition: out.partition,
                dendrogram: None,
                affinity: Some(AffinitySummary {
                    preference: out.preference,
                    iterations: out.iterations,
                    converged: out.converged,
                }),
            })
        }
        Algorithm::Kmeanspp => Err(invalid("kmeanspp works on a panel, not on a distance matrix")),
    }
}

pub fn cluster_panel(panel: &Panel, method: Method, q: Option<usize>, s: &Settings) -> Result<Clustering> {
    if method.algorithm == Algorithm::Kmeanspp {
        let e = embedding_for(panel, method.kind, s)?;
        let out = kmeanspp(&e, need_q(method.algorithm, q)?, s.seed, s.restarts)?;
        return Ok(Clustering {
            partition: out.partition,
            dendrogram: None,
            affinity: None,
        });
    }
    cluster_matrix(&matrix_for(panel, method.kind, s)?, method.algorithm, q, s)
}
