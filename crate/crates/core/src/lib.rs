//! # gnpr
//!
//! Clustering of i.i.d. random processes on a representation that keeps
//! dependence and distribution apart.
//!
//! Every series of a [`Panel`] is mapped to a pair:
//!
//! - its empirical copula transform (normalized ranks), which carries only
//!   the joint behaviour with the other series;
//! - a histogram of its values on a grid shared by the whole panel, which
//!   carries only its marginal distribution.
//!
//! The distance between two series blends a rank term and a Hellinger term:
//!
//! ```text
//! d_θ² = θ · 3/(T(T²−1)) Σ_t (r_x(t) − r_y(t))²  +  (1−θ) · ½ Σ_k (√p_k − √q_k)²
//! ```
//!
//! with integer ranks `r` and bin masses `p`, `q`. `θ = 1` looks only at
//! dependence (it equals `(1 − ρ_S)/2`), `θ = 0` only at distribution, and
//! any `0 < θ < 1` gives a metric bounded by 1.
//!
//! ## Modules
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`repr`] | panels, ranks, shared grids, histograms |
//! | [`metrics`] | rank/Hellinger distances, Gaussian closed forms, baselines, embeddings, distance matrices |
//! | [`synth`] | factor-model generator and the A/B/C/G presets |
//! | [`cluster`] | hierarchical (average, Ward), k-means++, affinity propagation, ARI |
//! | [`io`] | CSV formats for panels, partitions, matrices and dendrograms |
//!
//! ## Quick start
//!
//! ```
//! use gnpr::{build_representation, distance_matrix, generate, preset, ThetaWeight};
//! use gnpr::cluster::{hc_cluster, Linkage, ari};
//!
//! let spec = preset("G", Some(64), Some(200)).unwrap();
//! let labeled = generate(&spec, 7).unwrap();
//! let repr = build_representation(&labeled.panel, 100).unwrap();
//! let dist = distance_matrix(&repr, ThetaWeight::new(0.5).unwrap());
//! let (partition, _) = hc_cluster(&dist, Linkage::Average, spec.cluster_count()).unwrap();
//! let score = ari(&partition, &labeled.labels).unwrap();
//! assert!((-1.0..=1.0).contains(&score));
//! ```

pub mod cluster;
mod error;
pub mod io;
pub mod metrics;
pub mod repr;
pub mod synth;

pub use error::{Error, Result};
pub use metrics::{
    distance_matrix, gnpr_distance, gnpr_embedding, DistanceKind, DistanceMatrix, Embedding,
    ThetaWeight,
};
pub use repr::{build_representation, GnprRepresentation, Panel};
pub use synth::{generate, preset, LabeledPanel, SyntheticSpec};

/// Bin count used when the caller does not choose one.
pub const DEFAULT_BINS: usize = 100;
