//! Distances between series and full distance matrices.
//!
//! - [`gnpr`]: the rank + Hellinger distance on a [`GnprRepresentation`], its
//!   scalar-product embedding and the parallel matrix builder.
//! - [`gaussian`]: closed forms for bivariate Gaussians (the GPR distance and
//!   the L2 expectation), used both as oracles and as the GPR baseline.
//! - [`baseline`]: empirical L2 and Pearson-correlation distances.
//!
//! [`GnprRepresentation`]: crate::GnprRepresentation

pub mod baseline;
pub mod gaussian;
pub mod gnpr;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use baseline::{
    l2_distance_empirical, l2_distance_matrix, l2_embedding, pearson_distance,
    pearson_distance_matrix, pearson_embedding,
};
pub use gaussian::{
    gpr_distance_matrix, gpr_gaussian_distance, l2_gaussian_closed_form,
    pearson_to_spearman_gaussian, GaussianParams,
};
pub use gnpr::{
    dep_distance_sq, dist_distance_sq, distance_matrix, gnpr_distance, gnpr_embedding, Embedding,
};

/// Weight of the dependence term, in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct ThetaWeight(f64);

impl ThetaWeight {
    pub fn new(theta: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&theta) {
            Ok(Self(theta))
        } else {
            Err(Error::InvalidParameter(format!(
                "theta must lie in [0, 1], got {theta}"
            )))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for ThetaWeight {
    type Error = Error;

    fn try_from(v: f64) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ThetaWeight> for f64 {
    fn from(t: ThetaWeight) -> f64 {
        t.0
    }
}

impl fmt::Display for ThetaWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Which distance filled a [`DistanceMatrix`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceKind {
    Gnpr,
    Gpr,
    L2,
    Pearson,
}

impl DistanceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DistanceKind::Gnpr => "gnpr",
            DistanceKind::Gpr => "gpr",
            DistanceKind::L2 => "l2",
            DistanceKind::Pearson => "pearson",
        }
    }

    /// Whether the distance depends on θ.
    pub fn uses_theta(self) -> bool {
        matches!(self, DistanceKind::Gnpr | DistanceKind::Gpr)
    }

    /// Whether every entry is guaranteed to lie in `[0, 1]`.
    pub fn is_bounded(self) -> bool {
        !matches!(self, DistanceKind::L2)
    }
}

impl fmt::Display for DistanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DistanceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gnpr" => Ok(DistanceKind::Gnpr),
            "gpr" => Ok(DistanceKind::Gpr),
            "l2" => Ok(DistanceKind::L2),
            "pearson" => Ok(DistanceKind::Pearson),
            other => Err(Error::InvalidParameter(format!(
                "unknown distance kind {other:?} (expected gnpr, gpr, l2 or pearson)"
            ))),
        }
    }
}

/// Tolerance on `|d(i,j) − d(j,i)|` accepted from external matrices.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// Symmetric N×N matrix with zero diagonal, labelled by series id.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    values: Vec<f64>,
    n: usize,
    ids: Vec<String>,
    kind: DistanceKind,
}

impl DistanceMatrix {
    /// Wraps a row-major N×N matrix after checking symmetry and the diagonal.
    pub fn from_values(values: Vec<f64>, ids: Vec<String>, kind: DistanceKind) -> Result<Self> {
        let n = ids.len();
        if values.len() != n * n {
            return Err(Error::InvalidMatrix(format!(
                "{} entries for {n} series",
                values.len()
            )));
        }
        for i in 0..n {
            if values[i * n + i] != 0.0 {
                return Err(Error::InvalidMatrix(format!(
                    "diagonal entry {i} is {}",
                    values[i * n + i]
                )));
            }
            for j in (i + 1)..n {
                let (a, b) = (values[i * n + j], values[j * n + i]);
                if !a.is_finite() || !b.is_finite() {
                    return Err(Error::InvalidMatrix(format!("entry ({i}, {j}) is not finite")));
                }
                if (a - b).abs() > SYMMETRY_TOLERANCE {
                    return Err(Error::InvalidMatrix(format!(
                        "asymmetric at ({i}, {j}): {a} vs {b}"
                    )));
                }
            }
        }
        Ok(Self {
            values,
            n,
            ids,
            kind,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn kind(&self) -> DistanceKind {
        self.kind
    }

    /// Matrix restricted and reordered to `order`.
    pub fn reorder(&self, order: &[usize]) -> DistanceMatrix {
        let n = order.len();
        let mut values = Vec::with_capacity(n * n);
        for &i in order {
            for &j in order {
                values.push(self.get(i, j));
            }
        }
        DistanceMatrix {
            values,
            n,
            ids: order.iter().map(|&i| self.ids[i].clone()).collect(),
            kind: self.kind,
        }
    }
}

/// Fills the upper triangle in parallel and mirrors it.
///
/// Each entry is computed by one call of `f`, so the result does not depend
/// on how rows are scheduled.
pub(crate) fn pairwise<F>(ids: &[String], kind: DistanceKind, f: F) -> Result<DistanceMatrix>
where
    F: Fn(usize, usize) -> Result<f64> + Sync,
{
    let n = ids.len();
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| ((i + 1)..n).map(|j| f(i, j)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let mut values = vec![0.0; n * n];
    for (i, row) in upper.iter().enumerate() {
        for (off, &v) in row.iter().enumerate() {
            let j = i + 1 + off;
            values[i * n + j] = v;
            values[j * n + i] = v;
        }
    }
    Ok(DistanceMatrix {
        values,
        n,
        ids: ids.to_vec(),
        kind,
    })
}
