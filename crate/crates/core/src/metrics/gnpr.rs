//! Rank + Hellinger distance on the generic representation.

use crate::repr::{BinnedDensity, GnprRepresentation};
use crate::{Error, Result};

use super::{pairwise, DistanceKind, DistanceMatrix, ThetaWeight};

/// Squared rank distance `3/(T(T²−1)) Σ_t (r_x(t) − r_y(t))²` on un-normalized ranks.
///
/// On tie-free ranks this is exactly `(1 − ρ_S)/2`: 0 for comonotonic series,
/// 1 for antimonotonic ones.
pub fn dep_distance_sq(ranks_x: &[f64], ranks_y: &[f64]) -> Result<f64> {
    if ranks_x.len() != ranks_y.len() {
        return Err(Error::LengthMismatch {
            left: ranks_x.len(),
            right: ranks_y.len(),
        });
    }
    if ranks_x.len() < 2 {
        return Err(Error::TooShort {
            min: 2,
            got: ranks_x.len(),
        });
    }
    Ok(dep_sq_unchecked(ranks_x, ranks_y))
}

#[inline]
fn dep_sq_unchecked(ranks_x: &[f64], ranks_y: &[f64]) -> f64 {
    let sum: f64 = ranks_x
        .iter()
        .zip(ranks_y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    let t = ranks_x.len() as f64;
    // Integer (or half-integer) ranks keep `sum` and the denominator exact,
    // leaving a single rounding in the division.
    (3.0 * sum / (t * (t * t - 1.0))).min(1.0)
}

/// Squared Hellinger distance `½ Σ_k (√p_k − √q_k)²` between two histograms.
pub fn dist_distance_sq(p: &BinnedDensity, q: &BinnedDensity) -> Result<f64> {
    if p.grid() != q.grid() {
        return Err(Error::GridMismatch);
    }
    Ok(dist_sq_unchecked(p.masses(), q.masses()))
}

#[inline]
fn dist_sq_unchecked(p: &[f64], q: &[f64]) -> f64 {
    let sum: f64 = p
        .iter()
        .zip(q)
        .map(|(a, b)| {
            let d = a.sqrt() - b.sqrt();
            d * d
        })
        .sum();
    (0.5 * sum).min(1.0)
}

#[inline]
fn blend(dep_sq: f64, dist_sq: f64, theta: ThetaWeight) -> f64 {
    let th = theta.value();
    (th * dep_sq + (1.0 - th) * dist_sq).sqrt().min(1.0)
}

fn pair_unchecked(repr: &GnprRepresentation, i: usize, j: usize, theta: ThetaWeight) -> f64 {
    let th = theta.value();
    // Skip a term whose weight is zero.
    let dep = if th > 0.0 {
        dep_sq_unchecked(repr.ranks().raw(i), repr.ranks().raw(j))
    } else {
        0.0
    };
    let dist = if th < 1.0 {
        dist_sq_unchecked(repr.densities()[i].masses(), repr.densities()[j].masses())
    } else {
        0.0
    };
    blend(dep, dist, theta)
}

/// `√(θ·d₁² + (1−θ)·d₀²)` between series `i` and `j` of `repr`.
pub fn gnpr_distance(
    repr: &GnprRepresentation,
    i: usize,
    j: usize,
    theta: ThetaWeight,
) -> Result<f64> {
    let n = repr.n_series();
    for index in [i, j] {
        if index >= n {
            return Err(Error::IndexOutOfRange { index, len: n });
        }
    }
    Ok(pair_unchecked(repr, i, j, theta))
}

/// All pairwise GNPR distances, computed in parallel over rows.
pub fn distance_matrix(repr: &GnprRepresentation, theta: ThetaWeight) -> DistanceMatrix {
    pairwise(repr.ids(), DistanceKind::Gnpr, |i, j| {
        Ok(pair_unchecked(repr, i, j, theta))
    })
    .expect("pair closure is infallible")
}

/// Points whose squared Euclidean distances reproduce a distance's squares.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    data: Vec<f64>,
    n: usize,
    dim: usize,
    theta: Option<ThetaWeight>,
}

impl Embedding {
    pub fn new(rows: Vec<Vec<f64>>, theta: Option<ThetaWeight>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidParameter("embedding has no rows".into()));
        }
        let dim = rows[0].len();
        if let Some(r) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::LengthMismatch {
                left: dim,
                right: r.len(),
            });
        }
        Ok(Self {
            data: rows.concat(),
            n,
            dim,
            theta,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn theta(&self) -> Option<ThetaWeight> {
        self.theta
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn sq_dist(&self, i: usize, j: usize) -> f64 {
        self.row(i)
            .iter()
            .zip(self.row(j))
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }
}

/// Rows `[c_r · ranks, c_h · √masses]` with `c_r = √(3θ/(T(T²−1)))` and
/// `c_h = √((1−θ)/2)`, so that `‖e_i − e_j‖² = d_θ²(i, j)`.
pub fn gnpr_embedding(repr: &GnprRepresentation, theta: ThetaWeight) -> Embedding {
    let t = repr.len() as f64;
    let th = theta.value();
    let rank_scale = (3.0 * th / (t * (t * t - 1.0))).sqrt();
    let hist_scale = ((1.0 - th) / 2.0).sqrt();
    let rows = (0..repr.n_series())
        .map(|i| {
            repr.ranks()
                .raw(i)
                .iter()
                .map(|r| rank_scale * r)
                .chain(repr.densities()[i].masses().iter().map(|m| hist_scale * m.sqrt()))
                .collect()
        })
        .collect();
    Embedding::new(rows, Some(theta)).expect("rows share T + B columns")
}
