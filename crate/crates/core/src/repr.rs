//! Panels and their generic non-parametric representation.
//!
//! A [`GnprRepresentation`] holds, for every series of a [`Panel`], its
//! empirical copula transform (ranks) and a histogram on a [`Grid`] shared by
//! the whole panel. Sharing the grid is what makes the Hellinger term a
//! metric across all series at once.

use rayon::prelude::*;

use crate::{Error, Result};

/// Rectangular N×T matrix of finite observations, one row per series.
#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    values: Vec<f64>,
    ids: Vec<String>,
    len: usize,
}

impl Panel {
    /// Builds a panel from one vector per series.
    pub fn new(series: Vec<Vec<f64>>, ids: Vec<String>) -> Result<Self> {
        if series.is_empty() {
            return Err(Error::InvalidPanel("panel has no series".into()));
        }
        if ids.len() != series.len() {
            return Err(Error::InvalidPanel(format!(
                "{} ids for {} series",
                ids.len(),
                series.len()
            )));
        }
        let len = series[0].len();
        if len < 2 {
            return Err(Error::TooShort { min: 2, got: len });
        }
        let mut values = Vec::with_capacity(series.len() * len);
        for (row, id) in series.iter().zip(&ids) {
            if row.len() != len {
                return Err(Error::InvalidPanel(format!(
                    "series {id} has {} observations, expected {len}",
                    row.len()
                )));
            }
            if let Some(bad) = row.iter().find(|v| !v.is_finite()) {
                return Err(Error::InvalidPanel(format!(
                    "series {id} contains non-finite value {bad}"
                )));
            }
            values.extend_from_slice(row);
        }
        Ok(Self { values, ids, len })
    }

    /// Same as [`Panel::new`] with ids `s0, s1, …`.
    pub fn from_series(series: Vec<Vec<f64>>) -> Result<Self> {
        let ids = (0..series.len()).map(|i| format!("s{i}")).collect();
        Self::new(series, ids)
    }

    pub fn n_series(&self) -> usize {
        self.ids.len()
    }

    /// Number of observations T per series.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn series(&self, i: usize) -> &[f64] {
        &self.values[i * self.len..(i + 1) * self.len]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.len)
    }

    /// Pooled minimum and maximum over every observation.
    pub fn range(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    /// Sub-panel keeping only the given time indices, in the given order.
    pub fn select_times(&self, times: &[usize]) -> Result<Self> {
        if let Some(&bad) = times.iter().find(|&&t| t >= self.len) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                len: self.len,
            });
        }
        let series = self
            .rows()
            .map(|row| times.iter().map(|&t| row[t]).collect())
            .collect();
        Self::new(series, self.ids.clone())
    }

    /// Applies `f` to every observation of series `i`.
    pub fn map_series(&self, i: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let series = self
            .rows()
            .enumerate()
            .map(|(k, row)| {
                if k == i {
                    row.iter().map(|&v| f(v)).collect()
                } else {
                    row.to_vec()
                }
            })
            .collect();
        Self::new(series, self.ids.clone())
    }
}

/// Per-series ranks of a panel.
///
/// Ranks are stored un-normalized (1..=T, half-integers under ties) so that
/// the rank distance keeps its exact integer arithmetic; the empirical copula
/// observations are `rank / T`, see [`RankMatrix::normalized`].
#[derive(Debug, Clone, PartialEq)]
pub struct RankMatrix {
    ranks: Vec<f64>,
    n: usize,
    len: usize,
}

impl RankMatrix {
    pub fn n_series(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    /// Average ranks of series `i`, in time order.
    pub fn raw(&self, i: usize) -> &[f64] {
        &self.ranks[i * self.len..(i + 1) * self.len]
    }

    /// Normalized ranks `rank / T` of series `i`, each in (0, 1].
    pub fn normalized(&self, i: usize) -> Vec<f64> {
        let t = self.len as f64;
        self.raw(i).iter().map(|r| r / t).collect()
    }
}

/// Average ranks (1-based) of `values`.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1..=end
        let rank = (start + 1 + end) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = rank;
        }
        start = end;
    }
    ranks
}

/// Empirical copula transform: rank of each observation within its series.
pub fn empirical_margins(panel: &Panel) -> RankMatrix {
    let rows: Vec<Vec<f64>> = panel
        .rows()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(average_ranks)
        .collect();
    RankMatrix {
        ranks: rows.concat(),
        n: panel.n_series(),
        len: panel.len(),
    }
}

/// Regular binning `[origin + k·h, origin + (k+1)·h)` for `k < bins`, with the
/// last bin closed on the right.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    origin: f64,
    bandwidth: f64,
    bins: usize,
}

impl Grid {
    pub fn new(origin: f64, bandwidth: f64, bins: usize) -> Result<Self> {
        if !(bandwidth > 0.0 && bandwidth.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "bandwidth must be positive, got {bandwidth}"
            )));
        }
        if bins == 0 {
            return Err(Error::InvalidParameter("bin count must be at least 1".into()));
        }
        if !origin.is_finite() {
            return Err(Error::InvalidParameter(format!("grid origin {origin}")));
        }
        Ok(Self {
            origin,
            bandwidth,
            bins,
        })
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    /// Bin holding `x`, or `None` when `x` is outside the grid.
    pub fn bin_of(&self, x: f64) -> Option<usize> {
        let pos = (x - self.origin) / self.bandwidth;
        let top = self.bins as f64;
        // Rounding in origin + bins·h may leave the pooled maximum a few ulps
        // above the last edge.
        if !(pos >= 0.0) || pos > top * (1.0 + 1e-12) {
            return None;
        }
        Some((pos.floor() as usize).min(self.bins - 1))
    }
}

/// Grid spanning the pooled range of `panel` with `bin_count` equal bins.
///
/// A constant panel gets bandwidth 1 so that the grid stays valid.
pub fn shared_grid(panel: &Panel, bin_count: usize) -> Result<Grid> {
    if bin_count == 0 {
        return Err(Error::InvalidParameter("bin count must be at least 1".into()));
    }
    let (lo, hi) = panel.range();
    let h = if hi > lo {
        (hi - lo) / bin_count as f64
    } else {
        1.0
    };
    Grid::new(lo, h, bin_count)
}

/// Histogram bin masses of one series on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedDensity {
    masses: Vec<f64>,
    grid: Grid,
}

impl BinnedDensity {
    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }
}

/// Fraction of the observations falling in each bin of `grid`.
pub fn histogram_density(series: &[f64], grid: &Grid) -> Result<BinnedDensity> {
    histogram_for(series, grid, "<unnamed>")
}

fn histogram_for(series: &[f64], grid: &Grid, id: &str) -> Result<BinnedDensity> {
    if series.is_empty() {
        return Err(Error::TooShort { min: 1, got: 0 });
    }
    let mut counts = vec![0usize; grid.bins];
    for &x in series {
        let k = grid.bin_of(x).ok_or_else(|| Error::OutsideGrid {
            series: id.to_string(),
            value: x,
        })?;
        counts[k] += 1;
    }
    let t = series.len() as f64;
    Ok(BinnedDensity {
        masses: counts.into_iter().map(|c| c as f64 / t).collect(),
        grid: *grid,
    })
}

/// Ranks, histograms and their shared grid for a whole panel.
#[derive(Debug, Clone, PartialEq)]
pub struct GnprRepresentation {
    ranks: RankMatrix,
    densities: Vec<BinnedDensity>,
    grid: Grid,
    ids: Vec<String>,
}

impl GnprRepresentation {
    pub fn ranks(&self) -> &RankMatrix {
        &self.ranks
    }

    pub fn densities(&self) -> &[BinnedDensity] {
        &self.densities
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn n_series(&self) -> usize {
        self.densities.len()
    }

    /// Observations per series.
    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.densities.is_empty()
    }
}

pub fn build_representation(panel: &Panel, bin_count: usize) -> Result<GnprRepresentation> {
    let grid = shared_grid(panel, bin_count)?;
    let ranks = empirical_margins(panel);
    let rows: Vec<(&[f64], &String)> = panel.rows().zip(panel.ids()).collect();
    let densities = rows
        .into_par_iter()
        .map(|(row, id)| histogram_for(row, &grid, id))
        .collect::<Result<Vec<_>>>()?;
    Ok(GnprRepresentation {
        ranks,
        densities,
        grid,
        ids: panel.ids().to_vec(),
    })
}
