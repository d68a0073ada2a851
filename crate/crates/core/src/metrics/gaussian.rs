//! Closed forms for bivariate Gaussians.

use std::f64::consts::PI;

use crate::repr::Panel;
use crate::{Error, Result};

use super::baseline::{centered, pearson_from_centered};
use super::{pairwise, DistanceKind, DistanceMatrix, ThetaWeight};

/// Mean and standard deviation of a Gaussian margin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianParams {
    mean: f64,
    std: f64,
}

impl GaussianParams {
    pub fn new(mean: f64, std: f64) -> Result<Self> {
        if !mean.is_finite() || !(std > 0.0 && std.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "Gaussian needs finite mean and positive std, got N({mean}, {std}²)"
            )));
        }
        Ok(Self { mean, std })
    }

    /// Moment estimates (population standard deviation) from a sample.
    pub fn fit(sample: &[f64]) -> Result<Self> {
        if sample.is_empty() {
            return Err(Error::TooShort { min: 1, got: 0 });
        }
        let n = sample.len() as f64;
        let mean = sample.iter().sum::<f64>() / n;
        let var = sample.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
        Self::new(mean, var.sqrt())
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn std(&self) -> f64 {
        self.std
    }
}

fn check_correlation(rho: f64, what: &str) -> Result<()> {
    if (-1.0..=1.0).contains(&rho) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{what} must lie in [-1, 1], got {rho}"
        )))
    }
}

/// `1 − BC` between two Gaussians, BC being the Bhattacharyya coefficient.
fn hellinger_sq(x: &GaussianParams, y: &GaussianParams) -> f64 {
    let s2 = x.std * x.std + y.std * y.std;
    let dm = x.mean - y.mean;
    let bc = (2.0 * x.std * y.std / s2).sqrt() * (-0.25 * dm * dm / s2).exp();
    (1.0 - bc).clamp(0.0, 1.0)
}

/// GPR distance: the blend of `(1 − ρ_S)/2` and the Gaussian Hellinger term.
pub fn gpr_gaussian_distance(
    x: &GaussianParams,
    y: &GaussianParams,
    rho_s: f64,
    theta: ThetaWeight,
) -> Result<f64> {
    check_correlation(rho_s, "Spearman correlation")?;
    let th = theta.value();
    let dep = (1.0 - rho_s) / 2.0;
    Ok((th * dep + (1.0 - th) * hellinger_sq(x, y)).sqrt().min(1.0))
}

/// Spearman correlation of a bivariate Gaussian with Pearson correlation `rho`.
pub fn pearson_to_spearman_gaussian(rho: f64) -> Result<f64> {
    check_correlation(rho, "Pearson correlation")?;
    Ok(6.0 / PI * (rho / 2.0).asin())
}

/// `E[(X − Y)²]` for a bivariate Gaussian with correlation `rho`.
pub fn l2_gaussian_closed_form(x: &GaussianParams, y: &GaussianParams, rho: f64) -> Result<f64> {
    check_correlation(rho, "Pearson correlation")?;
    let dm = x.mean - y.mean;
    let ds = x.std - y.std;
    Ok(dm * dm + ds * ds + 2.0 * x.std * y.std * (1.0 - rho))
}

/// GPR distance matrix with each series fitted by a Gaussian and the
/// dependence term driven by the sample Pearson correlation converted to ρ_S.
pub fn gpr_distance_matrix(panel: &Panel, theta: ThetaWeight) -> Result<DistanceMatrix> {
    let fitted = panel
        .rows()
        .zip(panel.ids())
        .map(|(row, id)| {
            let c = centered(row).ok_or_else(|| Error::ZeroVariance(id.clone()))?;
            Ok((GaussianParams::fit(row)?, c))
        })
        .collect::<Result<Vec<_>>>()?;
    pairwise(panel.ids(), DistanceKind::Gpr, |i, j| {
        let rho = pearson_from_centered(&fitted[i].1, &fitted[j].1);
        let rho_s = pearson_to_spearman_gaussian(rho)?;
        gpr_gaussian_distance(&fitted[i].0, &fitted[j].0, rho_s, theta)
    })
}
