//! Labeled synthetic panels from a factor model.
//!
//! Series `i` (1-based) is `X_i = β·Y_{k(i)} + Z_i` where `Y_1..Y_K` are shared
//! factors, `k(i) = ⌈iK/N⌉`, and the idiosyncratic noise `Z_i` follows
//! `noise_dists[(i−1) mod D]`. The N series fall into `Q = K·D` ground-truth
//! clusters of `p = N/Q` series each: K correlation clusters, each split into
//! D distribution clusters.
//!
//! Draws are taken in a fixed order (for each t: `Y_1..Y_K`, then `Z` for
//! `i = 1..N`) from a ChaCha8 stream, so a `(spec, seed)` pair always gives
//! the same panel on every platform.

use std::fmt;

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::cluster::Partition;
use crate::repr::Panel;
use crate::{Error, Result};

/// Marginal law of a factor or a noise term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistributionCode {
    Normal { mean: f64, std: f64 },
    /// Laplace(0, 1/√2): mean 0, variance 1.
    Laplace,
    /// Student t with 3 degrees of freedom divided by √3: mean 0, variance 1.
    StudentT3Scaled,
}

impl DistributionCode {
    pub const STANDARD_NORMAL: Self = DistributionCode::Normal {
        mean: 0.0,
        std: 1.0,
    };

    /// Normal law given by its variance, as in the usual `N(μ, σ²)` notation.
    pub fn normal_with_variance(mean: f64, variance: f64) -> Self {
        DistributionCode::Normal {
            mean,
            std: variance.sqrt(),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            DistributionCode::Normal { mean, std } if !mean.is_finite() || !(std > 0.0) => {
                Err(Error::InvalidSpec(format!("normal law needs std > 0, got {std}")))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for DistributionCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistributionCode::Normal { mean, std } => write!(f, "N({mean},{})", std * std),
            DistributionCode::Laplace => f.write_str("L"),
            DistributionCode::StudentT3Scaled => f.write_str("S"),
        }
    }
}

/// One draw from `dist`.
pub fn sample<R: Rng + ?Sized>(dist: &DistributionCode, rng: &mut R) -> f64 {
    match *dist {
        DistributionCode::Normal { mean, std } => {
            let z: f64 = rng.sample(StandardNormal);
            mean + std * z
        }
        DistributionCode::Laplace => {
            // Inverse cdf of Laplace(0, b) on u ∈ (0, 1).
            let b = std::f64::consts::FRAC_1_SQRT_2;
            let u: f64 = rng.sample(Open01);
            if u < 0.5 {
                b * (2.0 * u).ln()
            } else {
                -b * (2.0 * (1.0 - u)).ln()
            }
        }
        DistributionCode::StudentT3Scaled => {
            // t(3) = Z / √(χ²₃ / 3), with χ²₃ a sum of three squared normals.
            let z: f64 = rng.sample(StandardNormal);
            let chi2: f64 = (0..3)
                .map(|_| {
                    let g: f64 = rng.sample(StandardNormal);
                    g * g
                })
                .sum();
            z / (chi2 / 3.0).sqrt() / 3f64.sqrt()
        }
    }
}

/// Parameters of the factor model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "T")]
    pub t: usize,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "D")]
    pub d: usize,
    pub beta: f64,
    pub factor_dist: DistributionCode,
    pub noise_dists: Vec<DistributionCode>,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.d == 0 {
            return Err(Error::InvalidSpec("K and D must be at least 1".into()));
        }
        if self.n == 0 || !self.n.is_multiple_of(self.k * self.d) {
            return Err(Error::InvalidSpec(format!(
                "N = {} is not a positive multiple of K·D = {}",
                self.n,
                self.k * self.d
            )));
        }
        if self.t < 2 {
            return Err(Error::InvalidSpec(format!("T = {} is below 2", self.t)));
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(Error::InvalidSpec(format!("beta = {} outside [0, 1]", self.beta)));
        }
        if self.noise_dists.len() != self.d {
            return Err(Error::InvalidSpec(format!(
                "{} noise laws for D = {}",
                self.noise_dists.len(),
                self.d
            )));
        }
        self.factor_dist.validate()?;
        self.noise_dists.iter().try_for_each(DistributionCode::validate)
    }

    /// Number of ground-truth clusters `Q = K·D`.
    pub fn cluster_count(&self) -> usize {
        self.k * self.d
    }

    /// Series per ground-truth cluster `p = N/(K·D)`.
    pub fn cluster_size(&self) -> usize {
        self.n / self.cluster_count()
    }

    /// 0-based correlation cluster of 0-based series `i`: `⌈(i+1)K/N⌉ − 1`.
    pub fn factor_of(&self, i: usize) -> usize {
        ((i + 1) * self.k).div_ceil(self.n) - 1
    }

    /// 0-based distribution cluster of 0-based series `i`.
    pub fn noise_of(&self, i: usize) -> usize {
        i % self.d
    }

    pub fn label_of(&self, i: usize) -> usize {
        self.factor_of(i) * self.d + self.noise_of(i)
    }
}

/// A spec together with the seed that realizes it, as stored on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecFile {
    #[serde(flatten)]
    pub spec: SyntheticSpec,
    pub seed: u64,
}

/// A generated panel and its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPanel {
    pub panel: Panel,
    pub labels: Partition,
}

pub fn generate(spec: &SyntheticSpec, seed: u64) -> Result<LabeledPanel> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (n, t) = (spec.n, spec.t);
    let factor_of: Vec<usize> = (0..n).map(|i| spec.factor_of(i)).collect();
    let noise_of: Vec<usize> = (0..n).map(|i| spec.noise_of(i)).collect();

    let mut series = vec![vec![0.0; t]; n];
    let mut factors = vec![0.0; spec.k];
    for step in 0..t {
        for y in factors.iter_mut() {
            *y = sample(&spec.factor_dist, &mut rng);
        }
        for (i, row) in series.iter_mut().enumerate() {
            let z = sample(&spec.noise_dists[noise_of[i]], &mut rng);
            row[step] = spec.beta * factors[factor_of[i]] + z;
        }
    }
    let ids = (0..n).map(|i| format!("s{i}")).collect();
    let labels = Partition::new((0..n).map(|i| spec.label_of(i)).collect(), spec.cluster_count())?;
    Ok(LabeledPanel {
        panel: Panel::new(series, ids)?,
        labels,
    })
}

/// Named test cases A (distribution only), B (dependence only), C (both) and
/// G (convergence study), optionally resized.
pub fn preset(name: &str, n: Option<usize>, t: Option<usize>) -> Result<SyntheticSpec> {
    use DistributionCode::{Laplace, StudentT3Scaled};
    let normal1 = DistributionCode::STANDARD_NORMAL;
    let normal2 = DistributionCode::normal_with_variance(0.0, 2.0);
    let canonical = name.trim().to_ascii_uppercase();
    let (k, d, beta, factor_dist, noise_dists, default_n, default_t) = match canonical.as_str() {
        "A" => (1, 4, 0.0, normal1, vec![normal1, Laplace, StudentT3Scaled, normal2], 200, 5000),
        "B" => (10, 1, 0.1, StudentT3Scaled, vec![StudentT3Scaled], 200, 5000),
        "C" => (5, 2, 0.1, normal1, vec![normal1, StudentT3Scaled], 200, 5000),
        "G" => (8, 4, 0.1, normal1, vec![normal1, normal2, Laplace, StudentT3Scaled], 64, 2000),
        _ => return Err(Error::UnknownPreset(name.to_string())),
    };
    let spec = SyntheticSpec {
        name: Some(canonical),
        n: n.unwrap_or(default_n),
        t: t.unwrap_or(default_t),
        k,
        d,
        beta,
        factor_dist,
        noise_dists,
    };
    spec.validate()?;
    Ok(spec)
}
