//! k-means++ seeding followed by Lloyd iterations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::Partition;
use crate::metrics::Embedding;
use crate::{Error, Result};

/// Lloyd iterations allowed per restart.
pub const MAX_LLOYD_ITERATIONS: usize = 300;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansOutcome {
    pub partition: Partition,
    /// Sum of squared distances to the assigned center.
    pub inertia: f64,
    /// Lloyd iterations of the retained restart.
    pub iterations: usize,
    /// Inertia after every assignment step of the retained restart.
    pub inertia_history: Vec<f64>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn seed_centers(e: &Embedding, q: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = e.n();
    let first = rng.random_range(0..n);
    let mut centers = vec![e.row(first).to_vec()];
    let mut nearest: Vec<f64> = (0..n).map(|i| sq_dist(e.row(i), &centers[0])).collect();
    while centers.len() < q {
        let total: f64 = nearest.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = None;
            for (i, &w) in nearest.iter().enumerate() {
                acc += w;
                if w > 0.0 && acc > target {
                    chosen = Some(i);
                    break;
                }
            }
            // Rounding can leave `acc` just short of `target`.
            chosen.unwrap_or_else(|| nearest.iter().rposition(|&w| w > 0.0).unwrap())
        } else {
            // Every point coincides with a center already.
            rng.random_range(0..n)
        };
        let c = e.row(pick).to_vec();
        for (i, w) in nearest.iter_mut().enumerate() {
            *w = w.min(sq_dist(e.row(i), &c));
        }
        centers.push(c);
    }
    centers
}

fn assign(e: &Embedding, centers: &[Vec<f64>]) -> (Vec<usize>, f64) {
    let nearest: Vec<(usize, f64)> = (0..e.n())
        .into_par_iter()
        .map(|i| {
            let row = e.row(i);
            centers
                .iter()
                .map(|c| sq_dist(row, c))
                .enumerate()
                .fold((usize::MAX, f64::INFINITY), |best, (k, d)| {
                    if d < best.1 {
                        (k, d)
                    } else {
                        best
                    }
                })
        })
        .collect();
    let inertia = nearest.iter().map(|&(_, d)| d).sum();
    (nearest.into_iter().map(|(k, _)| k).collect(), inertia)
}

/// Means of the assigned points; an emptied cluster keeps its old center.
fn update(e: &Embedding, labels: &[usize], centers: &mut [Vec<f64>]) {
    let dim = e.dim();
    let mut sums = vec![vec![0.0; dim]; centers.len()];
    let mut counts = vec![0usize; centers.len()];
    for (i, &k) in labels.iter().enumerate() {
        counts[k] += 1;
        for (s, v) in sums[k].iter_mut().zip(e.row(i)) {
            *s += v;
        }
    }
    for ((center, sum), &count) in centers.iter_mut().zip(sums).zip(&counts) {
        if count > 0 {
            let c = count as f64;
            *center = sum.into_iter().map(|s| s / c).collect();
        }
    }
}

fn lloyd(e: &Embedding, mut centers: Vec<Vec<f64>>) -> (Vec<usize>, f64, usize, Vec<f64>) {
    let (mut labels, mut inertia) = assign(e, &centers);
    let mut history = vec![inertia];
    let mut iterations = 0;
    while iterations < MAX_LLOYD_ITERATIONS {
        iterations += 1;
        update(e, &labels, &mut centers);
        let (next, next_inertia) = assign(e, &centers);
        history.push(next_inertia);
        inertia = next_inertia;
        if next == labels {
            break;
        }
        labels = next;
    }
    (labels, inertia, iterations, history)
}

/// Best-of-`restarts` k-means with k-means++ seeding, deterministic in `seed`.
pub fn kmeanspp(e: &Embedding, q: usize, seed: u64, restarts: usize) -> Result<KMeansOutcome> {
    if q == 0 || q > e.n() {
        return Err(Error::InvalidParameter(format!(
            "cluster count {q} must lie in 1..={}",
            e.n()
        )));
    }
    if restarts == 0 {
        return Err(Error::InvalidParameter("restarts must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<KMeansOutcome> = None;
    for _ in 0..restarts {
        let centers = seed_centers(e, q, &mut rng);
        let (labels, inertia, iterations, inertia_history) = lloyd(e, centers);
        if best.as_ref().is_none_or(|b| inertia < b.inertia) {
            best = Some(KMeansOutcome {
                partition: Partition::new(labels, q)?,
                inertia,
                iterations,
                inertia_history,
            });
        }
    }
    Ok(best.expect("at least one restart"))
}
