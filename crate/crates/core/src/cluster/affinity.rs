//! Affinity propagation on similarities `s(i, k) = −d(i, k)²`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::Partition;
use crate::metrics::DistanceMatrix;
use crate::{Error, Result};

/// Self-similarity placed on the diagonal; it drives how many exemplars emerge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Preference {
    /// Median of the off-diagonal similarities.
    Median,
    Value(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffinityOptions {
    pub preference: Preference,
    /// Weight kept by the previous message, in `[0.5, 1)`.
    pub damping: f64,
    pub max_iter: usize,
    /// Iterations the exemplar set must stay unchanged to declare convergence.
    pub convergence_iter: usize,
}

impl Default for AffinityOptions {
    fn default() -> Self {
        Self {
            preference: Preference::Median,
            damping: 0.9,
            max_iter: 1000,
            convergence_iter: 15,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AffinityOutcome {
    pub partition: Partition,
    /// Exemplar of each cluster, indexed by label.
    pub exemplars: Vec<usize>,
    pub iterations: usize,
    pub converged: bool,
    /// Preference actually used.
    pub preference: f64,
    /// Largest |responsibility| or |availability| seen over all iterations.
    pub max_message: f64,
}

fn median(mut values: Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    let m = values.len() / 2;
    if values.len() % 2 == 1 {
        values[m]
    } else {
        (values[m - 1] + values[m]) / 2.0
    }
}

fn argmax(values: impl Iterator<Item = f64>) -> usize {
    values
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (k, v)| if v > best.1 { (k, v) } else { best })
        .0
}

/// Responsibility and availability messages with damping.
struct Messages {
    n: usize,
    r: Vec<f64>,
    a: Vec<f64>,
}

impl Messages {
    fn new(n: usize) -> Self {
        Self {
            n,
            r: vec![0.0; n * n],
            a: vec![0.0; n * n],
        }
    }

    /// One damped sweep: every message becomes `λ·old + (1−λ)·new`.
    fn step(&mut self, s: &[f64], damping: f64) {
        let n = self.n;
        for i in 0..n {
            let (mut first, mut second, mut at) = (f64::NEG_INFINITY, f64::NEG_INFINITY, 0);
            for k in 0..n {
                let v = self.a[i * n + k] + s[i * n + k];
                if v > first {
                    second = first;
                    first = v;
                    at = k;
                } else if v > second {
                    second = v;
                }
            }
            for k in 0..n {
                let competitor = if k == at { second } else { first };
                let fresh = s[i * n + k] - competitor;
                let old = &mut self.r[i * n + k];
                *old = damping * *old + (1.0 - damping) * fresh;
            }
        }
        for k in 0..n {
            let support: f64 = (0..n)
                .map(|i| {
                    let r = self.r[i * n + k];
                    if i == k { r } else { r.max(0.0) }
                })
                .sum();
            for i in 0..n {
                let r = self.r[i * n + k];
                let own = if i == k { r } else { r.max(0.0) };
                let fresh = if i == k {
                    support - own
                } else {
                    (support - own).min(0.0)
                };
                let old = &mut self.a[i * n + k];
                *old = damping * *old + (1.0 - damping) * fresh;
            }
        }
    }

    fn exemplar_flags(&self) -> Vec<bool> {
        (0..self.n)
            .map(|k| self.a[k * self.n + k] + self.r[k * self.n + k] > 0.0)
            .collect()
    }

    fn max_abs(&self) -> f64 {
        self.r
            .iter()
            .chain(&self.a)
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

fn validate(opts: &AffinityOptions) -> Result<()> {
    if !(0.5..1.0).contains(&opts.damping) {
        return Err(Error::InvalidParameter(format!(
            "damping must lie in [0.5, 1), got {}",
            opts.damping
        )));
    }
    if opts.max_iter == 0 || opts.convergence_iter == 0 {
        return Err(Error::InvalidParameter(
            "max_iter and convergence_iter must be positive".into(),
        ));
    }
    if let Preference::Value(p) = opts.preference {
        if !p.is_finite() {
            return Err(Error::InvalidParameter(format!("preference {p}")));
        }
    }
    Ok(())
}

/// Clusters `d` by message passing; the number of clusters is not given but
/// follows from the preference.
///
/// Exemplar ties are broken by a tiny fixed-seed perturbation of the
/// similarities, so the result is still a deterministic function of `d`.
/// When no exemplar emerges within `max_iter` sweeps the outcome is a single
/// cluster flagged as not converged.
pub fn affinity_propagation(d: &DistanceMatrix, opts: &AffinityOptions) -> Result<AffinityOutcome> {
    validate(opts)?;
    let n = d.n();
    let mut s: Vec<f64> = d.values().iter().map(|v| -v * v).collect();
    let off_diagonal: Vec<f64> = (0..n * n).filter(|idx| idx / n != idx % n).map(|idx| s[idx]).collect();
    let preference = match opts.preference {
        Preference::Value(p) => p,
        Preference::Median if off_diagonal.is_empty() => 0.0,
        Preference::Median => median(off_diagonal),
    };
    if n == 1 {
        return Ok(AffinityOutcome {
            partition: Partition::new(vec![0], 1)?,
            exemplars: vec![0],
            iterations: 0,
            converged: true,
            preference,
            max_message: 0.0,
        });
    }
    for k in 0..n {
        s[k * n + k] = preference;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for v in s.iter_mut() {
        let z: f64 = rng.sample(StandardNormal);
        *v += (f64::EPSILON * *v + f64::MIN_POSITIVE * 100.0) * z;
    }

    let mut msgs = Messages::new(n);
    let window = opts.convergence_iter;
    let mut history = vec![vec![false; window]; n];
    let mut max_message = 0.0f64;
    let mut converged = false;
    let mut iterations = 0;
    for it in 0..opts.max_iter {
        iterations = it + 1;
        msgs.step(&s, opts.damping);
        max_message = max_message.max(msgs.max_abs());
        let flags = msgs.exemplar_flags();
        let count = flags.iter().filter(|&&f| f).count();
        for (h, &f) in history.iter_mut().zip(&flags) {
            h[it % window] = f;
        }
        if it + 1 >= window {
            let stable = history
                .iter()
                .all(|h| h.iter().all(|&f| f) || h.iter().all(|&f| !f));
            if stable && count > 0 {
                converged = true;
                break;
            }
        }
    }

    let flags = msgs.exemplar_flags();
    let mut exemplars: Vec<usize> = (0..n).filter(|&k| flags[k]).collect();
    if exemplars.is_empty() {
        return Ok(AffinityOutcome {
            partition: Partition::new(vec![0; n], 1)?,
            exemplars: vec![],
            iterations,
            converged: false,
            preference,
            max_message,
        });
    }

    let assign = |exemplars: &[usize]| -> Vec<usize> {
        let mut c: Vec<usize> = (0..n)
            .map(|i| argmax(exemplars.iter().map(|&k| s[i * n + k])))
            .collect();
        for (label, &k) in exemplars.iter().enumerate() {
            c[k] = label;
        }
        c
    };
    // Re-pick each exemplar as the member with the largest summed similarity
    // to the rest of its cluster, then reassign.
    let c = assign(&exemplars);
    for (label, exemplar) in exemplars.iter_mut().enumerate() {
        let members: Vec<usize> = (0..n).filter(|&i| c[i] == label).collect();
        let best = argmax(members.iter().map(|&j| members.iter().map(|&i| s[i * n + j]).sum()));
        *exemplar = members[best];
    }
    let c = assign(&exemplars);
    let mut chosen: Vec<usize> = c.iter().map(|&l| exemplars[l]).collect();
    let mut unique = chosen.clone();
    unique.sort_unstable();
    unique.dedup();
    for e in chosen.iter_mut() {
        *e = unique.binary_search(e).expect("exemplar listed");
    }
    Ok(AffinityOutcome {
        partition: Partition::new(chosen, unique.len())?,
        exemplars: unique,
        iterations,
        converged,
        preference,
        max_message,
    })
}
