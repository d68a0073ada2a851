use std::collections::HashMap;

use super::Partition;
use crate::{Error, Result};

fn pairs(n: u64) -> i128 {
    let n = n as i128;
    n * (n - 1) / 2
}

/// Hubert–Arabie adjusted Rand index.
///
/// With `I = Σ C(n_ij, 2)`, `A = Σ C(a_i, 2)`, `B = Σ C(b_j, 2)` and
/// `P = C(N, 2)`, the index `(I − AB/P) / ((A+B)/2 − AB/P)` is evaluated as
/// the integer ratio `(2PI − 2AB) / (P(A+B) − 2AB)` so that only the final
/// division rounds.
pub fn ari(p: &Partition, q: &Partition) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    let mut table: HashMap<(usize, usize), u64> = HashMap::new();
    let mut rows = vec![0u64; p.n_clusters()];
    let mut cols = vec![0u64; q.n_clusters()];
    for (&a, &b) in p.labels().iter().zip(q.labels()) {
        *table.entry((a, b)).or_default() += 1;
        rows[a] += 1;
        cols[b] += 1;
    }
    let index: i128 = table.values().map(|&c| pairs(c)).sum();
    let sum_a: i128 = rows.iter().map(|&c| pairs(c)).sum();
    let sum_b: i128 = cols.iter().map(|&c| pairs(c)).sum();
    let total = pairs(p.len() as u64);

    let num = 2 * total * index - 2 * sum_a * sum_b;
    let den = total * (sum_a + sum_b) - 2 * sum_a * sum_b;
    if den == 0 {
        // Only reachable when both partitions are all-singletons or both a
        // single cluster, i.e. when they agree.
        return Ok(1.0);
    }
    Ok(num as f64 / den as f64)
}
