//! Empirical L2 and correlation distances used as baselines.

use crate::repr::Panel;
use crate::{Error, Result};

use super::{pairwise, DistanceKind, DistanceMatrix, Embedding};

/// Mean squared difference `(1/T) Σ_t (x_t − y_t)²`.
pub fn l2_distance_empirical(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.is_empty() {
        return Err(Error::TooShort { min: 1, got: 0 });
    }
    Ok(l2_unchecked(x, y))
}

fn l2_unchecked(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / x.len() as f64
}

/// Centered copy of `x` scaled to unit norm, `None` for a constant series.
pub(crate) fn centered(x: &[f64]) -> Option<Vec<f64>> {
    if x.iter().all(|&v| v == x[0]) {
        return None;
    }
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    let c: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        Some(c.into_iter().map(|v| v / norm).collect())
    } else {
        None
    }
}

pub(crate) fn pearson_from_centered(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>().clamp(-1.0, 1.0)
}

/// `(1 − ρ̂)/2` with ρ̂ the sample Pearson correlation.
pub fn pearson_distance(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::TooShort { min: 2, got: x.len() });
    }
    let cx = centered(x).ok_or_else(|| Error::ZeroVariance("x".into()))?;
    let cy = centered(y).ok_or_else(|| Error::ZeroVariance("y".into()))?;
    Ok((1.0 - pearson_from_centered(&cx, &cy)) / 2.0)
}

pub fn l2_distance_matrix(panel: &Panel) -> DistanceMatrix {
    pairwise(panel.ids(), DistanceKind::L2, |i, j| {
        Ok(l2_unchecked(panel.series(i), panel.series(j)))
    })
    .expect("pair closure is infallible")
}

pub fn pearson_distance_matrix(panel: &Panel) -> Result<DistanceMatrix> {
    let centered = centered_rows(panel)?;
    pairwise(panel.ids(), DistanceKind::Pearson, |i, j| {
        Ok((1.0 - pearson_from_centered(&centered[i], &centered[j])) / 2.0)
    })
}

fn centered_rows(panel: &Panel) -> Result<Vec<Vec<f64>>> {
    panel
        .rows()
        .zip(panel.ids())
        .map(|(row, id)| centered(row).ok_or_else(|| Error::ZeroVariance(id.clone())))
        .collect()
}

/// Rows `x / √T`: squared Euclidean distance equals the empirical L2 distance.
pub fn l2_embedding(panel: &Panel) -> Embedding {
    let scale = 1.0 / (panel.len() as f64).sqrt();
    let rows = panel
        .rows()
        .map(|r| r.iter().map(|v| v * scale).collect())
        .collect();
    Embedding::new(rows, None).expect("panel is rectangular")
}

/// Rows `z / 2` with `z` the centered unit-norm series, so that squared
/// Euclidean distance equals `(1 − ρ̂)/2`.
pub fn pearson_embedding(panel: &Panel) -> Result<Embedding> {
    let rows = centered_rows(panel)?
        .into_iter()
        .map(|r| r.into_iter().map(|v| v / 2.0).collect())
        .collect();
    Embedding::new(rows, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn l2_examples() {
        assert_eq!(l2_distance_empirical(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(l2_distance_empirical(&[0.0, 0.0], &[1.0, 3.0]).unwrap(), 5.0);
        assert!(l2_distance_empirical(&[0.0], &[1.0, 3.0]).is_err());
    }

    #[test]
    fn pearson_examples() {
        let x = [1.0, 2.0, 3.0, 5.0];
        let affine: Vec<f64> = x.iter().map(|v| 2.0 * v + 3.0).collect();
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!(pearson_distance(&x, &affine).unwrap().abs() < 1e-15);
        assert!((pearson_distance(&x, &neg).unwrap() - 1.0).abs() < 1e-15);
        assert!((pearson_distance(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]).unwrap() - 0.25).abs() < 1e-15);
        assert!(matches!(
            pearson_distance(&[1.0, 2.0], &[4.0, 4.0]),
            Err(Error::ZeroVariance(_))
        ));
    }

    #[test]
    fn embeddings_reproduce_matrices() {
        let p = Panel::from_series(vec![
            vec![0.3, -1.2, 2.5, 0.0, 1.1],
            vec![1.0, 0.5, -0.5, 2.0, 0.2],
            vec![-2.0, 0.1, 0.4, 0.9, -0.3],
        ])
        .unwrap();
        let l2 = l2_distance_matrix(&p);
        let el2 = l2_embedding(&p);
        let pe = pearson_distance_matrix(&p).unwrap();
        let epe = pearson_embedding(&p).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((l2.get(i, j) - el2.sq_dist(i, j)).abs() < 1e-12);
                assert!((pe.get(i, j) - epe.sq_dist(i, j)).abs() < 1e-12);
            }
        }
        assert_eq!(
            pe.get(0, 1),
            pearson_distance(p.series(0), p.series(1)).unwrap()
        );
    }
}
