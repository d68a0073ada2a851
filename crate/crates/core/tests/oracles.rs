//! Checks against independent oracles: quadrature, Monte-Carlo and exact
//! integer arithmetic.

use std::time::Instant;

use gnpr::metrics::gaussian::{
    gpr_gaussian_distance, l2_gaussian_closed_form, pearson_to_spearman_gaussian, GaussianParams,
};
use gnpr::metrics::gnpr::{dep_distance_sq, dist_distance_sq};
use gnpr::metrics::pearson_distance;
use gnpr::repr::{average_ranks, histogram_density, shared_grid};
use gnpr::synth::{sample, DistributionCode};
use gnpr::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn theta(v: f64) -> ThetaWeight {
    ThetaWeight::new(v).unwrap()
}

fn normal_pdf(x: f64, mean: f64, std: f64) -> f64 {
    let z = (x - mean) / std;
    (-0.5 * z * z).exp() / (std * (2.0 * std::f64::consts::PI).sqrt())
}

fn correlated_gaussians(n: usize, rho: f64, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = (1.0 - rho * rho).sqrt();
    (0..n)
        .map(|_| {
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            (a, rho * a + c * b)
        })
        .unzip()
}

fn moments(xs: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
    (mean, var, m4 / (var * var) - 3.0)
}

fn draws(dist: DistributionCode, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| sample(&dist, &mut rng)).collect()
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    1.0 - 2.0 * pearson_distance(x, y).unwrap()
}

#[test]
fn gaussian_hellinger_matches_quadrature() {
    // Simpson's rule on ½∫(√f − √g)².
    let (a, b, steps) = (-15.0, 16.0, 20_000);
    let h = (b - a) / steps as f64;
    let integrand = |x: f64| {
        let d = normal_pdf(x, 0.0, 1.0).sqrt() - normal_pdf(x, 1.0, 1.0).sqrt();
        0.5 * d * d
    };
    let mut sum = integrand(a) + integrand(b);
    for k in 1..steps {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * integrand(a + k as f64 * h);
    }
    let quad = sum * h / 3.0;
    let g0 = GaussianParams::new(0.0, 1.0).unwrap();
    let g1 = GaussianParams::new(1.0, 1.0).unwrap();
    let d = gpr_gaussian_distance(&g0, &g1, 0.0, theta(0.0)).unwrap();
    assert!((d * d - quad).abs() < 1e-10, "{} vs {quad}", d * d);
    assert!((quad.sqrt() - 0.34278).abs() < 1e-5);
}

#[test]
fn l2_closed_form_matches_monte_carlo() {
    let n = 1_000_000;
    let (a, b) = correlated_gaussians(n, 0.5, 11);
    let mc = a
        .iter()
        .zip(&b)
        .map(|(u, v)| {
            let x = u;
            let y = 1.0 + 2.0 * v;
            (x - y) * (x - y)
        })
        .sum::<f64>()
        / n as f64;
    let cf = l2_gaussian_closed_form(
        &GaussianParams::new(0.0, 1.0).unwrap(),
        &GaussianParams::new(1.0, 2.0).unwrap(),
        0.5,
    )
    .unwrap();
    assert_eq!(cf, 4.0);
    assert!((mc - cf).abs() / cf < 0.02, "monte-carlo {mc}");
}

#[test]
fn spearman_converter_matches_simulation() {
    let (x, y) = correlated_gaussians(1_000_000, 0.5, 3);
    let rho_s = 1.0 - 2.0 * dep_distance_sq(&average_ranks(&x), &average_ranks(&y)).unwrap();
    let predicted = pearson_to_spearman_gaussian(0.5).unwrap();
    assert!((rho_s - predicted).abs() < 2e-3, "{rho_s} vs {predicted}");
}

#[test]
fn sampler_moments() {
    let n = 1_000_000;
    let (mean, var, _) = moments(&draws(DistributionCode::STANDARD_NORMAL, n, 1));
    assert!(mean.abs() < 0.005 && (var - 1.0).abs() < 0.01, "{mean} {var}");

    let (mean, var, _) = moments(&draws(DistributionCode::normal_with_variance(0.0, 2.0), n, 2));
    assert!(mean.abs() < 0.01 && (var - 2.0).abs() < 0.02, "{mean} {var}");

    let (mean, var, kurt) = moments(&draws(DistributionCode::Laplace, n, 3));
    assert!(mean.abs() < 0.005 && (var - 1.0).abs() < 0.01, "{mean} {var}");
    assert!((kurt - 3.0).abs() < 0.3, "laplace excess kurtosis {kurt}");

    let (mean, var, kurt) = moments(&draws(DistributionCode::StudentT3Scaled, n, 4));
    assert!(mean.abs() < 0.01 && (var - 1.0).abs() < 0.05, "{mean} {var}");
    assert!(kurt > 5.0, "student excess kurtosis {kurt}");
}

#[test]
fn factor_model_covariance() {
    let spec = SyntheticSpec {
        name: None,
        n: 6,
        t: 10_000,
        k: 1,
        d: 1,
        beta: 0.5,
        factor_dist: DistributionCode::STANDARD_NORMAL,
        noise_dists: vec![DistributionCode::STANDARD_NORMAL],
    };
    let lp = generate(&spec, 5).unwrap();
    let expected = 0.25 / 1.25;
    let mut rs = Vec::new();
    for i in 0..6 {
        for j in (i + 1)..6 {
            rs.push(pearson(lp.panel.series(i), lp.panel.series(j)));
        }
    }
    let mean = rs.iter().sum::<f64>() / rs.len() as f64;
    assert!((mean - expected).abs() < 0.02, "{mean}");
    // single pairs fluctuate with sd ≈ (1 − ρ²)/√T ≈ 0.01
    assert!(rs.iter().all(|r| (r - expected).abs() < 0.05), "{rs:?}");

    let independent = SyntheticSpec { beta: 0.0, k: 2, ..spec };
    let lp = generate(&independent, 6).unwrap();
    let bound = 3.0 / (independent.t as f64).sqrt();
    for i in 0..6 {
        for j in (i + 1)..6 {
            assert!(pearson(lp.panel.series(i), lp.panel.series(j)).abs() < bound);
        }
    }
}

#[test]
fn distribution_clusters_are_closer_in_hellinger() {
    let lp = generate(&preset("A", Some(16), None).unwrap(), 9).unwrap();
    let repr = build_representation(&lp.panel, DEFAULT_BINS).unwrap();
    let labels = lp.labels.labels();
    let (mut same, mut ns, mut cross, mut nc) = (0.0, 0, 0.0, 0);
    for i in 0..16 {
        for j in (i + 1)..16 {
            let h = dist_distance_sq(&repr.densities()[i], &repr.densities()[j]).unwrap();
            if labels[i] == labels[j] {
                same += h;
                ns += 1;
            } else {
                cross += h;
                nc += 1;
            }
        }
    }
    assert!(same / (ns as f64) < cross / (nc as f64));
}

#[test]
fn rank_distance_is_exact_spearman() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for t in [2usize, 3, 7, 50, 501, 4000] {
        let x: Vec<f64> = (0..t).map(|_| rng.random()).collect();
        let y: Vec<f64> = (0..t).map(|_| rng.random()).collect();
        let (rx, ry) = (average_ranks(&x), average_ranks(&y));
        // ρ_S = 1 − 6Σd²/(T(T²−1)) in exact integers.
        let sum_d2: i128 = rx
            .iter()
            .zip(&ry)
            .map(|(a, b)| {
                let d = *a as i128 - *b as i128;
                d * d
            })
            .sum();
        let t = t as i128;
        let (num, den) = (3 * sum_d2, t * (t * t - 1));
        let exact = num as f64 / den as f64;
        assert_eq!(dep_distance_sq(&rx, &ry).unwrap(), exact);
        // Pearson on ranks agrees up to rounding.
        assert!((exact - pearson_distance(&rx, &ry).unwrap()).abs() < 1e-12);
    }
}

#[test]
fn embedding_reproduces_squared_distances() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let series: Vec<Vec<f64>> = (0..10)
        .map(|i| (0..500).map(|_| rng.sample::<f64, _>(StandardNormal) * (1.0 + i as f64 * 0.1)).collect())
        .collect();
    let repr = build_representation(&Panel::from_series(series).unwrap(), DEFAULT_BINS).unwrap();
    let m = distance_matrix(&repr, theta(0.5));
    let e = gnpr_embedding(&repr, theta(0.5));
    let mut worst = 0.0f64;
    for i in 0..10 {
        for j in 0..10 {
            worst = worst.max((e.sq_dist(i, j) - m.get(i, j).powi(2)).abs());
        }
    }
    assert!(worst < 1e-10, "{worst}");
}

#[test]
fn triangle_inequality_on_random_panels() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..5 {
        let series: Vec<Vec<f64>> = (0..8)
            .map(|_| (0..100).map(|_| rng.sample::<f64, _>(StandardNormal).powi(3)).collect())
            .collect();
        let repr = build_representation(&Panel::from_series(series).unwrap(), 20).unwrap();
        for th in [0.0, 0.3, 1.0] {
            let m = distance_matrix(&repr, theta(th));
            for i in 0..8 {
                for j in 0..8 {
                    for k in 0..8 {
                        assert!(m.get(i, j) <= m.get(i, k) + m.get(k, j) + 1e-12);
                    }
                }
            }
        }
    }
}

#[test]
fn scaling_and_reflection() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let v: Vec<f64> = (0..1000).map(|_| rng.sample(StandardNormal)).collect();
    let doubled: Vec<f64> = v.iter().map(|x| 2.0 * x).collect();
    assert_eq!(dep_distance_sq(&average_ranks(&v), &average_ranks(&doubled)).unwrap(), 0.0);

    // A sample closed under u ↦ 1 − u has the same histogram as its reflection.
    let half: Vec<f64> = (0..500).map(|_| rng.random_range(0.0..0.5)).collect();
    let u: Vec<f64> = half.iter().flat_map(|&x| [x, 1.0 - x]).collect();
    let reflected: Vec<f64> = u.iter().map(|x| 1.0 - x).collect();
    let p = Panel::from_series(vec![u, reflected]).unwrap();
    let grid = shared_grid(&p, 50).unwrap();
    let a = histogram_density(p.series(0), &grid).unwrap();
    let b = histogram_density(p.series(1), &grid).unwrap();
    assert_eq!(dist_distance_sq(&a, &b).unwrap(), 0.0);
}

#[test]
fn hellinger_between_samples_of_one_law_vanishes_with_t() {
    let t = 100_000;
    let x = draws(DistributionCode::STANDARD_NORMAL, t, 31);
    let y = draws(DistributionCode::STANDARD_NORMAL, t, 32);
    let z = draws(DistributionCode::StudentT3Scaled, t, 33);
    let p = Panel::from_series(vec![x, y, z]).unwrap();
    for bins in [50, 100, 200] {
        let repr = build_representation(&p, bins).unwrap();
        let d = repr.densities();
        let same = dist_distance_sq(&d[0], &d[1]).unwrap();
        let other = dist_distance_sq(&d[0], &d[2]).unwrap();
        assert!(same < 2e-3, "B={bins}: {same}");
        assert!(other > 5.0 * same, "B={bins}: {other} vs {same}");
    }
}

#[test]
fn matrix_is_independent_of_thread_count() {
    let lp = generate(&preset("C", Some(40), Some(800)).unwrap(), 2).unwrap();
    let repr = build_representation(&lp.panel, DEFAULT_BINS).unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                let r = build_representation(&lp.panel, DEFAULT_BINS).unwrap();
                distance_matrix(&r, theta(0.5))
            })
    };
    let one = run(1);
    assert_eq!(one, run(8));
    assert_eq!(one, distance_matrix(&repr, theta(0.5)));
}

#[test]
fn preset_c_matrix_shows_blocks_within_budget() {
    let lp = generate(&preset("C", None, None).unwrap(), 1).unwrap();
    let start = Instant::now();
    let repr = build_representation(&lp.panel, DEFAULT_BINS).unwrap();
    let m = distance_matrix(&repr, theta(0.5));
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 60.0, "{elapsed} s");

    let labels = lp.labels.labels();
    let q = lp.labels.n_clusters();
    let mut sums = vec![vec![(0.0, 0usize); q]; q];
    for i in 0..m.n() {
        for j in 0..m.n() {
            if i != j {
                let cell = &mut sums[labels[i]][labels[j]];
                cell.0 += m.get(i, j);
                cell.1 += 1;
            }
        }
    }
    // Each diagonal block is the tightest in its row of blocks.
    for a in 0..q {
        let mean = |b: usize| sums[a][b].0 / sums[a][b].1 as f64;
        for b in (0..q).filter(|&b| b != a) {
            assert!(mean(a) < mean(b), "block ({a},{a}) vs ({a},{b})");
        }
    }
}
