use motiongen_core::eval::{diversity, fid, fid_between, mean_and_ci95, multimodality, GaussianStats};
use motiongen_core::rng_from_seed;
use proptest::prelude::*;
use rand::Rng;

type Matrix = Vec<Vec<f64>>;

fn identity(n: usize) -> Matrix {
    (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
}

fn mul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect())
        .collect()
}

fn inverse(a: &Matrix) -> Matrix {
    let n = a.len();
    let mut m: Matrix = a.iter().zip(identity(n)).map(|(r, e)| r.iter().copied().chain(e).collect()).collect();
    for c in 0..n {
        let p = (c..n).max_by(|&x, &y| m[x][c].abs().total_cmp(&m[y][c].abs())).unwrap();
        m.swap(c, p);
        let d = m[c][c];
        m[c].iter_mut().for_each(|v| *v /= d);
        for r in 0..n {
            if r != c {
                let f = m[r][c];
                let pivot = m[c].clone();
                m[r].iter_mut().zip(&pivot).for_each(|(v, p)| *v -= f * p);
            }
        }
    }
    m.into_iter().map(|r| r[n..].to_vec()).collect()
}

/// Principal square root of a matrix with positive real spectrum.
fn denman_beavers_sqrt(a: &Matrix) -> Matrix {
    let n = a.len();
    let (mut y, mut z) = (a.clone(), identity(n));
    for _ in 0..100 {
        let (yi, zi) = (inverse(&y), inverse(&z));
        let ny: Matrix = (0..n).map(|i| (0..n).map(|j| 0.5 * (y[i][j] + zi[i][j])).collect()).collect();
        let nz: Matrix = (0..n).map(|i| (0..n).map(|j| 0.5 * (z[i][j] + yi[i][j])).collect()).collect();
        let step: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| (ny[i][j] - y[i][j]).abs()).sum();
        y = ny;
        z = nz;
        if step < 1e-15 {
            break;
        }
    }
    y
}

fn oracle_fid(mu_a: &[f64], ca: &Matrix, mu_b: &[f64], cb: &Matrix) -> f64 {
    let n = mu_a.len();
    let root = denman_beavers_sqrt(&mul(ca, cb));
    let mean: f64 = mu_a.iter().zip(mu_b).map(|(x, y)| (x - y).powi(2)).sum();
    mean + (0..n).map(|i| ca[i][i] + cb[i][i] - 2.0 * root[i][i]).sum::<f64>()
}

fn random_spd(n: usize, rng: &mut impl Rng) -> Matrix {
    let a: Matrix = (0..n).map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * a[j][k]).sum::<f64>() + if i == j { 0.1 } else { 0.0 }).collect())
        .collect()
}

fn stats(mean: &[f64], cov: &Matrix) -> GaussianStats {
    GaussianStats {
        mean: mean.to_vec(),
        cov: cov.iter().flatten().copied().collect(),
    }
}

#[test]
fn fid_one_dimensional_closed_forms() {
    let unit = stats(&[0.0], &vec![vec![1.0]]);
    assert!(fid(&unit, &unit).unwrap().abs() < 1e-10);
    assert!((fid(&unit, &stats(&[1.0], &vec![vec![1.0]])).unwrap() - 1.0).abs() < 1e-10);
    // (μa − μb)² + (σa − σb)²
    let v = fid(&stats(&[0.5], &vec![vec![4.0]]), &stats(&[-1.5], &vec![vec![9.0]])).unwrap();
    assert!((v - 5.0).abs() < 1e-10);
}

#[test]
fn fid_matches_iterative_square_root_oracle() {
    let mut rng = rng_from_seed(77);
    for _ in 0..50 {
        let (ca, cb) = (random_spd(4, &mut rng), random_spd(4, &mut rng));
        let ma: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mb: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
        let got = fid(&stats(&ma, &ca), &stats(&mb, &cb)).unwrap();
        let want = oracle_fid(&ma, &ca, &mb, &cb);
        assert!((got - want).abs() < 1e-8, "{got} vs {want}");
    }
}

proptest! {
    #[test]
    fn fid_is_a_symmetric_nonnegative_divergence(seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let a: Vec<Vec<f64>> = (0..12).map(|_| (0..3).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
        let b: Vec<Vec<f64>> = (0..9).map(|_| (0..3).map(|_| rng.random_range(-1.0..3.0)).collect()).collect();
        let ab = fid_between(&a, &b).unwrap();
        prop_assert!(ab >= 0.0);
        prop_assert!((ab - fid_between(&b, &a).unwrap()).abs() < 1e-8);
        prop_assert!(fid_between(&a, &a).unwrap() < 1e-8);
        prop_assert!(GaussianStats::from_features(&a).unwrap().min_eigenvalue() > -1e-8);
    }

    #[test]
    fn diversity_is_homogeneous(seed in any::<u64>(), k in 0.1f64..10.0) {
        let mut rng = rng_from_seed(seed);
        let f: Vec<Vec<f64>> = (0..8).map(|_| (0..4).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let scaled: Vec<Vec<f64>> = f.iter().map(|v| v.iter().map(|x| k * x).collect()).collect();
        let a = diversity(&f, 5, &mut rng_from_seed(seed ^ 1)).unwrap();
        let b = diversity(&scaled, 5, &mut rng_from_seed(seed ^ 1)).unwrap();
        prop_assert!(a >= 0.0);
        prop_assert!((b - k * a).abs() < 1e-9 * (1.0 + b));
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Every ordered draw of `size` distinct indices from `0..pool`.
fn ordered_draws(pool: usize, size: usize) -> Vec<Vec<usize>> {
    if size == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for rest in ordered_draws(pool, size - 1) {
        for i in (0..pool).filter(|i| !rest.contains(i)) {
            let mut d = rest.clone();
            d.push(i);
            out.push(d);
        }
    }
    out
}

/// Mean and variance of the paired-subset statistic over all equally likely
/// pairs of draws without replacement.
fn exhaustive(features: &[Vec<f64>], size: usize) -> (f64, f64) {
    let draws = ordered_draws(features.len(), size);
    let values: Vec<f64> = draws
        .iter()
        .flat_map(|a| draws.iter().map(move |b| (a, b)))
        .map(|(a, b)| a.iter().zip(b).map(|(&i, &j)| dist(&features[i], &features[j])).sum::<f64>() / size as f64)
        .collect();
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (mean, values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n)
}

const RUNS: usize = 4000;

fn monte_carlo(mut f: impl FnMut(u64) -> f64) -> f64 {
    (0..RUNS as u64).map(&mut f).sum::<f64>() / RUNS as f64
}

#[test]
fn diversity_of_two_points_is_half_their_distance() {
    let f = vec![vec![0.0, 0.0], vec![3.0, 4.0]];
    for size in [1, 2] {
        let (mean, var) = exhaustive(&f, size);
        assert!((mean - 2.5).abs() < 1e-12);
        let estimate = monte_carlo(|s| diversity(&f, size, &mut rng_from_seed(s)).unwrap());
        assert!((estimate - mean).abs() < 3.0 * (var / RUNS as f64).sqrt(), "{estimate} vs {mean}");
    }
}

#[test]
fn diversity_matches_exhaustive_expectation_on_three_points() {
    let f = vec![vec![0.0, 1.0], vec![2.0, -1.0], vec![0.5, 4.0]];
    for size in [1, 2, 3] {
        let (mean, var) = exhaustive(&f, size);
        let estimate = monte_carlo(|s| diversity(&f, size, &mut rng_from_seed(s)).unwrap());
        assert!((estimate - mean).abs() < 3.0 * (var / RUNS as f64).sqrt(), "size {size}: {estimate} vs {mean}");
    }
}

#[test]
fn multimodality_matches_exhaustive_expectation() {
    let f = vec![vec![0.0], vec![1.0], vec![4.0], vec![10.0], vec![12.0]];
    let labels = [0, 0, 0, 1, 1];
    let (m0, v0) = exhaustive(&f[..3], 2);
    let (m1, v1) = exhaustive(&f[3..], 2);
    let mean = 0.5 * (m0 + m1);
    let sigma = (0.25 * (v0 + v1) / RUNS as f64).sqrt();
    let estimate = monte_carlo(|s| multimodality(&f, &labels, 2, 2, &mut rng_from_seed(s)).unwrap());
    assert!((estimate - mean).abs() < 3.0 * sigma, "{estimate} vs {mean}");
}

#[test]
fn oversized_subsets_fall_back_to_replacement() {
    // independent uniform pairs: expectation is the mean over all ordered pairs
    let f = vec![vec![0.0], vec![1.0], vec![4.0]];
    let pairs: Vec<f64> = (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).map(|(i, j)| dist(&f[i], &f[j])).collect();
    let mean = pairs.iter().sum::<f64>() / 9.0;
    let var = pairs.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 9.0 / 5.0;
    let estimate = monte_carlo(|s| diversity(&f, 5, &mut rng_from_seed(s)).unwrap());
    assert!((estimate - mean).abs() < 3.0 * (var / RUNS as f64).sqrt(), "{estimate} vs {mean}");
}

#[test]
fn interval_uses_population_spread() {
    let (m, h) = mean_and_ci95(&[1.0, 2.0, 3.0, 4.0]);
    assert_eq!(m, 2.5);
    assert!((h - 1.96 * 1.25f64.sqrt() / 2.0).abs() < 1e-15);
}
