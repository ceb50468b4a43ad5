//! Feature-space metrics: Fréchet distance, diversity and multimodality.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::seq::index;
use rand::Rng as _;

use super::linalg::{matmul, sqrt_psd, symmetric_eigen, symmetrize, trace};
use crate::error::{check_len, Error, Result};
use crate::Rng;

/// Mean and covariance of a feature cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianStats {
    pub mean: Vec<f64>,
    /// Row-major `d × d`.
    pub cov: Vec<f64>,
}

impl GaussianStats {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Sample mean and unbiased covariance; needs at least two rows.
    pub fn from_features(features: &[Vec<f64>]) -> Result<Self> {
        if features.len() < 2 {
            return Err(Error::DegenerateDataset(format!(
                "covariance needs at least two feature vectors, got {}",
                features.len()
            )));
        }
        let d = features[0].len();
        for f in features {
            check_len("feature width", d, f.len())?;
        }
        let n = features.len() as f64;
        let mut mean = vec![0.0; d];
        for f in features {
            for (m, v) in mean.iter_mut().zip(f) {
                *m += v / n;
            }
        }
        let mut cov = vec![0.0; d * d];
        for f in features {
            for i in 0..d {
                let di = f[i] - mean[i];
                for j in i..d {
                    cov[i * d + j] += di * (f[j] - mean[j]);
                }
            }
        }
        for i in 0..d {
            for j in i..d {
                let v = cov[i * d + j] / (n - 1.0);
                cov[i * d + j] = v;
                cov[j * d + i] = v;
            }
        }
        Ok(GaussianStats { mean, cov })
    }

    /// Smallest covariance eigenvalue, for the semidefiniteness check.
    pub fn min_eigenvalue(&self) -> f64 {
        let (vals, _) = symmetric_eigen(&self.cov, self.dim());
        vals.into_iter().fold(f64::INFINITY, f64::min)
    }
}

/// `‖μa − μb‖² + tr(Σa + Σb − 2 (Σa^{1/2} Σb Σa^{1/2})^{1/2})`
pub fn fid(a: &GaussianStats, b: &GaussianStats) -> Result<f64> {
    let d = a.dim();
    check_len("fid dimension", d, b.dim())?;
    check_len("fid covariance size", d * d, a.cov.len())?;
    check_len("fid covariance size", d * d, b.cov.len())?;
    let mean_term: f64 = a.mean.iter().zip(&b.mean).map(|(x, y)| (x - y) * (x - y)).sum();
    let sa = sqrt_psd(&a.cov, d);
    let inner = symmetrize(&matmul(&matmul(&sa, &b.cov, d), &sa, d), d);
    let (vals, _) = symmetric_eigen(&inner, d);
    let cross: f64 = vals.iter().map(|&l| l.max(0.0).sqrt()).sum();
    let value = mean_term + trace(&a.cov, d) + trace(&b.cov, d) - 2.0 * cross;
    Ok(value.max(0.0))
}

/// FID between the feature sets themselves.
pub fn fid_between(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<f64> {
    fid(&GaussianStats::from_features(a)?, &GaussianStats::from_features(b)?)
}

/// Mean over classes of the FID between the rows of `a` and of `b` that carry
/// that class label. Classes missing from either side are skipped.
pub fn class_conditional_fid(
    a: &[Vec<f64>],
    labels_a: &[usize],
    b: &[Vec<f64>],
    labels_b: &[usize],
    class_count: usize,
) -> Result<f64> {
    check_len("label count", a.len(), labels_a.len())?;
    check_len("label count", b.len(), labels_b.len())?;
    let pick = |f: &[Vec<f64>], l: &[usize], c: usize| -> Vec<Vec<f64>> {
        f.iter().zip(l).filter(|(_, &k)| k == c).map(|(v, _)| v.clone()).collect()
    };
    let mut total = 0.0;
    let mut used = 0usize;
    for c in 0..class_count {
        let (fa, fb) = (pick(a, labels_a, c), pick(b, labels_b, c));
        if fa.len() < 2 || fb.len() < 2 {
            continue;
        }
        total += fid_between(&fa, &fb)?;
        used += 1;
    }
    if used == 0 {
        return Err(Error::DegenerateDataset("no class has two or more features on both sides".into()));
    }
    Ok(total / used as f64)
}

/// `size` indices into a pool of `pool`: distinct when the pool is large
/// enough, otherwise drawn with replacement.
pub fn sample_indices(pool: usize, size: usize, rng: &mut Rng) -> Vec<usize> {
    if pool >= size {
        index::sample(rng, pool, size).into_vec()
    } else {
        (0..size).map(|_| rng.random_range(0..pool)).collect()
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn paired_mean_distance(features: &[&Vec<f64>], size: usize, rng: &mut Rng) -> f64 {
    let first = sample_indices(features.len(), size, rng);
    let second = sample_indices(features.len(), size, rng);
    first
        .iter()
        .zip(&second)
        .map(|(&i, &j)| distance(features[i], features[j]))
        .sum::<f64>()
        / size as f64
}

/// Mean distance between two independently drawn subsets of `s_d` features,
/// paired in draw order.
pub fn diversity(features: &[Vec<f64>], s_d: usize, rng: &mut Rng) -> Result<f64> {
    if features.is_empty() || s_d == 0 {
        return Err(Error::InvalidArgument("diversity needs features and a positive subset size".into()));
    }
    let refs: Vec<&Vec<f64>> = features.iter().collect();
    Ok(paired_mean_distance(&refs, s_d, rng))
}

/// [`diversity`] within each class with subsets of `s_l`, averaged over the
/// `class_count` classes, each of which must be present.
pub fn multimodality(
    features: &[Vec<f64>],
    labels: &[usize],
    class_count: usize,
    s_l: usize,
    rng: &mut Rng,
) -> Result<f64> {
    check_len("label count", features.len(), labels.len())?;
    if s_l == 0 || class_count == 0 {
        return Err(Error::InvalidArgument("multimodality needs classes and a positive subset size".into()));
    }
    let mut total = 0.0;
    for c in 0..class_count {
        let members: Vec<&Vec<f64>> = features.iter().zip(labels).filter(|(_, &l)| l == c).map(|(f, _)| f).collect();
        if members.is_empty() {
            return Err(Error::DegenerateDataset(format!("class {c} has no features")));
        }
        total += paired_mean_distance(&members, s_l, rng);
    }
    Ok(total / class_count as f64)
}

/// Mean and 95% half-width `1.96 · σ / √n` (population σ) of repeated runs.
pub fn mean_and_ci95(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, 1.96 * var.sqrt() / n.sqrt())
}
