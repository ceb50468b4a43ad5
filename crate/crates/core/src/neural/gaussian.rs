//! Diagonal-Gaussian latent utilities.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use super::tape::{Tape, Var};
use super::tensor::Tensor;
use crate::error::Result;

/// Log-variances are clamped into this range before exponentiation.
pub const LOGVAR_RANGE: (f64, f64) = (-10.0, 10.0);

/// Tensor of independent standard-normal draws.
pub fn standard_normal(rows: usize, cols: usize, rng: &mut impl Rng) -> Tensor {
    let data: Vec<f64> = (0..rows * cols).map(|_| rng.sample(StandardNormal)).collect();
    Tensor::new(rows, cols, data).expect("shape")
}

/// `z = μ + exp(logvar / 2) ⊙ ε` with `ε ~ N(0, I)` drawn from `rng`.
///
/// `ε` is recorded as a constant, so gradients reach `μ` and `logvar` only.
pub fn reparameterize(tape: &mut Tape, mu: Var, logvar: Var, rng: &mut impl Rng) -> Result<Var> {
    let (rows, cols) = tape.value(mu).shape();
    let eps = tape.constant(standard_normal(rows, cols, rng));
    reparameterize_with(tape, mu, logvar, eps)
}

/// [`reparameterize`] with caller-provided noise.
pub fn reparameterize_with(tape: &mut Tape, mu: Var, logvar: Var, eps: Var) -> Result<Var> {
    let logvar = tape.clamp(logvar, LOGVAR_RANGE.0, LOGVAR_RANGE.1);
    let half = tape.scale(logvar, 0.5);
    let std = tape.exp(half);
    let noise = tape.mul(std, eps)?;
    tape.add(mu, noise)
}

/// `KL(N(μ_q, e^{lv_q}) ‖ N(μ_p, e^{lv_p}))` summed over every entry.
pub fn gaussian_kl(tape: &mut Tape, mu_q: Var, logvar_q: Var, mu_p: Var, logvar_p: Var) -> Result<Var> {
    let diff = tape.sub(mu_q, mu_p)?;
    let diff_sq = tape.mul(diff, diff)?;
    let var_q = tape.exp(logvar_q);
    let numerator = tape.add(var_q, diff_sq)?;
    let neg_lv_p = tape.scale(logvar_p, -1.0);
    let inv_var_p = tape.exp(neg_lv_p);
    let ratio = tape.mul(numerator, inv_var_p)?;
    let log_ratio = tape.sub(logvar_p, logvar_q)?;
    let inner = tape.add(log_ratio, ratio)?;
    let inner = tape.add_scalar(inner, -1.0);
    let total = tape.sum(inner);
    Ok(tape.scale(total, 0.5))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng_from_seed;

    fn kl_of(mu_q: &[f64], lv_q: &[f64], mu_p: &[f64], lv_p: &[f64]) -> f64 {
        let mut tape = Tape::new();
        let v = [mu_q, lv_q, mu_p, lv_p].map(|x| tape.constant(Tensor::row_vector(x)));
        let kl = gaussian_kl(&mut tape, v[0], v[1], v[2], v[3]).unwrap();
        tape.value(kl).item()
    }

    #[test]
    fn kl_closed_forms() {
        assert!(kl_of(&[0.3, -1.0], &[0.2, -0.5], &[0.3, -1.0], &[0.2, -0.5]).abs() < 1e-12);
        let two_dims = kl_of(&[0.0, 0.0], &[0.0, 0.0], &[1.0, 1.0], &[0.0, 0.0]);
        assert!((two_dims - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_variance_limit_returns_mean() {
        let mut tape = Tape::new();
        let mu = tape.constant(Tensor::row_vector(&[1.5, -2.0]));
        let lv = tape.constant(Tensor::row_vector(&[-1e6, -1e6]));
        let z = reparameterize(&mut tape, mu, lv, &mut rng_from_seed(4)).unwrap();
        for (a, b) in tape.value(z).data().iter().zip([1.5, -2.0]) {
            // clamped at −10: σ = e^{-5} ≈ 6.7e-3
            assert!((a - b).abs() < 0.05);
        }
    }

    #[test]
    fn fixed_seed_is_bit_identical() {
        let draw = || {
            let mut tape = Tape::new();
            let mu = tape.constant(Tensor::row_vector(&[0.1, 0.2, 0.3]));
            let lv = tape.constant(Tensor::row_vector(&[0.0, 1.0, -1.0]));
            let z = reparameterize(&mut tape, mu, lv, &mut rng_from_seed(99)).unwrap();
            tape.value(z).clone()
        };
        assert_eq!(draw(), draw());
    }

    #[test]
    fn gradient_skips_noise() {
        let mut tape = Tape::new();
        let mu = tape.leaf(Tensor::row_vector(&[0.0]), true);
        let lv = tape.leaf(Tensor::row_vector(&[0.4]), true);
        let eps = tape.constant(Tensor::row_vector(&[1.3]));
        let z = reparameterize_with(&mut tape, mu, lv, eps).unwrap();
        let g = tape.backward(z).unwrap();
        assert_eq!(g.get(mu).unwrap().item(), 1.0);
        let expected = 0.5 * (0.2f64).exp() * 1.3;
        assert!((g.get(lv).unwrap().item() - expected).abs() < 1e-15);
        assert!(g.get(eps).is_none());
    }
}
