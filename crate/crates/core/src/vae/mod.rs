//! Recurrent conditional VAE with a learned prior.
//!
//! Three networks share one parameter store:
//!
//! - the posterior reads the current pose and emits `q(z_t | p_{1:t}, a, c_t)`;
//! - the prior reads the previous pose and emits `p(z_t | p_{1:t-1}, a, c_t)`;
//! - the generator reads the previous pose and `z_t`, decodes a root
//!   translation and per-bone rotation vectors, and places the joints with
//!   forward kinematics.
//!
//! Poses enter the networks as [`Normalizer`] features; the generator's
//! output and the reconstruction target are joint coordinates in meters.

mod generate;
mod train;

pub use generate::{generate, generate_batch, GeneratedMotion, GenerationState};
pub use train::{draw_noise, sample_windows, sequence_loss, LossTerms, Sequence, StepStats, Trainer};

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::data::Normalizer;
use crate::error::{check_len, Error, Result};
use crate::neural::{forward_kinematics_op, Bound, GruCell, Linear, Params, Tape, Tensor, Var};
use crate::skeleton::Skeleton;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VaeConfig {
    /// Width of a pose vector, `3J`.
    pub pose_dim: usize,
    /// Bones driven by the generator, `N`.
    pub bone_count: usize,
    pub action_count: usize,
    pub latent_dim: usize,
    pub hidden_dim: usize,
    pub encoder_out: usize,
    pub lambda_kl: f64,
    pub teacher_forcing: f64,
    pub sequence_length: usize,
    pub generator_layers: usize,
}

impl VaeConfig {
    /// Sized for `skeleton` and `action_count` actions, other fields at
    /// their defaults.
    pub fn for_skeleton(skeleton: &Skeleton, action_count: usize) -> Self {
        VaeConfig {
            pose_dim: 3 * skeleton.joint_count(),
            bone_count: skeleton.bone_count(),
            action_count,
            latent_dim: 30,
            hidden_dim: 128,
            encoder_out: 128,
            lambda_kl: 0.01,
            teacher_forcing: 0.6,
            sequence_length: 60,
            generator_layers: 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let dims = [
            ("pose_dim", self.pose_dim),
            ("bone_count", self.bone_count),
            ("action_count", self.action_count),
            ("latent_dim", self.latent_dim),
            ("hidden_dim", self.hidden_dim),
            ("encoder_out", self.encoder_out),
            ("sequence_length", self.sequence_length),
            ("generator_layers", self.generator_layers),
        ];
        if let Some((name, _)) = dims.iter().find(|(_, v)| *v == 0) {
            return Err(Error::InvalidArgument(format!("{name} must be positive")));
        }
        if !self.pose_dim.is_multiple_of(3) {
            return Err(Error::InvalidArgument(format!("pose_dim {} is not a multiple of 3", self.pose_dim)));
        }
        if !(0.0..=1.0).contains(&self.teacher_forcing) {
            return Err(Error::InvalidArgument(format!(
                "teacher_forcing {} is outside [0, 1]",
                self.teacher_forcing
            )));
        }
        if !(self.lambda_kl.is_finite() && self.lambda_kl >= 0.0) {
            return Err(Error::InvalidArgument(format!("lambda_kl {} must be non-negative", self.lambda_kl)));
        }
        Ok(())
    }

    /// Width of the posterior and prior inputs, `D + C + 1`.
    pub fn condition_dim(&self) -> usize {
        self.pose_dim + self.action_count + 1
    }

    /// Width of the decoder output, `3N + 3`.
    pub fn decoder_dim(&self) -> usize {
        3 * self.bone_count + 3
    }
}

/// Encoder, GRU and the two Gaussian heads shared by the posterior and prior.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianNet {
    pub encoder: Linear,
    pub gru: GruCell,
    pub mu: Linear,
    pub logvar: Linear,
}

impl GaussianNet {
    fn new(params: &mut Params, name: &str, config: &VaeConfig, rng: &mut impl Rng) -> Self {
        GaussianNet {
            encoder: Linear::new(params, &format!("{name}.encoder"), config.condition_dim(), config.encoder_out, rng),
            gru: GruCell::new(params, &format!("{name}.gru"), config.encoder_out, config.hidden_dim, rng),
            mu: Linear::new(params, &format!("{name}.mu_net"), config.hidden_dim, config.latent_dim, rng),
            logvar: Linear::new(params, &format!("{name}.logvar_net"), config.hidden_dim, config.latent_dim, rng),
        }
    }

    /// Returns the new hidden state, the mean and the clamped log-variance.
    pub fn step(&self, tape: &mut Tape, bound: &Bound, input: Var, hidden: Var) -> Result<(Var, Var, Var)> {
        let e = self.encoder.forward(tape, bound, input)?;
        let h = self.gru.step(tape, bound, e, hidden)?;
        let mu = self.mu.forward(tape, bound, h)?;
        let lv = self.logvar.forward(tape, bound, h)?;
        let (lo, hi) = crate::neural::gaussian::LOGVAR_RANGE;
        let lv = tape.clamp(lv, lo, hi);
        Ok((h, mu, lv))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub encoder: Linear,
    pub grus: Vec<GruCell>,
    pub decoder: Linear,
    pub lie_output: Linear,
}

/// Tape handles produced by one generator step.
#[derive(Debug, Clone)]
pub struct GeneratorOutput {
    pub hidden: Vec<Var>,
    /// `(B × 3N)` rotation vectors.
    pub lie: Var,
    /// `(B × 3)` root translation in meters.
    pub root: Var,
    /// `(B × 3J)` joint coordinates.
    pub joints: Var,
}

impl Generator {
    fn new(params: &mut Params, config: &VaeConfig, rng: &mut impl Rng) -> Self {
        let input = config.condition_dim() + config.latent_dim;
        let encoder = Linear::new(params, "generator.encoder", input, config.encoder_out, rng);
        let grus = (0..config.generator_layers)
            .map(|l| {
                let width = if l == 0 { config.encoder_out } else { config.hidden_dim };
                GruCell::new(params, &format!("generator.gru.{l}"), width, config.hidden_dim, rng)
            })
            .collect();
        let decoder = Linear::new(params, "generator.decoder", config.hidden_dim, config.decoder_dim(), rng);
        let lie = 3 * config.bone_count;
        let lie_output = Linear::new(params, "generator.lie_output", lie, lie, rng);
        Generator {
            encoder,
            grus,
            decoder,
            lie_output,
        }
    }

    pub fn step(
        &self,
        tape: &mut Tape,
        bound: &Bound,
        input: Var,
        hidden: &[Var],
        normalizer: &Normalizer,
        skeleton: &Skeleton,
    ) -> Result<GeneratorOutput> {
        check_len("generator hidden states", self.grus.len(), hidden.len())?;
        let mut x = self.encoder.forward(tape, bound, input)?;
        let mut next = Vec::with_capacity(hidden.len());
        for (gru, &h) in self.grus.iter().zip(hidden) {
            x = gru.step(tape, bound, x, h)?;
            next.push(x);
        }
        let out = self.decoder.forward(tape, bound, x)?;
        let width = tape.value(out).cols();
        let root_std = tape.slice(out, 0, 3)?;
        let lie_raw = tape.slice(out, 3, width)?;
        let lie = self.lie_output.forward(tape, bound, lie_raw)?;
        let root = normalizer.root_op(tape, root_std)?;
        let joints = forward_kinematics_op(tape, lie, root, skeleton)?;
        Ok(GeneratorOutput {
            hidden: next,
            lie,
            root,
            joints,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VaeModel {
    pub config: VaeConfig,
    pub params: Params,
    pub posterior: GaussianNet,
    pub prior: GaussianNet,
    pub generator: Generator,
    pub normalizer: Normalizer,
}

impl VaeModel {
    pub fn new(config: VaeConfig, normalizer: Normalizer, rng: &mut impl Rng) -> Result<Self> {
        config.validate()?;
        check_len("normalizer width", config.pose_dim, normalizer.dim())?;
        let mut params = Params::new();
        let posterior = GaussianNet::new(&mut params, "posterior", &config, rng);
        let prior = GaussianNet::new(&mut params, "prior", &config, rng);
        let generator = Generator::new(&mut params, &config, rng);
        Ok(VaeModel {
            config,
            params,
            posterior,
            prior,
            generator,
            normalizer,
        })
    }

    /// Scalar parameter count of the tensors whose names start with `prefix.`.
    pub fn parameter_count(&self, prefix: &str) -> usize {
        self.params
            .names()
            .iter()
            .zip(self.params.values())
            .filter(|(n, _)| n.strip_prefix(prefix).is_some_and(|rest| rest.starts_with('.')))
            .map(|(_, v)| v.len())
            .sum()
    }

    /// Network input `[features, one-hot(a), c_t]` for a batch.
    pub fn condition(&self, tape: &mut Tape, pose_features: Var, actions: &[usize], c_t: f64) -> Result<Var> {
        let c = self.config.action_count;
        check_len("condition batch", tape.value(pose_features).rows(), actions.len())?;
        check_len("condition pose width", self.config.pose_dim, tape.value(pose_features).cols())?;
        let mut extra = Vec::with_capacity(actions.len() * (c + 1));
        for &a in actions {
            if a >= c {
                return Err(Error::InvalidArgument(format!("action id {a} is outside 0..{c}")));
            }
            extra.extend((0..c).map(|k| if k == a { 1.0 } else { 0.0 }));
            extra.push(c_t);
        }
        let extra = tape.constant(Tensor::new(actions.len(), c + 1, extra)?);
        tape.concat(&[pose_features, extra])
    }

    /// Advances the posterior on the current pose `p_t`.
    pub fn posterior_step(
        &self,
        tape: &mut Tape,
        bound: &Bound,
        pose_features: Var,
        actions: &[usize],
        c_t: f64,
        hidden: Var,
    ) -> Result<(Var, Var, Var)> {
        let input = self.condition(tape, pose_features, actions, c_t)?;
        self.posterior.step(tape, bound, input, hidden)
    }

    /// Advances the prior on the previous pose `p_{t-1}` (zeros at `t = 1`).
    pub fn prior_step(
        &self,
        tape: &mut Tape,
        bound: &Bound,
        previous_features: Var,
        actions: &[usize],
        c_t: f64,
        hidden: Var,
    ) -> Result<(Var, Var, Var)> {
        let input = self.condition(tape, previous_features, actions, c_t)?;
        self.prior.step(tape, bound, input, hidden)
    }

    /// Decodes the next pose from `p_{t-1}` and `z_t`.
    #[allow(clippy::too_many_arguments)]
    pub fn generator_step(
        &self,
        tape: &mut Tape,
        bound: &Bound,
        previous_features: Var,
        actions: &[usize],
        c_t: f64,
        z: Var,
        hidden: &[Var],
        skeleton: &Skeleton,
    ) -> Result<GeneratorOutput> {
        check_len("generator bone count", self.config.bone_count, skeleton.bone_count())?;
        check_len("latent width", self.config.latent_dim, tape.value(z).cols())?;
        let cond = self.condition(tape, previous_features, actions, c_t)?;
        let input = tape.concat(&[cond, z])?;
        self.generator.step(tape, bound, input, hidden, &self.normalizer, skeleton)
    }

    /// Zero hidden states as tape constants: posterior, prior, generator stack.
    pub fn initial_hidden(&self, tape: &mut Tape, batch: usize) -> (Var, Var, Vec<Var>) {
        let h = self.config.hidden_dim;
        let q = tape.constant(Tensor::zeros(batch, h));
        let p = tape.constant(Tensor::zeros(batch, h));
        let g = (0..self.config.generator_layers)
            .map(|_| tape.constant(Tensor::zeros(batch, h)))
            .collect();
        (q, p, g)
    }
}

#[cfg(test)]
mod tests;
