//! Training objective and the optimizer loop.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng as _;

use super::VaeModel;
use crate::data::PreparedMotion;
use crate::error::{check_len, Error, Result};
use crate::neural::gaussian::standard_normal;
use crate::neural::{gaussian_kl, reparameterize_with, AdamConfig, AdamState, Bound, Tape, Tensor, Var};
use crate::skeleton::Skeleton;
use crate::Rng;

/// A training window: `T` joint-coordinate rows and an action id.
#[derive(Debug, Clone, Copy)]
pub struct Sequence<'a> {
    pub joints: &'a [Vec<f64>],
    pub action: usize,
}

/// Loss handles on a tape, all averaged over the batch.
#[derive(Debug, Clone, Copy)]
pub struct LossTerms {
    pub total: Var,
    /// `Σ_t ‖p̂_t − p_t‖²`
    pub reconstruction: Var,
    /// `Σ_t KL(q ‖ p)`
    pub kl: Var,
}

/// One `(B × Z)` standard-normal draw per time step.
pub fn draw_noise(batch: usize, length: usize, latent: usize, rng: &mut Rng) -> Vec<Tensor> {
    (0..length).map(|_| standard_normal(batch, latent, rng)).collect()
}

/// Random `length`-frame windows from motions at least that long.
pub fn sample_windows<'a>(
    motions: &'a [PreparedMotion],
    batch: usize,
    length: usize,
    rng: &mut Rng,
) -> Result<Vec<Sequence<'a>>> {
    let pool: Vec<&PreparedMotion> = motions.iter().filter(|m| m.len() >= length).collect();
    if pool.is_empty() {
        return Err(Error::DegenerateDataset(format!("no motion has {length} or more frames")));
    }
    Ok((0..batch)
        .map(|_| {
            let m = pool[rng.random_range(0..pool.len())];
            let start = rng.random_range(0..=m.len() - length);
            Sequence {
                joints: &m.joints[start..start + length],
                action: m.action_id,
            }
        })
        .collect())
}

fn frame_tensor<F>(batch: &[Sequence], t: usize, f: F) -> Result<Tensor>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let rows: Vec<Vec<f64>> = batch.iter().map(|s| f(&s.joints[t])).collect();
    Tensor::from_rows(&rows)
}

/// The objective on a batch of equal-length windows.
///
/// `teacher[b]` selects ground-truth previous poses for sequence `b`'s
/// generator input; the posterior and prior always read ground truth.
/// `noise[t]` is the reparameterization draw at step `t`.
pub fn sequence_loss(
    model: &VaeModel,
    tape: &mut Tape,
    bound: &Bound,
    batch: &[Sequence],
    teacher: &[bool],
    noise: &[Tensor],
    skeleton: &Skeleton,
) -> Result<LossTerms> {
    let b = batch.len();
    if b == 0 {
        return Err(Error::InvalidArgument("empty batch".into()));
    }
    check_len("teacher forcing mask", b, teacher.len())?;
    let length = batch[0].joints.len();
    if length == 0 {
        return Err(Error::InvalidArgument("sequences must have at least one frame".into()));
    }
    for s in batch {
        check_len("sequence length", length, s.joints.len())?;
        for row in s.joints {
            check_len("pose width", model.config.pose_dim, row.len())?;
        }
    }
    check_len("noise steps", length, noise.len())?;
    let actions: Vec<usize> = batch.iter().map(|s| s.action).collect();
    let norm = &model.normalizer;
    let all_teacher = teacher.iter().all(|&t| t);
    let no_teacher = teacher.iter().all(|&t| !t);

    let (mut hq, mut hp, mut hg) = model.initial_hidden(tape, b);
    let zero_pose = tape.constant(Tensor::zeros(b, model.config.pose_dim));
    let mut truth_prev = zero_pose;
    let mut generated_prev: Option<Var> = None;
    let mut recon_terms = Vec::with_capacity(length);
    let mut kl_terms = Vec::with_capacity(length);
    for (t, step_noise) in noise.iter().enumerate().take(length) {
        let c_t = (t + 1) as f64 / length as f64;
        let truth_features = tape.constant(frame_tensor(batch, t, |r| norm.features(r))?);
        let truth_joints = tape.constant(frame_tensor(batch, t, |r| r.to_vec())?);

        let (q, mu_q, lv_q) = model.posterior_step(tape, bound, truth_features, &actions, c_t, hq)?;
        let (p, mu_p, lv_p) = model.prior_step(tape, bound, truth_prev, &actions, c_t, hp)?;
        hq = q;
        hp = p;
        let eps = tape.constant(step_noise.clone());
        let z = reparameterize_with(tape, mu_q, lv_q, eps)?;

        let previous = match generated_prev {
            None => zero_pose,
            Some(_) if all_teacher => truth_prev,
            Some(g) => {
                let g = norm.features_op(tape, g)?;
                if no_teacher {
                    g
                } else {
                    tape.select_rows(teacher, truth_prev, g)?
                }
            }
        };
        let out = model.generator_step(tape, bound, previous, &actions, c_t, z, &hg, skeleton)?;
        hg = out.hidden;
        recon_terms.push(tape.squared_distance(out.joints, truth_joints)?);
        kl_terms.push(gaussian_kl(tape, mu_q, lv_q, mu_p, lv_p)?);
        generated_prev = Some(out.joints);
        truth_prev = truth_features;
    }
    let recon = sum_all(tape, &recon_terms)?;
    let kl = sum_all(tape, &kl_terms)?;
    let inv_b = 1.0 / b as f64;
    let reconstruction = tape.scale(recon, inv_b);
    let kl = tape.scale(kl, inv_b);
    let weighted = tape.scale(kl, model.config.lambda_kl);
    let total = tape.add(reconstruction, weighted)?;
    Ok(LossTerms {
        total,
        reconstruction,
        kl,
    })
}

fn sum_all(tape: &mut Tape, terms: &[Var]) -> Result<Var> {
    let mut acc = terms[0];
    for &v in &terms[1..] {
        acc = tape.add(acc, v)?;
    }
    Ok(acc)
}

/// Loss values from one optimizer step, averaged over the batch.
#[derive(Debug, Clone, PartialEq)]
pub struct StepStats {
    pub step: u64,
    pub loss: f64,
    pub reconstruction: f64,
    pub kl: f64,
    /// Which sequences fed ground truth to the generator.
    pub teacher_forced: Vec<bool>,
}

/// A model plus its optimizer state.
#[derive(Debug, Clone, PartialEq)]
pub struct Trainer {
    pub model: VaeModel,
    pub adam: AdamState,
}

impl Trainer {
    pub fn new(model: VaeModel, adam: AdamConfig) -> Self {
        let adam = AdamState::new(adam, &model.params);
        Trainer { model, adam }
    }

    /// Loss and parameter gradients without updating anything.
    pub fn gradients(
        &self,
        batch: &[Sequence],
        teacher: &[bool],
        noise: &[Tensor],
        skeleton: &Skeleton,
    ) -> Result<(f64, f64, f64, Vec<Tensor>)> {
        let mut tape = Tape::new();
        let bound = self.model.params.bind(&mut tape, true);
        let terms = sequence_loss(&self.model, &mut tape, &bound, batch, teacher, noise, skeleton)?;
        let loss = tape.value(terms.total).item();
        let recon = tape.value(terms.reconstruction).item();
        let kl = tape.value(terms.kl).item();
        if !loss.is_finite() {
            return Err(self.divergence(format!("loss {loss} (reconstruction {recon}, kl {kl})")));
        }
        let grads = tape.backward(terms.total)?;
        let grads = bound.gradients(&grads, &self.model.params);
        if let Some(i) = grads.iter().position(|g| !g.is_finite()) {
            return Err(self.divergence(format!(
                "non-finite gradient for `{}` at loss {loss}",
                self.model.params.names()[i]
            )));
        }
        Ok((loss, recon, kl, grads))
    }

    /// Draws the teacher-forcing mask and noise, then takes one Adam step.
    pub fn step(&mut self, batch: &[Sequence], skeleton: &Skeleton, rng: &mut Rng) -> Result<StepStats> {
        let p_tf = self.model.config.teacher_forcing;
        let teacher: Vec<bool> = batch.iter().map(|_| rng.random_bool(p_tf)).collect();
        let length = batch.first().map_or(0, |s| s.joints.len());
        let noise = draw_noise(batch.len(), length, self.model.config.latent_dim, rng);
        let (loss, reconstruction, kl, grads) = self.gradients(batch, &teacher, &noise, skeleton)?;
        self.adam.update(&mut self.model.params, &grads)?;
        Ok(StepStats {
            step: self.adam.step,
            loss,
            reconstruction,
            kl,
            teacher_forced: teacher,
        })
    }

    fn divergence(&self, detail: alloc::string::String) -> Error {
        let largest = self
            .model
            .params
            .values()
            .iter()
            .flat_map(|t| t.data())
            .fold(0.0f64, |m, v| m.max(v.abs()));
        Error::Divergence {
            step: self.adam.step + 1,
            detail: format!("{detail}; largest |parameter| {largest:e}"),
        }
    }
}
