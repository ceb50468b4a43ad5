//! Sampling from the prior, one frame at a time.

use alloc::vec::Vec;

use super::VaeModel;
use crate::error::{Error, Result};
use crate::kinematics::{JointPose, LiePose};
use crate::neural::{reparameterize, Tape, Tensor};
use crate::skeleton::Skeleton;
use crate::Rng;

/// Recurrent state carried between generation steps.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationState {
    pub prior_hidden: Tensor,
    pub generator_hidden: Vec<Tensor>,
    /// Features of the last generated pose (zeros before the first step).
    pub previous: Tensor,
    /// Steps taken so far.
    pub t: usize,
}

impl GenerationState {
    pub fn new(model: &VaeModel, batch: usize) -> Self {
        let h = model.config.hidden_dim;
        GenerationState {
            prior_hidden: Tensor::zeros(batch, h),
            generator_hidden: (0..model.config.generator_layers).map(|_| Tensor::zeros(batch, h)).collect(),
            previous: Tensor::zeros(batch, model.config.pose_dim),
            t: 0,
        }
    }

    /// Samples `z_t` from the prior and decodes the next pose of every row.
    /// Returns `(B × 3N)` rotation vectors, `(B × 3)` roots and `(B × 3J)`
    /// joints.
    pub fn step(
        &mut self,
        model: &VaeModel,
        actions: &[usize],
        length: usize,
        skeleton: &Skeleton,
        rng: &mut Rng,
    ) -> Result<(Tensor, Tensor, Tensor)> {
        let c_t = (self.t + 1) as f64 / length as f64;
        let mut tape = Tape::new();
        let bound = model.params.bind(&mut tape, false);
        let prev = tape.constant(self.previous.clone());
        let hp = tape.constant(self.prior_hidden.clone());
        let hg: Vec<_> = self.generator_hidden.iter().map(|h| tape.constant(h.clone())).collect();
        let (hp, mu, lv) = model.prior_step(&mut tape, &bound, prev, actions, c_t, hp)?;
        let z = reparameterize(&mut tape, mu, lv, rng)?;
        let out = model.generator_step(&mut tape, &bound, prev, actions, c_t, z, &hg, skeleton)?;
        let joints = tape.value(out.joints).clone();
        let rows: Vec<Vec<f64>> = (0..joints.rows())
            .map(|r| model.normalizer.features(joints.row(r)))
            .collect();
        self.previous = Tensor::from_rows(&rows)?;
        self.prior_hidden = tape.value(hp).clone();
        self.generator_hidden = out.hidden.iter().map(|&h| tape.value(h).clone()).collect();
        self.t += 1;
        Ok((tape.value(out.lie).clone(), tape.value(out.root).clone(), joints))
    }
}

/// A sampled motion in both representations.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedMotion {
    pub action: usize,
    /// Rotation vectors reduced to norm ≤ π, with the root trajectory.
    pub lie: Vec<LiePose>,
    pub joints: Vec<JointPose>,
}

/// Generates one motion per entry of `actions`, all `length` frames long.
pub fn generate_batch(
    model: &VaeModel,
    actions: &[usize],
    length: usize,
    skeleton: &Skeleton,
    rng: &mut Rng,
) -> Result<Vec<GeneratedMotion>> {
    if length == 0 {
        return Err(Error::InvalidArgument("generation length must be positive".into()));
    }
    let mut motions: Vec<GeneratedMotion> = actions
        .iter()
        .map(|&action| GeneratedMotion {
            action,
            lie: Vec::with_capacity(length),
            joints: Vec::with_capacity(length),
        })
        .collect();
    if actions.is_empty() {
        return Ok(motions);
    }
    let mut state = GenerationState::new(model, actions.len());
    for _ in 0..length {
        let (lie, root, joints) = state.step(model, actions, length, skeleton, rng)?;
        for (r, m) in motions.iter_mut().enumerate() {
            let mut flat = root.row(r).to_vec();
            flat.extend_from_slice(lie.row(r));
            m.lie.push(LiePose::from_flat(&flat)?.canonicalized());
            m.joints.push(JointPose::from_flat(joints.row(r))?);
        }
    }
    Ok(motions)
}

pub fn generate(model: &VaeModel, action: usize, length: usize, skeleton: &Skeleton, rng: &mut Rng) -> Result<GeneratedMotion> {
    Ok(generate_batch(model, &[action], length, skeleton, rng)?.remove(0))
}
