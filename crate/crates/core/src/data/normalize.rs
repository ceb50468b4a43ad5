//! Per-channel standardization of root-relative poses.
//!
//! The feature vector of a pose has one 3-vector per joint: the root joint's
//! slot carries the root translation, every other slot the joint's offset
//! from the root. Each channel is then standardized with training-set
//! statistics.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{check_len, Error, Result};
use crate::neural::{CustomOp, Tape, Tensor, Var};

/// Channels whose spread is below this are left unscaled.
const MIN_STD: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct Normalizer {
    pub root: usize,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Normalizer {
    /// Zero mean, unit scale.
    pub fn identity(joint_count: usize, root: usize) -> Self {
        Normalizer {
            root,
            mean: vec![0.0; 3 * joint_count],
            std: vec![1.0; 3 * joint_count],
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Root-relative layout before standardization.
    pub fn relative(&self, pose: &[f64]) -> Vec<f64> {
        let r = 3 * self.root;
        let root = [pose[r], pose[r + 1], pose[r + 2]];
        pose.chunks_exact(3)
            .enumerate()
            .flat_map(|(j, p)| {
                if j == self.root {
                    [p[0], p[1], p[2]]
                } else {
                    [p[0] - root[0], p[1] - root[1], p[2] - root[2]]
                }
            })
            .collect()
    }

    /// Fits mean and (population) standard deviation over the given frames.
    pub fn fit<'a>(joint_count: usize, root: usize, frames: impl IntoIterator<Item = &'a [f64]>) -> Result<Self> {
        let mut out = Normalizer::identity(joint_count, root);
        let dim = out.dim();
        let mut rows = Vec::new();
        for frame in frames {
            check_len("pose width", dim, frame.len())?;
            rows.push(out.relative(frame));
        }
        if rows.is_empty() {
            return Err(Error::DegenerateDataset("no frames to fit normalization".into()));
        }
        let n = rows.len() as f64;
        for k in 0..dim {
            let mean = rows.iter().map(|r| r[k]).sum::<f64>() / n;
            let var = rows.iter().map(|r| (r[k] - mean) * (r[k] - mean)).sum::<f64>() / n;
            let std = var.sqrt();
            out.mean[k] = mean;
            out.std[k] = if std > MIN_STD { std } else { 1.0 };
        }
        Ok(out)
    }

    pub fn features(&self, pose: &[f64]) -> Vec<f64> {
        self.relative(pose)
            .into_iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    /// Inverse of [`Normalizer::features`].
    pub fn pose(&self, features: &[f64]) -> Vec<f64> {
        let rel: Vec<f64> = features
            .iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| v * s + m)
            .collect();
        let r = 3 * self.root;
        let root = [rel[r], rel[r + 1], rel[r + 2]];
        rel.chunks_exact(3)
            .enumerate()
            .flat_map(|(j, p)| {
                if j == self.root {
                    [p[0], p[1], p[2]]
                } else {
                    [p[0] + root[0], p[1] + root[1], p[2] + root[2]]
                }
            })
            .collect()
    }

    /// Root translation from its standardized channels.
    pub fn denormalize_root(&self, values: &[f64]) -> [f64; 3] {
        let r = 3 * self.root;
        core::array::from_fn(|k| values[k] * self.std[r + k] + self.mean[r + k])
    }

    /// Differentiable [`Normalizer::features`] over a batch `(B × 3J)`.
    pub fn features_op(&self, tape: &mut Tape, poses: Var) -> Result<Var> {
        let t = tape.value(poses);
        check_len("pose width", self.dim(), t.cols())?;
        let mut data = Vec::with_capacity(t.len());
        for r in 0..t.rows() {
            data.extend(self.features(t.row(r)));
        }
        let value = Tensor::new(t.rows(), t.cols(), data)?;
        Ok(tape.custom(&[poses], value, Box::new(FeaturesOp(self.clone()))))
    }

    /// Differentiable affine map from standardized root channels `(B × 3)` to
    /// a root translation in meters.
    pub fn root_op(&self, tape: &mut Tape, values: Var) -> Result<Var> {
        let t = tape.value(values);
        check_len("root width", 3, t.cols())?;
        let mut data = Vec::with_capacity(t.len());
        for r in 0..t.rows() {
            data.extend(self.denormalize_root(t.row(r)));
        }
        let value = Tensor::new(t.rows(), 3, data)?;
        let r = 3 * self.root;
        let scale = [self.std[r], self.std[r + 1], self.std[r + 2]];
        Ok(tape.custom(&[values], value, Box::new(RootOp(scale))))
    }
}

struct FeaturesOp(Normalizer);

impl CustomOp for FeaturesOp {
    fn name(&self) -> &'static str {
        "pose_features"
    }

    fn backward(&self, inputs: &[&Tensor], _output: &Tensor, grad: &Tensor) -> Vec<Option<Tensor>> {
        let norm = &self.0;
        let (rows, cols) = inputs[0].shape();
        let mut g = Tensor::zeros(rows, cols);
        let r0 = 3 * norm.root;
        for r in 0..rows {
            let gin = grad.row(r);
            let out = &mut g.data_mut()[r * cols..(r + 1) * cols];
            for k in 0..cols {
                let scaled = gin[k] / norm.std[k];
                out[k] += scaled;
                let in_root = (r0..r0 + 3).contains(&k);
                if !in_root {
                    out[r0 + k % 3] -= scaled;
                }
            }
        }
        vec![Some(g)]
    }
}

struct RootOp([f64; 3]);

impl CustomOp for RootOp {
    fn name(&self) -> &'static str {
        "root_denormalize"
    }

    fn backward(&self, _inputs: &[&Tensor], _output: &Tensor, grad: &Tensor) -> Vec<Option<Tensor>> {
        let mut g = grad.clone();
        for r in 0..g.rows() {
            for k in 0..3 {
                g.data_mut()[3 * r + k] *= self.0[k];
            }
        }
        vec![Some(g)]
    }
}
