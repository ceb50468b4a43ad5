//! Forward kinematics as a differentiable tape operation.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use super::tape::{CustomOp, Tape, Var};
use super::tensor::Tensor;
use crate::error::{check_len, Result};
use crate::kinematics::fk_trace;
use crate::lie::{exp_so3_jacobian, Mat3, Vec3};
use crate::skeleton::Skeleton;

/// Batched forward kinematics: `lie: (B × 3N)` rotation vectors and
/// `root: (B × 3)` translations to `(B × 3J)` joint coordinates.
pub fn forward_kinematics_op(tape: &mut Tape, lie: Var, root: Var, skeleton: &Skeleton) -> Result<Var> {
    let (lt, rt) = (tape.value(lie), tape.value(root));
    let n = skeleton.bone_count();
    check_len("fk lie width", 3 * n, lt.cols())?;
    check_len("fk root width", 3, rt.cols())?;
    check_len("fk batch", lt.rows(), rt.rows())?;
    let joints = skeleton.joint_count();
    let mut data = Vec::with_capacity(lt.rows() * 3 * joints);
    for r in 0..lt.rows() {
        let omega = rotation_vectors(lt.row(r));
        let root_t = [rt.get(r, 0), rt.get(r, 1), rt.get(r, 2)];
        let trace = fk_trace(&omega, &root_t, skeleton);
        trace.positions.iter().for_each(|p| data.extend_from_slice(p));
    }
    let value = Tensor::new(lt.rows(), 3 * joints, data)?;
    Ok(tape.custom(
        &[lie, root],
        value,
        Box::new(FkOp {
            skeleton: skeleton.clone(),
        }),
    ))
}

fn rotation_vectors(row: &[f64]) -> Vec<Vec3> {
    row.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect()
}

struct FkOp {
    skeleton: Skeleton,
}

impl CustomOp for FkOp {
    fn name(&self) -> &'static str {
        "forward_kinematics"
    }

    fn backward(&self, inputs: &[&Tensor], _output: &Tensor, grad: &Tensor) -> Vec<Option<Tensor>> {
        let (lie, root) = (inputs[0], inputs[1]);
        let sk = &self.skeleton;
        let bones = sk.bones();
        let mut g_lie = Tensor::zeros(lie.rows(), lie.cols());
        let mut g_root = Tensor::zeros(root.rows(), 3);
        for r in 0..lie.rows() {
            let omega = rotation_vectors(lie.row(r));
            let trace = fk_trace(&omega, &[0.0; 3], sk);
            let mut g_pos: Vec<Vec3> = grad
                .row(r)
                .chunks_exact(3)
                .map(|c| [c[0], c[1], c[2]])
                .collect();
            let mut g_frame = vec![Mat3::ZERO; sk.joint_count()];
            for (b, bone) in bones.iter().enumerate().rev() {
                let (p, c) = (bone.parent, bone.child);
                let parent_frame = trace.frames[p];
                // frame[c] = frame[p] · exp(ŵ_b)
                let (rot, partials) = exp_so3_jacobian(&omega[b]);
                let g_c = g_frame[c];
                g_frame[p] = g_frame[p] + g_c * rot.transpose();
                let g_rot = parent_frame.transpose() * g_c;
                for (k, partial) in partials.iter().enumerate() {
                    g_lie.data_mut()[r * lie.cols() + 3 * b + k] = g_rot.dot(partial);
                }
                // pos[c] = pos[p] + len · frame[p]·x
                let gc = g_pos[c];
                let len = sk.bone_lengths()[b];
                for (row, v) in g_frame[p].0.iter_mut().zip(gc) {
                    row[0] += len * v;
                }
                for k in 0..3 {
                    g_pos[p][k] += gc[k];
                }
            }
            let gr = g_pos[sk.root()];
            g_root.data_mut()[3 * r..3 * r + 3].copy_from_slice(&gr);
        }
        vec![Some(g_lie), Some(g_root)]
    }
}
