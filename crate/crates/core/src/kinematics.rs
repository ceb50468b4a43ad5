//! Forward and inverse kinematics between Lie-algebra pose parameters and
//! joint coordinates.
//!
//! Each non-root joint carries a rotation vector. A bone leaving joint `p` is
//! laid along the x-axis of the accumulated frame at `p`, which is the product
//! of the rotations of every joint on the path from the root to `p`
//! (inclusive). Along a chain `[c0, c1, …, cm]` this gives
//!
//! ```text
//! J(c_i) = [exp(ŵ_1) ⋯ exp(ŵ_{i-1})] · (b_i, 0, 0)ᵀ + J(c_{i-1})
//! ```
//!
//! with the product starting from the frame of `c0`; chains that branch off a
//! non-root joint inherit the frame accumulated at that joint. The rotation of
//! a chain's last joint moves nothing.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_len, Error, Result};
use crate::lie::{self, align_x_to, exp_so3, Mat3, Vec3};
use crate::skeleton::Skeleton;

/// Per-bone rotation vectors (indexed like [`Skeleton::bones`], each stored on
/// the bone's child joint) plus the root translation in meters.
#[derive(Debug, Clone, PartialEq)]
pub struct LiePose {
    pub omega: Vec<Vec3>,
    pub root_translation: Vec3,
}

impl LiePose {
    pub fn zeros(bone_count: usize) -> Self {
        LiePose {
            omega: vec![[0.0; 3]; bone_count],
            root_translation: [0.0; 3],
        }
    }

    /// Flat layout: root translation followed by the rotation vectors.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(3 + 3 * self.omega.len());
        out.extend_from_slice(&self.root_translation);
        self.omega.iter().for_each(|w| out.extend_from_slice(w));
        out
    }

    pub fn from_flat(values: &[f64]) -> Result<Self> {
        if values.len() < 3 || !values.len().is_multiple_of(3) {
            return Err(Error::InvalidArgument(alloc::format!(
                "lie pose vector length {} is not 3 + 3N",
                values.len()
            )));
        }
        Ok(LiePose {
            root_translation: [values[0], values[1], values[2]],
            omega: values[3..].chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect(),
        })
    }

    /// Reduces every rotation vector to norm ≤ π.
    pub fn canonicalized(&self) -> LiePose {
        LiePose {
            omega: self.omega.iter().map(lie::canonicalize).collect(),
            root_translation: self.root_translation,
        }
    }
}

/// Joint coordinates in meters, one 3-vector per skeleton joint.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPose {
    pub joints: Vec<Vec3>,
}

impl JointPose {
    pub fn to_flat(&self) -> Vec<f64> {
        self.joints.iter().flat_map(|j| j.iter().copied()).collect()
    }

    pub fn from_flat(values: &[f64]) -> Result<Self> {
        if !values.len().is_multiple_of(3) {
            return Err(Error::InvalidArgument(alloc::format!(
                "joint vector length {} is not a multiple of 3",
                values.len()
            )));
        }
        Ok(JointPose {
            joints: values.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect(),
        })
    }

    pub fn translated(&self, t: &Vec3) -> JointPose {
        JointPose {
            joints: self.joints.iter().map(|j| lie::add(j, t)).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.joints.iter().flatten().all(|v| v.is_finite())
    }
}

/// Joint positions plus the accumulated frame at every joint.
#[derive(Debug, Clone)]
pub(crate) struct FkTrace {
    pub positions: Vec<Vec3>,
    pub frames: Vec<Mat3>,
}

pub(crate) fn fk_trace(omega: &[Vec3], root: &Vec3, skeleton: &Skeleton) -> FkTrace {
    let n = skeleton.joint_count();
    let mut positions = vec![[0.0; 3]; n];
    let mut frames = vec![Mat3::IDENTITY; n];
    positions[skeleton.root()] = *root;
    for (b, bone) in skeleton.bones().iter().enumerate() {
        let frame = frames[bone.parent];
        let offset = lie::scale(&frame.x_axis(), skeleton.bone_lengths()[b]);
        positions[bone.child] = lie::add(&positions[bone.parent], &offset);
        frames[bone.child] = frame * *exp_so3(&omega[b]).matrix();
    }
    FkTrace { positions, frames }
}

/// Maps Lie-algebra pose parameters to joint coordinates.
pub fn forward_kinematics(pose: &LiePose, skeleton: &Skeleton) -> Result<JointPose> {
    check_len("lie pose bone count", skeleton.bone_count(), pose.omega.len())?;
    let trace = fk_trace(&pose.omega, &pose.root_translation, skeleton);
    Ok(JointPose {
        joints: trace.positions,
    })
}

/// Recovers Lie-algebra parameters from joint coordinates.
///
/// Each joint's rotation is the twist-free rotation that carries the parent
/// frame's x-axis onto the direction of the joint's first outgoing bone;
/// joints with no outgoing bone get the zero vector. Bones that leave the root
/// or that share a start joint with an earlier bone have their direction fixed
/// by the frame they inherit, so for poses outside the image of
/// [`forward_kinematics`] their directions are not reproduced. Use
/// [`measure_bone_lengths`] for the skeleton that reproduces the input.
pub fn inverse_kinematics(pose: &JointPose, skeleton: &Skeleton) -> Result<LiePose> {
    check_len("joint count", skeleton.joint_count(), pose.joints.len())?;
    let n = skeleton.joint_count();
    let bones = skeleton.bones();
    let mut first_child: Vec<Option<usize>> = vec![None; n];
    for bone in bones {
        let dir = lie::sub(&pose.joints[bone.child], &pose.joints[bone.parent]);
        let length = lie::norm(&dir);
        if length.is_nan() || length <= 1e-12 {
            return Err(Error::DegenerateBone {
                parent: bone.parent,
                child: bone.child,
            });
        }
        first_child[bone.parent].get_or_insert(bone.child);
    }
    let mut frames = vec![Mat3::IDENTITY; n];
    let mut omega = vec![[0.0; 3]; bones.len()];
    for (b, bone) in bones.iter().enumerate() {
        let joint = bone.child;
        let parent_frame = frames[bone.parent];
        if let Some(next) = first_child[joint] {
            let dir = lie::sub(&pose.joints[next], &pose.joints[joint]);
            let dir = lie::scale(&dir, 1.0 / lie::norm(&dir));
            let local = parent_frame.transpose().mul_vec(&dir);
            let local = lie::scale(&local, 1.0 / lie::norm(&local));
            omega[b] = align_x_to(&local);
        }
        frames[joint] = parent_frame * *exp_so3(&omega[b]).matrix();
    }
    Ok(LiePose {
        omega,
        root_translation: pose.joints[skeleton.root()],
    })
}

/// The skeleton with bone lengths measured from `pose`.
pub fn measure_bone_lengths(pose: &JointPose, skeleton: &Skeleton) -> Result<Skeleton> {
    check_len("joint count", skeleton.joint_count(), pose.joints.len())?;
    let lengths = skeleton
        .bones()
        .iter()
        .map(|b| {
            let len = lie::norm(&lie::sub(&pose.joints[b.child], &pose.joints[b.parent]));
            if len > 1e-12 {
                Ok(len)
            } else {
                Err(Error::DegenerateBone {
                    parent: b.parent,
                    child: b.child,
                })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    skeleton.with_bone_lengths(lengths)
}
