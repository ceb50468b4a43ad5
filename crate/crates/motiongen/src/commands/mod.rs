//! The subcommands. Each returns a human-readable summary on success.

pub mod convert;
pub mod evaluate;
pub mod generate;
pub mod render;
pub mod synth;
pub mod train;

use std::path::{Path, PathBuf};

use motiongen_core::{forward_kinematics, JointPose, Skeleton};

use crate::error::{CliError, Result};
use crate::formats::{load_skeleton, MotionBody, MotionFile};

/// `explicit` when given, else `root/command`.
pub(crate) fn out_dir(explicit: &Option<PathBuf>, root: &Path, command: &str) -> PathBuf {
    explicit.clone().unwrap_or_else(|| root.join(command))
}

pub(crate) fn skeleton_or_default(path: &Option<PathBuf>) -> Result<Skeleton> {
    path.as_deref().map_or_else(|| Ok(Skeleton::default_human()), load_skeleton)
}

/// Rejects motions recorded on a different skeleton.
pub(crate) fn check_motion(file: &MotionFile, skeleton: &Skeleton) -> Result<()> {
    if file.header.skeleton != skeleton.name() {
        return Err(CliError::validation(format!(
            "motion uses skeleton `{}`, got skeleton `{}`",
            file.header.skeleton,
            skeleton.name()
        )));
    }
    let (found, expected) = match &file.body {
        MotionBody::Joints(f) => (f.iter().map(|p| p.joints.len()).find(|&n| n != skeleton.joint_count()), skeleton.joint_count()),
        MotionBody::Lie(f) => (f.iter().map(|p| p.omega.len()).find(|&n| n != skeleton.bone_count()), skeleton.bone_count()),
    };
    match found {
        Some(n) => Err(CliError::validation(format!(
            "{} frame has {n} entries, skeleton `{}` needs {expected}",
            file.body.kind(),
            skeleton.name()
        ))),
        None => Ok(()),
    }
}

/// Joint coordinates of a motion file, applying forward kinematics to Lie files.
pub(crate) fn joint_frames(file: &MotionFile, skeleton: &Skeleton) -> Result<Vec<JointPose>> {
    match &file.body {
        MotionBody::Joints(f) => Ok(f.clone()),
        MotionBody::Lie(f) => Ok(f
            .iter()
            .map(|p| forward_kinematics(p, skeleton))
            .collect::<motiongen_core::Result<Vec<_>>>()?),
    }
}
