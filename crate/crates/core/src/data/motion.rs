use alloc::string::String;
use alloc::vec::Vec;
use alloc::format;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::kinematics::JointPose;

/// A labelled sequence of joint poses.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionRecord {
    pub action: String,
    pub action_id: usize,
    pub fps: f64,
    pub skeleton: String,
    pub frames: Vec<JointPose>,
}

impl MotionRecord {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn joint_count(&self) -> usize {
        self.frames.first().map_or(0, |f| f.joints.len())
    }

    /// Checks T ≥ 1, a positive fps, equal joint counts and finite values.
    pub fn validate(&self, joint_count: usize) -> Result<()> {
        if self.frames.is_empty() {
            return Err(Error::InvalidArgument("motion has no frames".into()));
        }
        if !(self.fps.is_finite() && self.fps > 0.0) {
            return Err(Error::InvalidArgument(format!("fps must be positive, got {}", self.fps)));
        }
        for (t, frame) in self.frames.iter().enumerate() {
            if frame.joints.len() != joint_count {
                return Err(Error::InvalidArgument(format!(
                    "frame {t} has {} joints, expected {joint_count}",
                    frame.joints.len()
                )));
            }
            if !frame.is_finite() {
                return Err(Error::InvalidArgument(format!("frame {t} has non-finite coordinates")));
            }
        }
        Ok(())
    }

    /// Flattened frames, one `3J` row per frame.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.frames.iter().map(JointPose::to_flat).collect()
    }
}

/// Linear-interpolation resampling to `target_fps`.
///
/// The output spans the same duration with `round(duration · target_fps) + 1`
/// evenly spaced frames, so the first and last frames are kept exactly.
pub fn resample(motion: &MotionRecord, target_fps: f64) -> Result<MotionRecord> {
    if !(target_fps.is_finite() && target_fps > 0.0) {
        return Err(Error::InvalidArgument(format!("target fps must be positive, got {target_fps}")));
    }
    motion.validate(motion.joint_count())?;
    let src = motion.frames.len();
    let span = (src - 1) as f64;
    let count = ((span / motion.fps) * target_fps).round() as usize + 1;
    let frames = (0..count)
        .map(|k| {
            if count == 1 {
                return motion.frames[0].clone();
            }
            let u = (k as f64 * span) / (count - 1) as f64;
            let lo = (u.floor() as usize).min(src - 1);
            let frac = u - lo as f64;
            if frac == 0.0 || lo + 1 >= src {
                return motion.frames[lo].clone();
            }
            let (a, b) = (&motion.frames[lo], &motion.frames[lo + 1]);
            JointPose {
                joints: a
                    .joints
                    .iter()
                    .zip(&b.joints)
                    .map(|(p, q)| {
                        [
                            p[0] + frac * (q[0] - p[0]),
                            p[1] + frac * (q[1] - p[1]),
                            p[2] + frac * (q[2] - p[2]),
                        ]
                    })
                    .collect(),
            }
        })
        .collect();
    Ok(MotionRecord {
        fps: target_fps,
        frames,
        ..motion.clone()
    })
}
