//! Action-conditioned generation of 3D human motion.
//!
//! Poses are parameterized by per-joint axis-angle rotations in so(3) plus a
//! root translation, and mapped to joint coordinates by forward kinematics
//! along the skeleton's kinematic chains. A recurrent conditional VAE with a
//! learned prior produces those parameters one frame at a time. The crate
//! also carries the evaluation metrics (FID, recognition accuracy, diversity,
//! multimodality) and a procedural motion synthesizer for desk-scale data.
//!
//! The crate is `no_std` and only needs `alloc`; file formats, checkpoints and
//! the command-line tool live in the `motiongen` crate.

#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;

pub mod data;
pub mod error;
pub mod eval;
pub mod kinematics;
pub mod lie;
pub mod neural;
pub mod skeleton;
pub mod vae;

pub use error::{Error, Result};
pub use kinematics::{forward_kinematics, inverse_kinematics, JointPose, LiePose};
pub use lie::{exp_so3, log_so3, skew, unskew, Mat3, Rotation, Vec3};
pub use skeleton::Skeleton;

/// Deterministic random source used everywhere a seed is accepted.
pub type Rng = rand_chacha::ChaCha8Rng;

/// Builds the crate's random source from a 64-bit seed.
pub fn rng_from_seed(seed: u64) -> Rng {
    use rand::SeedableRng;
    Rng::seed_from_u64(seed)
}
