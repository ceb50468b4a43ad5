//! Procedural motion synthesis from sinusoidal Lie-parameter trajectories.
//!
//! Every sample starts from a per-action base pose, adds a sum of sinusoids
//! on chosen rotation components and root coordinates, and is mapped to
//! joint coordinates with forward kinematics, so bone lengths hold exactly.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use alloc::{format, vec};
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng as _;
use rand_distr::{Distribution, Normal};

use super::motion::MotionRecord;
use super::prep::{split_by_class, Dataset};
use crate::error::{Error, Result};
use crate::kinematics::{forward_kinematics, LiePose};
use crate::lie::Vec3;
use crate::skeleton::Skeleton;
use crate::Rng;

/// One sinusoidal degree of freedom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Dof {
    /// Component `axis` of bone `bone`'s rotation vector.
    Bone { bone: usize, axis: usize },
    /// Coordinate `axis` of the root translation.
    Root { axis: usize },
}

/// `amplitude · sin(2π · frequency · t + phase)`, `t` in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DofWave {
    pub dof: Dof,
    pub amplitude: f64,
    pub frequency: f64,
    pub phase: f64,
}

impl DofWave {
    pub fn bone(bone: usize, axis: usize, amplitude: f64, frequency: f64, phase: f64) -> Self {
        DofWave {
            dof: Dof::Bone { bone, axis },
            amplitude,
            frequency,
            phase,
        }
    }

    pub fn root(axis: usize, amplitude: f64, frequency: f64, phase: f64) -> Self {
        DofWave {
            dof: Dof::Root { axis },
            amplitude,
            frequency,
            phase,
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.amplitude * (2.0 * PI * self.frequency * t + self.phase).sin()
    }
}

/// Per-sample perturbation of an action's nominal parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jitter {
    /// Relative standard deviation of each amplitude.
    pub amplitude: f64,
    /// Relative standard deviation of each frequency.
    pub frequency: f64,
    /// Phase offsets are uniform in ±this, radians.
    pub phase: f64,
    /// Standard deviation added to every base rotation component, radians.
    pub base: f64,
    /// Standard deviation of a constant root offset, meters.
    pub root: f64,
}

impl Jitter {
    pub const NONE: Jitter = Jitter {
        amplitude: 0.0,
        frequency: 0.0,
        phase: 0.0,
        base: 0.0,
        root: 0.0,
    };
}

impl Default for Jitter {
    fn default() -> Self {
        Jitter {
            amplitude: 0.15,
            frequency: 0.1,
            phase: PI,
            base: 0.05,
            root: 0.02,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticActionSpec {
    pub name: String,
    /// Rotation vector per bone around which the waves oscillate.
    pub base: Vec<Vec3>,
    pub root_base: Vec3,
    pub waves: Vec<DofWave>,
    /// Inclusive duration range in seconds.
    pub duration: (f64, f64),
    pub jitter: Jitter,
}

impl SyntheticActionSpec {
    /// Checks indices, positive frequencies and durations, and that no
    /// rotation can leave the ball of radius π.
    pub fn validate(&self, skeleton: &Skeleton) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(format!("action `{}`: {msg}", self.name)));
        if self.base.len() != skeleton.bone_count() {
            return bad(format!(
                "base pose has {} bones, skeleton has {}",
                self.base.len(),
                skeleton.bone_count()
            ));
        }
        let (lo, hi) = self.duration;
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi) {
            return bad(format!("duration range ({lo}, {hi}) is invalid"));
        }
        let mut reach: Vec<Vec3> = self.base.iter().map(|w| w.map(f64::abs)).collect();
        for wave in &self.waves {
            if !(wave.frequency.is_finite() && wave.frequency > 0.0) {
                return bad(format!("frequency {} is not positive", wave.frequency));
            }
            if !(wave.amplitude.is_finite() && wave.phase.is_finite()) {
                return bad("non-finite wave parameter".to_string());
            }
            match wave.dof {
                Dof::Bone { bone, axis } => {
                    if bone >= skeleton.bone_count() || axis >= 3 {
                        return bad(format!("wave targets bone {bone} axis {axis}"));
                    }
                    reach[bone][axis] += wave.amplitude.abs();
                }
                Dof::Root { axis } => {
                    if axis >= 3 {
                        return bad(format!("root wave targets axis {axis}"));
                    }
                }
            }
        }
        for (b, r) in reach.iter().enumerate() {
            let bound = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
            if bound > PI {
                return bad(format!("bone {b} rotation can reach norm {bound:.4} > π"));
            }
        }
        Ok(())
    }

    /// Draws one jittered parameter set and renders it at `fps`.
    pub fn sample(&self, fps: f64, rng: &mut Rng) -> Vec<LiePose> {
        let j = self.jitter;
        let gauss = |sd: f64, rng: &mut Rng| {
            if sd > 0.0 {
                Normal::new(0.0, sd).expect("positive sd").sample(rng)
            } else {
                0.0
            }
        };
        let (lo, hi) = self.duration;
        let seconds = if hi > lo { rng.random_range(lo..=hi) } else { lo };
        let frames = ((seconds * fps).round() as usize).max(1);
        let base: Vec<Vec3> = self
            .base
            .iter()
            .map(|w| core::array::from_fn(|k| w[k] + gauss(j.base, rng)))
            .collect();
        let root: Vec3 = core::array::from_fn(|k| self.root_base[k] + gauss(j.root, rng));
        let waves: Vec<DofWave> = self
            .waves
            .iter()
            .map(|w| {
                let phase = if j.phase > 0.0 { rng.random_range(-j.phase..=j.phase) } else { 0.0 };
                DofWave {
                    dof: w.dof,
                    amplitude: w.amplitude * (1.0 + gauss(j.amplitude, rng)),
                    frequency: (w.frequency * (1.0 + gauss(j.frequency, rng))).max(1e-3),
                    phase: w.phase + phase,
                }
            })
            .collect();
        (0..frames)
            .map(|f| {
                let t = f as f64 / fps;
                let mut pose = LiePose {
                    omega: base.clone(),
                    root_translation: root,
                };
                for w in &waves {
                    match w.dof {
                        Dof::Bone { bone, axis } => pose.omega[bone][axis] += w.value(t),
                        Dof::Root { axis } => pose.root_translation[axis] += w.value(t),
                    }
                }
                pose.canonicalized()
            })
            .collect()
    }
}

/// Neutral standing pose on [`Skeleton::default_human`]: x up, y to the
/// body's left, z forward.
pub fn rest_pose() -> (Vec<Vec3>, Vec3) {
    let mut base = vec![[0.0; 3]; 20];
    base[4] = [0.0, 0.0, 2.6];
    base[5] = [0.0, 0.3, 0.0];
    base[8] = [0.0, 0.0, -2.6];
    base[9] = [0.0, -0.3, 0.0];
    base[12] = [0.0, 0.0, 2.75];
    base[13] = [0.0, 0.0, 0.3];
    base[14] = [0.0, -1.5, 0.0];
    base[16] = [0.0, 0.0, -2.75];
    base[17] = [0.0, 0.0, -0.3];
    base[18] = [0.0, -1.5, 0.0];
    (base, [0.72, 0.0, 0.0])
}

/// The four built-in actions for the default skeleton: wave, squat,
/// walk-in-place and reach.
pub fn default_specs() -> Vec<SyntheticActionSpec> {
    let (rest, root) = rest_pose();
    let spec = |name: &str, base: Vec<Vec3>, waves: Vec<DofWave>| SyntheticActionSpec {
        name: name.to_string(),
        base,
        root_base: root,
        waves,
        duration: (3.0, 4.5),
        jitter: Jitter::default(),
    };

    let mut wave_base = rest.clone();
    wave_base[8] = [0.0, 0.0, -1.2];
    let wave = spec(
        "wave",
        wave_base,
        vec![DofWave::bone(9, 2, 0.7, 1.5, 0.0), DofWave::bone(8, 2, 0.2, 1.5, 0.5)],
    );

    let mut squat_base = rest.clone();
    squat_base[13] = [0.0, -0.7, 0.3];
    let squat = spec(
        "squat",
        squat_base,
        vec![
            DofWave::bone(12, 1, 0.3, 0.5, 0.0),
            DofWave::bone(13, 1, 0.6, 0.5, 0.0),
            DofWave::bone(16, 1, 0.3, 0.5, 0.0),
            DofWave::bone(17, 1, 0.6, 0.5, 0.0),
            DofWave::root(0, 0.12, 0.5, 0.5 * PI),
        ],
    );

    let walk = spec(
        "walk_in_place",
        rest.clone(),
        vec![
            DofWave::bone(12, 1, 0.35, 1.0, 0.0),
            DofWave::bone(16, 1, 0.35, 1.0, PI),
            DofWave::bone(13, 1, 0.3, 1.0, 0.5 * PI),
            DofWave::bone(17, 1, 0.3, 1.0, 1.5 * PI),
            DofWave::bone(4, 1, 0.25, 1.0, PI),
            DofWave::bone(8, 1, 0.25, 1.0, 0.0),
            DofWave::root(1, 0.03, 1.0, 0.0),
        ],
    );

    let mut reach_base = rest;
    reach_base[4] = [0.0, 1.0, 2.0];
    reach_base[2] = [0.0, 0.2, 0.0];
    let reach = spec(
        "reach",
        reach_base,
        vec![
            DofWave::bone(4, 1, 0.5, 0.6, 0.0),
            DofWave::bone(5, 1, 0.4, 0.6, PI),
            DofWave::bone(2, 1, 0.15, 0.6, 0.0),
            DofWave::root(2, 0.06, 0.6, 0.0),
        ],
    );

    vec![wave, squat, walk, reach]
}

/// Renders `n_per_action` jittered samples of every spec and splits them
/// 80/20 within each class.
pub fn synthesize_dataset(
    specs: &[SyntheticActionSpec],
    n_per_action: usize,
    skeleton: &Skeleton,
    fps: f64,
    rng: &mut Rng,
) -> Result<Dataset> {
    if specs.len() < 2 {
        return Err(Error::InvalidArgument("at least two action specs are required".into()));
    }
    if n_per_action == 0 {
        return Err(Error::InvalidArgument("samples per action must be positive".into()));
    }
    if !(fps.is_finite() && fps > 0.0) {
        return Err(Error::InvalidArgument(format!("fps must be positive, got {fps}")));
    }
    for spec in specs {
        spec.validate(skeleton)?;
    }
    let mut motions = Vec::with_capacity(specs.len() * n_per_action);
    for (id, spec) in specs.iter().enumerate() {
        for _ in 0..n_per_action {
            let frames = spec
                .sample(fps, rng)
                .iter()
                .map(|p| forward_kinematics(p, skeleton))
                .collect::<Result<Vec<_>>>()?;
            motions.push(MotionRecord {
                action: spec.name.clone(),
                action_id: id,
                fps,
                skeleton: skeleton.name().to_string(),
                frames,
            });
        }
    }
    let labels: Vec<usize> = motions.iter().map(|m| m.action_id).collect();
    let split = split_by_class(&labels, 0.8, rng);
    Dataset::new(
        skeleton.clone(),
        specs.iter().map(|s| s.name.clone()).collect(),
        motions,
        split,
    )
}
