//! Synthetic action specifications in TOML.
//!
//! ```toml
//! [[action]]
//! name = "wave"
//! duration = [3.0, 4.5]
//! base = [{ bone = 8, omega = [0.0, 0.0, -1.2] }]
//! waves = [
//!   { bone = 9, axis = 2, amplitude = 0.7, frequency = 1.5, phase = 0.0 },
//!   { root = true, axis = 1, amplitude = 0.03, frequency = 1.0 },
//! ]
//! ```
//!
//! `base` overrides entries of the skeleton's rest pose (the standing pose
//! for the built-in skeleton, zeros otherwise); `root_base` defaults to the
//! rest root position and `jitter` to the built-in perturbation.

use std::path::Path;

use motiongen_core::data::synth::{rest_pose, Dof};
use motiongen_core::data::{DofWave, Jitter, SyntheticActionSpec};
use motiongen_core::lie::Vec3;
use motiongen_core::Skeleton;
use serde::{Deserialize, Serialize};

use crate::error::{read_file, CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseEntry {
    pub bone: usize,
    pub omega: Vec3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveEntry {
    /// Target bone; omitted for a root wave.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bone: Option<usize>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub root: bool,
    pub axis: usize,
    pub amplitude: f64,
    pub frequency: f64,
    #[serde(default)]
    pub phase: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JitterEntry {
    pub amplitude: f64,
    pub frequency: f64,
    pub phase: f64,
    pub base: f64,
    pub root: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionEntry {
    pub name: String,
    pub duration: [f64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root_base: Option<Vec3>,
    #[serde(default)]
    pub base: Vec<BaseEntry>,
    #[serde(default)]
    pub waves: Vec<WaveEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jitter: Option<JitterEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub action: Vec<ActionEntry>,
}

fn rest_for(skeleton: &Skeleton) -> (Vec<Vec3>, Vec3) {
    if skeleton.same_topology(&Skeleton::default_human()) {
        rest_pose()
    } else {
        (vec![[0.0; 3]; skeleton.bone_count()], [0.0; 3])
    }
}

impl SpecFile {
    pub fn parse(path: &Path, text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::validation(format!("{}: {e}", path.display())))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(path, &read_file(path)?)
    }

    /// Expresses `specs` relative to the skeleton's rest pose.
    pub fn from_specs(specs: &[SyntheticActionSpec], skeleton: &Skeleton) -> Self {
        let (rest, _) = rest_for(skeleton);
        let action = specs
            .iter()
            .map(|s| ActionEntry {
                name: s.name.clone(),
                duration: [s.duration.0, s.duration.1],
                root_base: Some(s.root_base),
                base: s
                    .base
                    .iter()
                    .enumerate()
                    .filter(|(i, w)| rest.get(*i) != Some(w))
                    .map(|(bone, w)| BaseEntry { bone, omega: *w })
                    .collect(),
                waves: s
                    .waves
                    .iter()
                    .map(|w| {
                        let (bone, root, axis) = match w.dof {
                            Dof::Bone { bone, axis } => (Some(bone), false, axis),
                            Dof::Root { axis } => (None, true, axis),
                        };
                        WaveEntry {
                            bone,
                            root,
                            axis,
                            amplitude: w.amplitude,
                            frequency: w.frequency,
                            phase: w.phase,
                        }
                    })
                    .collect(),
                jitter: Some(JitterEntry {
                    amplitude: s.jitter.amplitude,
                    frequency: s.jitter.frequency,
                    phase: s.jitter.phase,
                    base: s.jitter.base,
                    root: s.jitter.root,
                }),
            })
            .collect();
        SpecFile { action }
    }

    /// Validated specifications for `skeleton`.
    pub fn to_specs(&self, skeleton: &Skeleton) -> Result<Vec<SyntheticActionSpec>> {
        let (rest, rest_root) = rest_for(skeleton);
        self.action
            .iter()
            .map(|a| {
                let bad = |msg: String| CliError::validation(format!("action `{}`: {msg}", a.name));
                if a.name.is_empty() || a.name.contains(char::is_whitespace) {
                    return Err(bad("names must be non-empty and contain no whitespace".into()));
                }
                let mut base = rest.clone();
                for entry in &a.base {
                    *base
                        .get_mut(entry.bone)
                        .ok_or_else(|| bad(format!("base entry for unknown bone {}", entry.bone)))? = entry.omega;
                }
                let waves = a
                    .waves
                    .iter()
                    .map(|w| match (w.bone, w.root) {
                        (Some(bone), false) => Ok(DofWave::bone(bone, w.axis, w.amplitude, w.frequency, w.phase)),
                        (None, true) => Ok(DofWave::root(w.axis, w.amplitude, w.frequency, w.phase)),
                        _ => Err(bad("each wave needs exactly one of `bone` or `root = true`".into())),
                    })
                    .collect::<Result<Vec<_>>>()?;
                let jitter = a.jitter.map_or_else(Jitter::default, |j| Jitter {
                    amplitude: j.amplitude,
                    frequency: j.frequency,
                    phase: j.phase,
                    base: j.base,
                    root: j.root,
                });
                let spec = SyntheticActionSpec {
                    name: a.name.clone(),
                    base,
                    root_base: a.root_base.unwrap_or(rest_root),
                    waves,
                    duration: (a.duration[0], a.duration[1]),
                    jitter,
                };
                spec.validate(skeleton)?;
                Ok(spec)
            })
            .collect()
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("specs serialize")
    }
}
