//! Skeleton topology: joints, kinematic chains and bone lengths.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use alloc::{format, vec};

use crate::error::{Error, Result};

/// One kinematic chain: an ordered joint list whose first entry is the joint
/// the chain hangs from (the root or a joint placed by an earlier chain).
#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    pub name: String,
    pub joints: Vec<usize>,
}

/// A bone joins two consecutive joints of a chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bone {
    pub parent: usize,
    pub child: usize,
}

/// Joint topology plus per-bone lengths in meters.
///
/// Bones are numbered in chain order, so the per-bone parameter vector of a
/// pose lists chain 1's bones first, then chain 2's, and so on. Every
/// non-root joint terminates exactly one bone.
#[derive(Debug, Clone, PartialEq)]
pub struct Skeleton {
    name: String,
    joint_names: Vec<String>,
    root: usize,
    chains: Vec<Chain>,
    bones: Vec<Bone>,
    bone_lengths: Vec<f64>,
    /// `incoming[j]` is the bone ending at joint `j` (None for the root).
    incoming: Vec<Option<usize>>,
}

impl Skeleton {
    pub fn new(
        name: impl Into<String>,
        joint_names: Vec<String>,
        root: usize,
        chains: Vec<Chain>,
        bone_lengths: Vec<f64>,
    ) -> Result<Self> {
        let invalid = |msg: String| Err(Error::InvalidSkeleton(msg));
        let joint_count = joint_names.len();
        if joint_count < 2 {
            return invalid("a skeleton needs at least two joints".to_string());
        }
        if root >= joint_count {
            return invalid(format!("root index {root} out of range"));
        }
        if chains.is_empty() {
            return invalid("a skeleton needs at least one chain".to_string());
        }
        let mut placed = vec![false; joint_count];
        placed[root] = true;
        let mut incoming = vec![None; joint_count];
        let mut bones = Vec::with_capacity(joint_count - 1);
        for chain in &chains {
            if chain.joints.len() < 2 {
                return invalid(format!("chain `{}` has fewer than two joints", chain.name));
            }
            if let Some(&bad) = chain.joints.iter().find(|&&j| j >= joint_count) {
                return invalid(format!("chain `{}` references unknown joint {bad}", chain.name));
            }
            let start = chain.joints[0];
            if !placed[start] {
                return invalid(format!(
                    "chain `{}` starts at joint {start}, which no earlier chain places",
                    chain.name
                ));
            }
            for pair in chain.joints.windows(2) {
                let (parent, child) = (pair[0], pair[1]);
                if placed[child] {
                    return invalid(format!(
                        "joint {child} appears as a chain member more than once (chain `{}`)",
                        chain.name
                    ));
                }
                placed[child] = true;
                incoming[child] = Some(bones.len());
                bones.push(Bone { parent, child });
            }
        }
        if let Some(missing) = placed.iter().position(|p| !p) {
            return invalid(format!("joint {missing} is not covered by any chain"));
        }
        if bone_lengths.len() != bones.len() {
            return invalid(format!(
                "expected {} bone lengths, found {}",
                bones.len(),
                bone_lengths.len()
            ));
        }
        if let Some(i) = bone_lengths.iter().position(|b| !(b.is_finite() && *b > 0.0)) {
            return invalid(format!(
                "bone {i} has non-positive length {}",
                bone_lengths[i]
            ));
        }
        Ok(Skeleton {
            name: name.into(),
            joint_names,
            root,
            chains,
            bones,
            bone_lengths,
            incoming,
        })
    }

    /// The 21-joint, 5-chain human skeleton (spine, two arms, two legs).
    ///
    /// Bone lengths are plausible adult proportions chosen for this crate;
    /// they are design constants, not measured data.
    pub fn default_human() -> Self {
        const NAMES: [&str; 21] = [
            "pelvis",
            "spine_lower",
            "spine_upper",
            "chest",
            "head",
            "left_collar",
            "left_shoulder",
            "left_elbow",
            "left_wrist",
            "right_collar",
            "right_shoulder",
            "right_elbow",
            "right_wrist",
            "left_hip",
            "left_knee",
            "left_ankle",
            "left_toe",
            "right_hip",
            "right_knee",
            "right_ankle",
            "right_toe",
        ];
        let chain = |name: &str, joints: &[usize]| Chain {
            name: name.to_string(),
            joints: joints.to_vec(),
        };
        let chains = vec![
            chain("spine", &[0, 1, 2, 3, 4]),
            chain("left_arm", &[3, 5, 6, 7, 8]),
            chain("right_arm", &[3, 9, 10, 11, 12]),
            chain("left_leg", &[0, 13, 14, 15, 16]),
            chain("right_leg", &[0, 17, 18, 19, 20]),
        ];
        let lengths = vec![
            0.12, 0.25, 0.25, 0.20, // spine
            0.15, 0.30, 0.27, 0.08, // left arm
            0.15, 0.30, 0.27, 0.08, // right arm
            0.10, 0.42, 0.40, 0.14, // left leg
            0.10, 0.42, 0.40, 0.14, // right leg
        ];
        Skeleton::new(
            "default21",
            NAMES.iter().map(|s| s.to_string()).collect(),
            0,
            chains,
            lengths,
        )
        .expect("built-in skeleton is valid")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn joint_names(&self) -> &[String] {
        &self.joint_names
    }

    pub fn joint_count(&self) -> usize {
        self.joint_names.len()
    }

    pub fn bone_count(&self) -> usize {
        self.bones.len()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn chains(&self) -> &[Chain] {
        &self.chains
    }

    /// Bones in parameter order.
    pub fn bones(&self) -> &[Bone] {
        &self.bones
    }

    pub fn bone_lengths(&self) -> &[f64] {
        &self.bone_lengths
    }

    /// Index of the bone that ends at `joint`, or `None` for the root.
    pub fn incoming_bone(&self, joint: usize) -> Option<usize> {
        self.incoming.get(joint).copied().flatten()
    }

    /// Bone index for a (parent, child) pair, if such a bone exists.
    pub fn bone_between(&self, parent: usize, child: usize) -> Option<usize> {
        self.incoming_bone(child)
            .filter(|&b| self.bones[b].parent == parent)
    }

    pub fn rename(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Same topology with new bone lengths.
    pub fn with_bone_lengths(&self, lengths: Vec<f64>) -> Result<Skeleton> {
        Skeleton::new(
            self.name.clone(),
            self.joint_names.clone(),
            self.root,
            self.chains.clone(),
            lengths,
        )
    }

    /// Multiplies each bone length by its factor; topology is unchanged.
    pub fn scale(&self, factors: &[f64]) -> Result<Skeleton> {
        crate::error::check_len("bone scale factors", self.bone_count(), factors.len())?;
        if let Some(f) = factors.iter().find(|f| !(f.is_finite() && **f > 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "bone scale factors must be positive, found {f}"
            )));
        }
        let lengths = self
            .bone_lengths
            .iter()
            .zip(factors)
            .map(|(b, f)| b * f)
            .collect();
        self.with_bone_lengths(lengths)
    }

    /// Scales every bone by the same factor.
    pub fn scale_uniform(&self, factor: f64) -> Result<Skeleton> {
        self.scale(&vec![factor; self.bone_count()])
    }

    /// True when two skeletons share joint count, root and chains.
    pub fn same_topology(&self, other: &Skeleton) -> bool {
        self.root == other.root
            && self.joint_count() == other.joint_count()
            && self
                .chains
                .iter()
                .zip(&other.chains)
                .all(|(a, b)| a.joints == b.joints)
            && self.chains.len() == other.chains.len()
    }
}

/// Free-function form of [`Skeleton::scale`].
pub fn scale_skeleton(skeleton: &Skeleton, factors: &[f64]) -> Result<Skeleton> {
    skeleton.scale(factors)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(joints: &[usize]) -> Chain {
        Chain {
            name: "c".to_string(),
            joints: joints.to_vec(),
        }
    }

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("j{i}")).collect()
    }

    #[test]
    fn default_has_five_chains_21_joints_20_bones() {
        let s = Skeleton::default_human();
        assert_eq!(s.chains().len(), 5);
        assert_eq!(s.joint_count(), 21);
        assert_eq!(s.bone_count(), 20);
        assert_eq!(s.chains()[1].joints, [3, 5, 6, 7, 8]);
        assert_eq!(s.incoming_bone(0), None);
        assert_eq!(s.bone_between(3, 5), Some(4));
        assert_eq!(s.bone_between(2, 5), None);
    }

    #[test]
    fn rejects_unknown_joint_and_bad_lengths() {
        let err = Skeleton::new("s", names(3), 0, vec![chain(&[0, 1, 7])], vec![1.0, 1.0]);
        assert!(matches!(err, Err(Error::InvalidSkeleton(_))));
        let err = Skeleton::new("s", names(3), 0, vec![chain(&[0, 1, 2])], vec![1.0, 0.0]);
        assert!(err.is_err());
        let err = Skeleton::new("s", names(3), 0, vec![chain(&[0, 1])], vec![1.0]);
        assert!(err.is_err(), "joint 2 uncovered");
        let err = Skeleton::new("s", names(3), 0, vec![chain(&[1, 2]), chain(&[0, 1])], vec![1.0, 1.0]);
        assert!(err.is_err(), "chain starts at an unplaced joint");
        let err = Skeleton::new("s", names(3), 0, vec![chain(&[0, 1, 2]), chain(&[0, 2])], vec![1.0; 3]);
        assert!(err.is_err(), "joint 2 covered twice");
    }

    #[test]
    fn scaling() {
        let s = Skeleton::default_human();
        assert_eq!(s.scale(&[1.0; 20]).unwrap(), s);
        let doubled = s.scale_uniform(2.0).unwrap();
        assert_eq!(doubled.bone_lengths()[5], 0.6);
        assert!(s.scale(&[0.0; 20]).is_err());
        assert!(s.scale(&[1.0; 3]).is_err());
        assert!(s.same_topology(&doubled));
    }
}
