//! Skeleton definition file.
//!
//! ```text
//! motiongen-skeleton 1
//! name default21
//! root 0
//! joint 0 pelvis
//! chain spine 0 1 2 3 4
//! bone 0 1 0.12
//! ```
//!
//! Every joint, chain and bone gets one line; bones are keyed by their
//! `(parent, child)` joint indices and may be listed in any order.

use std::collections::BTreeMap;
use std::path::Path;

use motiongen_core::skeleton::Chain;
use motiongen_core::Skeleton;

use super::text::{float, Lines};
use crate::error::{read_file, write_file, CliError, Result};

const MAGIC: &str = "motiongen-skeleton";

/// The built-in 21-joint skeleton in file form.
pub const DEFAULT_SKELETON: &str = include_str!("../../assets/default_skeleton.txt");

pub fn skeleton_to_string(s: &Skeleton) -> String {
    let mut out = format!("{MAGIC} 1\nname {}\nroot {}\n", s.name(), s.root());
    for (i, name) in s.joint_names().iter().enumerate() {
        out += &format!("joint {i} {name}\n");
    }
    for chain in s.chains() {
        let joints: Vec<String> = chain.joints.iter().map(usize::to_string).collect();
        out += &format!("chain {} {}\n", chain.name, joints.join(" "));
    }
    for (bone, len) in s.bones().iter().zip(s.bone_lengths()) {
        out += &format!("bone {} {} {}\n", bone.parent, bone.child, float(*len));
    }
    out
}

pub fn parse_skeleton(path: &Path, text: &str) -> Result<Skeleton> {
    let mut lines = Lines::new(path, text);
    lines.header(MAGIC, 1)?;
    let l = lines.expect("name")?;
    lines.arity(&l, 2)?;
    let name = l.tokens[1].to_string();
    let l = lines.expect("root")?;
    lines.arity(&l, 2)?;
    let root: usize = lines.field(&l, 1, "root index")?;

    let mut joint_names = Vec::new();
    while let Some(l) = lines.optional("joint")? {
        lines.arity(&l, 3)?;
        let index: usize = lines.field(&l, 1, "joint index")?;
        if index != joint_names.len() {
            return Err(lines.error(l.number, format!("joint {index} listed out of order")));
        }
        joint_names.push(l.tokens[2].to_string());
    }
    let mut chains = Vec::new();
    while let Some(l) = lines.optional("chain")? {
        if l.tokens.len() < 4 {
            return Err(lines.error(l.number, "a chain needs a name and at least two joints"));
        }
        let joints = (2..l.tokens.len())
            .map(|i| {
                let j: usize = lines.field(&l, i, "joint index")?;
                if j >= joint_names.len() {
                    return Err(lines.error(l.number, format!("chain `{}` references unknown joint {j}", l.tokens[1])));
                }
                Ok(j)
            })
            .collect::<Result<Vec<_>>>()?;
        chains.push(Chain {
            name: l.tokens[1].to_string(),
            joints,
        });
    }
    let mut lengths: BTreeMap<(usize, usize), (f64, usize)> = BTreeMap::new();
    while let Some(l) = lines.optional("bone")? {
        lines.arity(&l, 4)?;
        let key = (lines.field(&l, 1, "parent index")?, lines.field(&l, 2, "child index")?);
        let len = lines.number(&l, 3, "bone length")?;
        if lengths.insert(key, (len, l.number)).is_some() {
            return Err(lines.error(l.number, format!("bone {} {} listed twice", key.0, key.1)));
        }
    }
    lines.finish()?;

    let topology = Skeleton::new(name.clone(), joint_names.clone(), root, chains.clone(), vec![1.0; joint_names.len().saturating_sub(1)])
        .map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
    let mut ordered = Vec::with_capacity(topology.bone_count());
    for bone in topology.bones() {
        match lengths.remove(&(bone.parent, bone.child)) {
            Some((len, _)) => ordered.push(len),
            None => {
                return Err(CliError::validation(format!(
                    "{}: no length for bone {} {}",
                    path.display(),
                    bone.parent,
                    bone.child
                )))
            }
        }
    }
    if let Some(((p, c), (_, line))) = lengths.into_iter().next() {
        return Err(lines.error(line, format!("bone {p} {c} is not part of any chain")));
    }
    Skeleton::new(name, joint_names, root, chains, ordered).map_err(|e| CliError::validation(format!("{}: {e}", path.display())))
}

pub fn load_skeleton(path: &Path) -> Result<Skeleton> {
    parse_skeleton(path, &read_file(path)?)
}

pub fn save_skeleton(path: &Path, skeleton: &Skeleton) -> Result<()> {
    write_file(path, skeleton_to_string(skeleton))
}
