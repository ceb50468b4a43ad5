use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::Args;
use motiongen_core::vae::generate_batch;
use motiongen_core::{forward_kinematics, rng_from_seed, Skeleton};

use super::out_dir;
use crate::error::{CliError, Result};
use crate::formats::{load_skeleton, save_skeleton, MotionBody, MotionFile, MotionHeader, ModelCheckpoint};

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Action name from the model's vocabulary.
    #[arg(long)]
    pub action: String,
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    /// Frames per motion; the training length when omitted.
    #[arg(long)]
    pub length: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Skeleton for the exported joints; must share the model's topology.
    #[arg(long)]
    pub skeleton: Option<PathBuf>,
    /// One factor for every bone, or one per bone, comma separated.
    #[arg(long)]
    pub bone_scale: Option<String>,
    #[arg(long, default_value_t = 12.0)]
    pub fps: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `k` or `k1,k2,…` into per-bone factors.
pub fn parse_bone_scale(text: &str, bone_count: usize) -> Result<Vec<f64>> {
    let values = text
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite() && *v > 0.0)
                .ok_or_else(|| CliError::validation(format!("bone scale `{}` is not a positive number", t.trim())))
        })
        .collect::<Result<Vec<_>>>()?;
    match values.len() {
        1 => Ok(vec![values[0]; bone_count]),
        n if n == bone_count => Ok(values),
        n => Err(CliError::validation(format!(
            "bone scale has {n} factors; give one or {bone_count}"
        ))),
    }
}

fn export_skeleton(args: &GenerateArgs, model_skeleton: &Skeleton) -> Result<Skeleton> {
    let skeleton = match &args.skeleton {
        Some(path) => {
            let s = load_skeleton(path)?;
            if !s.same_topology(model_skeleton) {
                return Err(CliError::validation(format!(
                    "{}: skeleton `{}` does not share the model skeleton's topology",
                    path.display(),
                    s.name()
                )));
            }
            s
        }
        None => model_skeleton.clone(),
    };
    match &args.bone_scale {
        Some(text) => Ok(skeleton.scale(&parse_bone_scale(text, skeleton.bone_count())?)?),
        None => Ok(skeleton),
    }
}

pub fn run(args: &GenerateArgs, out_root: &Path) -> Result<String> {
    let out = out_dir(&args.out, out_root, "generate");
    let ckpt = ModelCheckpoint::load(&args.checkpoint)?;
    let p = &ckpt.provenance;
    let action = p.actions.iter().position(|a| *a == args.action).ok_or_else(|| {
        CliError::validation(format!(
            "unknown action `{}`; the model knows: {}",
            args.action,
            p.actions.join(", ")
        ))
    })?;
    if args.count == 0 {
        return Err(CliError::validation("--count must be positive"));
    }
    if !(args.fps.is_finite() && args.fps > 0.0) {
        return Err(CliError::validation("--fps must be positive"));
    }
    let length = args.length.unwrap_or(ckpt.model.config.sequence_length);
    if length == 0 {
        return Err(CliError::validation("--length must be positive"));
    }
    let skeleton = export_skeleton(args, &p.skeleton)?;

    let mut rng = rng_from_seed(args.seed);
    let motions = generate_batch(&ckpt.model, &vec![action; args.count], length, &p.skeleton, &mut rng)?;
    let header = MotionHeader {
        skeleton: skeleton.name().to_string(),
        fps: args.fps,
        action: args.action.clone(),
        action_id: action,
        seed: Some(args.seed),
        config: Some(p.config_hash.clone()),
    };
    save_skeleton(&out.join("skeleton.txt"), &skeleton)?;
    let mut summary = format!(
        "generated {} `{}` motion(s) of {length} frames from step {} (seed {}, config {})\n",
        args.count, args.action, p.step, args.seed, p.config_hash
    );
    for (i, m) in motions.into_iter().enumerate() {
        let joints = m
            .lie
            .iter()
            .map(|pose| forward_kinematics(pose, &skeleton))
            .collect::<motiongen_core::Result<Vec<_>>>()?;
        let stem = format!("{}_{i:03}", args.action);
        let joint_path = out.join(format!("{stem}.txt"));
        MotionFile {
            header: header.clone(),
            body: MotionBody::Joints(joints),
        }
        .save(&joint_path)?;
        MotionFile {
            header: header.clone(),
            body: MotionBody::Lie(m.lie),
        }
        .save(&out.join(format!("{stem}.lie.txt")))?;
        let _ = writeln!(summary, "  {}", joint_path.display());
    }
    Ok(summary)
}
