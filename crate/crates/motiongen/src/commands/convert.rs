use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use motiongen_core::inverse_kinematics;

use super::{check_motion, joint_frames, out_dir, skeleton_or_default};
use crate::error::{CliError, Result};
use crate::formats::{MotionBody, MotionFile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Representation {
    Joints,
    Lie,
}

#[derive(Debug, Clone, Args)]
pub struct ConvertArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub to: Representation,
    /// Skeleton the motion was recorded on; the built-in one when omitted.
    #[arg(long)]
    pub skeleton: Option<PathBuf>,
    /// Output file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(args: &ConvertArgs, out_root: &Path) -> Result<String> {
    let skeleton = skeleton_or_default(&args.skeleton)?;
    let file = MotionFile::load(&args.input)?;
    check_motion(&file, &skeleton).map_err(|e| e.context(args.input.display()))?;
    let body = match (&file.body, args.to) {
        (MotionBody::Joints(frames), Representation::Lie) => MotionBody::Lie(
            frames
                .iter()
                .map(|f| inverse_kinematics(f, &skeleton))
                .collect::<motiongen_core::Result<Vec<_>>>()?,
        ),
        (MotionBody::Lie(_), Representation::Joints) => MotionBody::Joints(joint_frames(&file, &skeleton)?),
        (body, _) => {
            return Err(CliError::validation(format!(
                "{} already holds {} frames",
                args.input.display(),
                body.kind()
            )))
        }
    };
    let out = match &args.out {
        Some(p) => p.clone(),
        None => {
            let stem = args.input.file_stem().and_then(|s| s.to_str()).unwrap_or("motion");
            let stem = stem.strip_suffix(".lie").unwrap_or(stem);
            let suffix = if args.to == Representation::Lie { ".lie" } else { "" };
            out_dir(&None, out_root, "convert").join(format!("{stem}{suffix}.txt"))
        }
    };
    let converted = MotionFile {
        header: file.header.clone(),
        body,
    };
    converted.save(&out)?;
    Ok(format!(
        "converted {} frames of {} to {} at {}\n",
        converted.body.len(),
        args.input.display(),
        converted.body.kind(),
        out.display()
    ))
}
