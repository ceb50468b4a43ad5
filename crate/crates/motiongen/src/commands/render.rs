use std::path::{Path, PathBuf};

use clap::Args;

use super::{check_motion, joint_frames, out_dir, skeleton_or_default};
use crate::error::{write_file, Result};
use crate::formats::{panel_frames, render_strip, MotionFile};

#[derive(Debug, Clone, Args)]
pub struct RenderArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Skeleton the motion was recorded on; the built-in one when omitted.
    #[arg(long)]
    pub skeleton: Option<PathBuf>,
    /// Draw every n-th frame.
    #[arg(long, default_value_t = 10)]
    pub every: usize,
    /// Output SVG file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(args: &RenderArgs, out_root: &Path) -> Result<String> {
    let skeleton = skeleton_or_default(&args.skeleton)?;
    let file = MotionFile::load(&args.input)?;
    check_motion(&file, &skeleton).map_err(|e| e.context(args.input.display()))?;
    let frames = joint_frames(&file, &skeleton)?;
    let svg = render_strip(&frames, &skeleton, args.every)?;
    let out = match &args.out {
        Some(p) => p.clone(),
        None => {
            let stem = args.input.file_stem().and_then(|s| s.to_str()).unwrap_or("motion");
            out_dir(&None, out_root, "render").join(format!("{stem}.svg"))
        }
    };
    write_file(&out, svg)?;
    Ok(format!(
        "rendered {} of {} frames to {}\n",
        panel_frames(frames.len(), args.every).len(),
        frames.len(),
        out.display()
    ))
}
