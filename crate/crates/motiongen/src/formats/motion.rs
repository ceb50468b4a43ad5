//! Motion file: a short header followed by one line per frame.
//!
//! ```text
//! motiongen-motion 1
//! skeleton default21
//! fps 12
//! action wave 0
//! kind joints
//! seed 7
//! config 3f2a…
//! frames 36
//! 0.0 0.72 0.0 …
//! ```
//!
//! A `joints` frame lists `3J` coordinates; a `lie` frame lists the root
//! translation followed by `3N` rotation-vector components. `seed` and
//! `config` are optional provenance fields.

use std::path::Path;

use motiongen_core::data::MotionRecord;
use motiongen_core::{JointPose, LiePose};

use super::text::{push_floats, Lines};
use crate::error::{read_file, write_file, CliError, Result};

const MAGIC: &str = "motiongen-motion";

#[derive(Debug, Clone, PartialEq)]
pub struct MotionHeader {
    pub skeleton: String,
    pub fps: f64,
    pub action: String,
    pub action_id: usize,
    pub seed: Option<u64>,
    pub config: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MotionBody {
    Joints(Vec<JointPose>),
    Lie(Vec<LiePose>),
}

impl MotionBody {
    pub fn len(&self) -> usize {
        match self {
            MotionBody::Joints(f) => f.len(),
            MotionBody::Lie(f) => f.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kind(&self) -> &'static str {
        match self {
            MotionBody::Joints(_) => "joints",
            MotionBody::Lie(_) => "lie",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MotionFile {
    pub header: MotionHeader,
    pub body: MotionBody,
}

impl MotionFile {
    pub fn from_record(record: &MotionRecord) -> Self {
        MotionFile {
            header: MotionHeader {
                skeleton: record.skeleton.clone(),
                fps: record.fps,
                action: record.action.clone(),
                action_id: record.action_id,
                seed: None,
                config: None,
            },
            body: MotionBody::Joints(record.frames.clone()),
        }
    }

    /// The joint-coordinate record; fails for Lie files.
    pub fn into_record(self) -> Result<MotionRecord> {
        match self.body {
            MotionBody::Joints(frames) => Ok(MotionRecord {
                action: self.header.action,
                action_id: self.header.action_id,
                fps: self.header.fps,
                skeleton: self.header.skeleton,
                frames,
            }),
            MotionBody::Lie(_) => Err(CliError::validation("expected a joint-coordinate motion, found a Lie motion")),
        }
    }

    pub fn to_text(&self) -> String {
        let h = &self.header;
        let mut out = format!(
            "{MAGIC} 1\nskeleton {}\nfps {:?}\naction {} {}\nkind {}\n",
            h.skeleton,
            h.fps,
            h.action,
            h.action_id,
            self.body.kind()
        );
        if let Some(seed) = h.seed {
            out += &format!("seed {seed}\n");
        }
        if let Some(config) = &h.config {
            out += &format!("config {config}\n");
        }
        out += &format!("frames {}\n", self.body.len());
        match &self.body {
            MotionBody::Joints(frames) => frames.iter().for_each(|f| push_floats(&mut out, f.to_flat())),
            MotionBody::Lie(frames) => frames.iter().for_each(|f| push_floats(&mut out, f.to_flat())),
        }
        out
    }

    pub fn parse(path: &Path, text: &str) -> Result<Self> {
        let mut lines = Lines::new(path, text);
        lines.header(MAGIC, 1)?;
        let l = lines.expect("skeleton")?;
        lines.arity(&l, 2)?;
        let skeleton = l.tokens[1].to_string();
        let l = lines.expect("fps")?;
        lines.arity(&l, 2)?;
        let fps = lines.number(&l, 1, "fps")?;
        if fps <= 0.0 {
            return Err(lines.error(l.number, "fps must be positive"));
        }
        let l = lines.expect("action")?;
        lines.arity(&l, 3)?;
        let action = l.tokens[1].to_string();
        let action_id = lines.field(&l, 2, "action id")?;
        let l = lines.expect("kind")?;
        lines.arity(&l, 2)?;
        let kind = l.tokens[1];
        if kind != "joints" && kind != "lie" {
            return Err(lines.error(l.number, format!("unknown kind `{kind}` (expected joints or lie)")));
        }
        let seed = match lines.optional("seed")? {
            Some(l) => {
                lines.arity(&l, 2)?;
                Some(lines.field(&l, 1, "seed")?)
            }
            None => None,
        };
        let config = match lines.optional("config")? {
            Some(l) => {
                lines.arity(&l, 2)?;
                Some(l.tokens[1].to_string())
            }
            None => None,
        };
        let l = lines.expect("frames")?;
        lines.arity(&l, 2)?;
        let count: usize = lines.field(&l, 1, "frame count")?;
        if count == 0 {
            return Err(lines.error(l.number, "a motion needs at least one frame"));
        }
        let mut rows = Vec::with_capacity(count);
        let mut width = None;
        for k in 0..count {
            let l = lines
                .next_line()
                .ok_or_else(|| lines.error(l.number, format!("expected {count} frames, found {k}")))?;
            let w = *width.get_or_insert(l.tokens.len());
            if w == 0 || w % 3 != 0 || (kind == "lie" && w < 3) {
                return Err(lines.error(l.number, format!("frame width {w} is not a multiple of 3")));
            }
            rows.push(lines.floats(&l, w)?);
        }
        lines.finish()?;
        let body = if kind == "joints" {
            MotionBody::Joints(rows.iter().map(|r| JointPose::from_flat(r)).collect::<Result<_, _>>()?)
        } else {
            MotionBody::Lie(rows.iter().map(|r| LiePose::from_flat(r)).collect::<Result<_, _>>()?)
        };
        Ok(MotionFile {
            header: MotionHeader {
                skeleton,
                fps,
                action,
                action_id,
                seed,
                config,
            },
            body,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(path, &read_file(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_file(path, self.to_text())
    }
}

pub fn load_motion(path: &Path) -> Result<MotionRecord> {
    MotionFile::load(path)?.into_record().map_err(|e| e.context(path.display()))
}

pub fn save_motion(path: &Path, record: &MotionRecord) -> Result<()> {
    MotionFile::from_record(record).save(path)
}
