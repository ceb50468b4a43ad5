//! Dataset manifest: skeleton, action vocabulary and the motion files with
//! their split, all paths relative to the manifest.
//!
//! ```text
//! motiongen-manifest 1
//! skeleton skeleton.txt
//! fps 12
//! seed 7
//! config 3f2a…
//! action 0 wave
//! motion train motions/wave_000.txt
//! normalizer 0
//! mean 0.0 0.72 …
//! std 1.0 0.01 …
//! ```
//!
//! `fps` (optional) resamples every motion on load. `seed`, `config` and the
//! `normalizer` block (root joint index, then training-split statistics) are
//! informational.

use std::path::{Path, PathBuf};

use motiongen_core::data::{resample, Dataset, Normalizer, Split};

use super::motion::load_motion;
use super::skeleton::load_skeleton;
use super::text::{float, push_floats, Lines};
use crate::error::{read_file, write_file, CliError, Result};

const MAGIC: &str = "motiongen-manifest";

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub skeleton: PathBuf,
    pub fps: Option<f64>,
    pub seed: Option<u64>,
    pub config: Option<String>,
    pub actions: Vec<String>,
    pub motions: Vec<(Split, PathBuf)>,
    pub normalizer: Option<Normalizer>,
}

fn split_name(s: Split) -> &'static str {
    match s {
        Split::Train => "train",
        Split::Test => "test",
    }
}

impl Manifest {
    pub fn to_text(&self) -> String {
        let mut out = format!("{MAGIC} 1\nskeleton {}\n", self.skeleton.display());
        if let Some(fps) = self.fps {
            out += &format!("fps {}\n", float(fps));
        }
        if let Some(seed) = self.seed {
            out += &format!("seed {seed}\n");
        }
        if let Some(c) = &self.config {
            out += &format!("config {c}\n");
        }
        for (i, a) in self.actions.iter().enumerate() {
            out += &format!("action {i} {a}\n");
        }
        for (split, path) in &self.motions {
            out += &format!("motion {} {}\n", split_name(*split), path.display());
        }
        if let Some(n) = &self.normalizer {
            out += &format!("normalizer {}\nmean ", n.root);
            push_floats(&mut out, n.mean.iter().copied());
            out += "std ";
            push_floats(&mut out, n.std.iter().copied());
        }
        out
    }

    pub fn parse(path: &Path, text: &str) -> Result<Self> {
        let mut lines = Lines::new(path, text);
        lines.header(MAGIC, 1)?;
        let l = lines.expect("skeleton")?;
        lines.arity(&l, 2)?;
        let skeleton = PathBuf::from(l.tokens[1]);
        let fps = match lines.optional("fps")? {
            Some(l) => {
                lines.arity(&l, 2)?;
                let v = lines.number(&l, 1, "fps")?;
                if v <= 0.0 {
                    return Err(lines.error(l.number, "fps must be positive"));
                }
                Some(v)
            }
            None => None,
        };
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
        let mut actions = Vec::new();
        while let Some(l) = lines.optional("action")? {
            lines.arity(&l, 3)?;
            let id: usize = lines.field(&l, 1, "action id")?;
            if id != actions.len() {
                return Err(lines.error(l.number, format!("action {id} listed out of order")));
            }
            actions.push(l.tokens[2].to_string());
        }
        let mut motions = Vec::new();
        while let Some(l) = lines.optional("motion")? {
            lines.arity(&l, 3)?;
            let split = match l.tokens[1] {
                "train" => Split::Train,
                "test" => Split::Test,
                other => return Err(lines.error(l.number, format!("unknown split `{other}`"))),
            };
            motions.push((split, PathBuf::from(l.tokens[2])));
        }
        let normalizer = match lines.optional("normalizer")? {
            Some(l) => {
                lines.arity(&l, 2)?;
                let root = lines.field(&l, 1, "root index")?;
                let m = lines.expect("mean")?;
                let mean = lines.floats(&tail(&m), m.tokens.len() - 1)?;
                let s = lines.expect("std")?;
                let std = lines.floats(&tail(&s), s.tokens.len() - 1)?;
                if mean.len() != std.len() {
                    return Err(lines.error(s.number, "mean and std widths differ"));
                }
                Some(Normalizer { root, mean, std })
            }
            None => None,
        };
        lines.finish()?;
        Ok(Manifest {
            skeleton,
            fps,
            seed,
            config,
            actions,
            motions,
            normalizer,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(path, &read_file(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_file(path, self.to_text())
    }
}

fn tail<'a>(line: &super::text::Line<'a>) -> super::text::Line<'a> {
    super::text::Line {
        number: line.number,
        tokens: line.tokens[1..].to_vec(),
    }
}

fn base_dir(manifest: &Path) -> &Path {
    manifest.parent().unwrap_or(Path::new(""))
}

/// Loads the manifest and every file it references into a validated dataset.
pub fn load_dataset(manifest_path: &Path) -> Result<(Manifest, Dataset)> {
    let manifest = Manifest::load(manifest_path)?;
    let dir = base_dir(manifest_path);
    let skeleton = load_skeleton(&dir.join(&manifest.skeleton))?;
    let mut records = Vec::with_capacity(manifest.motions.len());
    let mut split = Vec::with_capacity(manifest.motions.len());
    for (s, rel) in &manifest.motions {
        let path = dir.join(rel);
        let mut record = load_motion(&path)?;
        let bad = |msg: String| CliError::validation(format!("{}: {msg}", path.display()));
        if record.skeleton != skeleton.name() {
            return Err(bad(format!(
                "motion uses skeleton `{}`, manifest skeleton is `{}`",
                record.skeleton,
                skeleton.name()
            )));
        }
        match manifest.actions.get(record.action_id) {
            Some(name) if *name == record.action => {}
            _ => {
                return Err(bad(format!(
                    "action `{}` ({}) is not in the manifest vocabulary",
                    record.action, record.action_id
                )))
            }
        }
        record.validate(skeleton.joint_count()).map_err(|e| bad(e.to_string()))?;
        if let Some(fps) = manifest.fps {
            if record.fps != fps {
                record = resample(&record, fps).map_err(|e| bad(e.to_string()))?;
            }
        }
        records.push(record);
        split.push(*s);
    }
    let dataset = Dataset::new(skeleton, manifest.actions.clone(), records, split)?;
    Ok((manifest, dataset))
}
