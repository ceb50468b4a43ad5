use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Args;
use motiongen_core::data::{default_specs, preprocess, synthesize_dataset, Split};
use motiongen_core::rng_from_seed;
use serde::Serialize;
use sha2::{Digest, Sha256};

use super::{out_dir, skeleton_or_default};
use crate::error::{CliError, Result};
use crate::formats::{save_skeleton, skeleton_to_string, Manifest, MotionFile, SpecFile};

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    /// TOML action specifications; the four built-in actions when omitted.
    #[arg(long)]
    pub spec_file: Option<PathBuf>,
    #[arg(long, default_value_t = 50)]
    pub n_per_action: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value_t = 12.0)]
    pub fps: f64,
    /// Skeleton file; the built-in 21-joint skeleton when omitted.
    #[arg(long)]
    pub skeleton: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct Settings<'a> {
    seed: u64,
    n_per_action: usize,
    fps: f64,
    skeleton: String,
    specs: &'a SpecFile,
}

pub fn run(args: &SynthArgs, out_root: &std::path::Path) -> Result<String> {
    let out = out_dir(&args.out, out_root, "synth");
    let skeleton = skeleton_or_default(&args.skeleton)?;
    let specs = match &args.spec_file {
        Some(path) => SpecFile::load(path)?.to_specs(&skeleton).map_err(|e| e.context(path.display()))?,
        None => {
            if !skeleton.same_topology(&motiongen_core::Skeleton::default_human()) {
                return Err(CliError::validation(
                    "the built-in actions need the built-in skeleton topology; pass --spec-file",
                ));
            }
            default_specs()
        }
    };
    let spec_file = SpecFile::from_specs(&specs, &skeleton);
    let settings = Settings {
        seed: args.seed,
        n_per_action: args.n_per_action,
        fps: args.fps,
        skeleton: skeleton_to_string(&skeleton),
        specs: &spec_file,
    };
    let text = toml::to_string(&settings).expect("settings serialize");
    let hash: String = Sha256::digest(text.as_bytes()).iter().take(8).map(|b| format!("{b:02x}")).collect();

    let dataset = synthesize_dataset(&specs, args.n_per_action, &skeleton, args.fps, &mut rng_from_seed(args.seed))?;
    let prepared = preprocess(&dataset)?;

    save_skeleton(&out.join("skeleton.txt"), &skeleton)?;
    let mut counters = vec![0usize; dataset.actions.len()];
    let mut entries = Vec::with_capacity(dataset.motions.len());
    for (record, split) in dataset.motions.iter().zip(&dataset.split) {
        let k = &mut counters[record.action_id];
        let rel = PathBuf::from("motions").join(format!("{}_{:03}.txt", record.action, *k));
        *k += 1;
        let mut file = MotionFile::from_record(record);
        file.header.seed = Some(args.seed);
        file.header.config = Some(hash.clone());
        file.save(&out.join(&rel))?;
        entries.push((*split, rel));
    }
    let manifest = Manifest {
        skeleton: PathBuf::from("skeleton.txt"),
        fps: Some(args.fps),
        seed: Some(args.seed),
        config: Some(hash.clone()),
        actions: dataset.actions.clone(),
        motions: entries,
        normalizer: Some(prepared.normalizer.clone()),
    };
    let manifest_path = out.join("manifest.txt");
    manifest.save(&manifest_path)?;

    let mut summary = format!(
        "wrote {} motions of {} actions to {} (seed {}, config {hash})\n",
        dataset.motions.len(),
        dataset.actions.len(),
        manifest_path.display(),
        args.seed
    );
    let mut stats: BTreeMap<usize, (usize, usize, usize, usize)> = BTreeMap::new();
    for (m, s) in dataset.motions.iter().zip(&dataset.split) {
        let e = stats.entry(m.action_id).or_insert((0, 0, usize::MAX, 0));
        if *s == Split::Train {
            e.0 += 1;
        } else {
            e.1 += 1;
        }
        e.2 = e.2.min(m.len());
        e.3 = e.3.max(m.len());
    }
    for (id, (train, test, lo, hi)) in stats {
        summary += &format!(
            "  {:<16} train {train:>3}  test {test:>3}  frames {lo}-{hi} ({:.2}-{:.2} s)\n",
            dataset.actions[id],
            lo as f64 / args.fps,
            hi as f64 / args.fps
        );
    }
    Ok(summary)
}
