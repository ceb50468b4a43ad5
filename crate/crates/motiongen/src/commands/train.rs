use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::Args;
use motiongen_core::data::preprocess;
use motiongen_core::vae::{sample_windows, StepStats, Trainer, VaeModel};
use motiongen_core::{rng_from_seed, Rng};

use super::out_dir;
use crate::config::RunConfig;
use crate::error::{write_file, CliError, Result};
use crate::formats::{load_dataset, ModelCheckpoint, Provenance};

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    /// TOML run configuration; defaults apply to anything it omits.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Dataset manifest; overrides `data.manifest` from the config.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Output directory for the log and checkpoints.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the configured step count.
    #[arg(long)]
    pub steps: Option<u64>,
    /// Continue from a checkpoint written by an earlier run.
    #[arg(long)]
    pub resume: Option<PathBuf>,
}

/// Settings after applying command-line overrides.
pub fn resolve_config(args: &TrainArgs) -> Result<(RunConfig, PathBuf)> {
    let mut config = RunConfig::load_or_default(args.config.as_deref())?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(steps) = args.steps {
        config.training.steps = steps;
    }
    let manifest = args
        .manifest
        .clone()
        .or_else(|| config.data.manifest.clone())
        .ok_or_else(|| CliError::validation("no dataset: pass --manifest or set data.manifest in the config"))?;
    if config.training.batch_size == 0 {
        return Err(CliError::validation("training.batch_size must be positive"));
    }
    Ok((config, manifest))
}

fn log_header(config: &RunConfig, hash: &str, start: u64) -> String {
    let m = &config.model;
    let o = &config.optimizer;
    let t = &config.training;
    format!(
        "# seed {}\n# config {hash}\n# start_step {start}\n# lambda_kl {:?} teacher_forcing {:?} latent_dim {} hidden_dim {} \
         sequence_length {} batch_size {} lr {:?}\nstep\tloss\treconstruction\tkl\tteacher_forced\n",
        config.seed, m.lambda_kl, m.teacher_forcing, m.latent_dim, m.hidden_dim, m.sequence_length, t.batch_size, o.lr
    )
}

fn log_row(out: &mut String, s: &StepStats) {
    let forced = s.teacher_forced.iter().filter(|&&b| b).count() as f64 / s.teacher_forced.len().max(1) as f64;
    let _ = writeln!(out, "{}\t{:?}\t{:?}\t{:?}\t{:?}", s.step, s.loss, s.reconstruction, s.kl, forced);
}

pub fn run(args: &TrainArgs, out_root: &Path) -> Result<String> {
    let out = out_dir(&args.out, out_root, "train");
    let (config, manifest_path) = resolve_config(args)?;
    let hash = config.hash();
    let (_, dataset) = load_dataset(&manifest_path)?;
    let data = preprocess(&dataset)?;
    let skeleton = &data.skeleton;
    let vae = config.vae_config(skeleton, data.actions.len())?;
    let adam = config.adam()?;

    let (mut trainer, mut rng): (Trainer, Rng) = match &args.resume {
        None => {
            let mut rng = rng_from_seed(config.seed);
            let model = VaeModel::new(vae, data.normalizer.clone(), &mut rng)?;
            (Trainer::new(model, adam), rng)
        }
        Some(path) => {
            let ckpt = ModelCheckpoint::load(path)?;
            let p = &ckpt.provenance;
            if ckpt.model.config != vae {
                return Err(CliError::validation(format!(
                    "{}: checkpoint model settings differ from this run's (checkpoint config {})",
                    path.display(),
                    p.config_hash
                )));
            }
            if !p.skeleton.same_topology(skeleton) || p.actions != data.actions {
                return Err(CliError::validation(format!(
                    "{}: checkpoint skeleton or action vocabulary differs from the dataset",
                    path.display()
                )));
            }
            let (Some(adam_state), Some(rng)) = (ckpt.adam, ckpt.rng) else {
                return Err(CliError::validation(format!(
                    "{}: checkpoint carries no optimizer state to resume from",
                    path.display()
                )));
            };
            (
                Trainer {
                    model: ckpt.model,
                    adam: adam_state,
                },
                rng,
            )
        }
    };

    let start = trainer.adam.step;
    let total = config.training.steps;
    if start > total {
        return Err(CliError::validation(format!(
            "checkpoint is at step {start}, beyond the configured {total} steps"
        )));
    }
    let provenance = |step: u64, is_final: bool| Provenance {
        step,
        is_final,
        seed: config.seed,
        config_hash: hash.clone(),
        skeleton: skeleton.clone(),
        actions: data.actions.clone(),
    };
    let save = |trainer: &Trainer, rng: &Rng, path: &Path, is_final: bool| {
        ModelCheckpoint {
            provenance: provenance(trainer.adam.step, is_final),
            model: trainer.model.clone(),
            adam: Some(trainer.adam.clone()),
            rng: Some(rng.clone()),
        }
        .save(path)
    };

    let log_path = out.join("train_log.tsv");
    let mut log = log_header(&config, &hash, start);
    let length = vae.sequence_length;
    let mut last: Option<StepStats> = None;
    let mut first_recon = None;
    while trainer.adam.step < total {
        let batch = sample_windows(&data.train, config.training.batch_size, length, &mut rng)?;
        let stats = match trainer.step(&batch, skeleton, &mut rng) {
            Ok(s) => s,
            Err(e) => {
                write_file(&log_path, &log)?;
                return Err(CliError::from(e).context(format!("training diverged (log at {})", log_path.display())));
            }
        };
        log_row(&mut log, &stats);
        first_recon.get_or_insert(stats.reconstruction);
        let every = config.training.checkpoint_every;
        if every > 0 && stats.step % every == 0 && stats.step < total {
            save(&trainer, &rng, &out.join("checkpoints").join(format!("step_{:06}.bin", stats.step)), false)?;
        }
        last = Some(stats);
    }
    write_file(&log_path, &log)?;
    let final_path = out.join("final.bin");
    save(&trainer, &rng, &final_path, true)?;

    let mut summary = format!(
        "trained {} steps ({}..{total}) on {} motions; seed {}, config {hash}\n",
        total - start,
        start,
        data.train.len(),
        config.seed
    );
    if let (Some(first), Some(s)) = (first_recon, &last) {
        let _ = writeln!(
            summary,
            "reconstruction {first:.4} -> {:.4}, kl {:.4}, loss {:.4}",
            s.reconstruction, s.kl, s.loss
        );
    }
    let _ = writeln!(summary, "log {}\ncheckpoint {}", log_path.display(), final_path.display());
    Ok(summary)
}
