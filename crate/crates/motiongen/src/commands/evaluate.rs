use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::Args;
use motiongen_core::data::preprocess;
use motiongen_core::eval::{evaluate_model, train_classifier};
use motiongen_core::rng_from_seed;

use super::out_dir;
use crate::config::RunConfig;
use crate::error::{write_file, CliError, Result};
use crate::formats::{load_dataset, ClassifierCheckpoint, ModelCheckpoint, Provenance, ReportFile};

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Dataset manifest; overrides `data.manifest` from the config.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Trained classifier; one is trained and saved next to the report when omitted.
    #[arg(long)]
    pub classifier: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the configured repetition count.
    #[arg(long)]
    pub repetitions: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(args: &EvaluateArgs, out_root: &Path) -> Result<String> {
    let out = out_dir(&args.out, out_root, "evaluate");
    let mut config = RunConfig::load_or_default(args.config.as_deref())?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(r) = args.repetitions {
        config.evaluation.repetitions = r;
    }
    let hash = config.hash();
    let manifest = args
        .manifest
        .clone()
        .or_else(|| config.data.manifest.clone())
        .ok_or_else(|| CliError::validation("no dataset: pass --manifest or set data.manifest in the config"))?;

    let ckpt = ModelCheckpoint::load(&args.checkpoint)?;
    let (_, dataset) = load_dataset(&manifest)?;
    let data = preprocess(&dataset)?;
    let p = &ckpt.provenance;
    if !p.skeleton.same_topology(&data.skeleton) || p.actions != data.actions {
        return Err(CliError::validation(format!(
            "{}: model skeleton or action vocabulary differs from the dataset",
            args.checkpoint.display()
        )));
    }
    if data.test.is_empty() {
        return Err(CliError::validation("the dataset has no test motions to compare against"));
    }

    let classifier = match &args.classifier {
        Some(path) => {
            let c = ClassifierCheckpoint::load(path)?;
            if !c.provenance.skeleton.same_topology(&data.skeleton) || c.provenance.actions != data.actions {
                return Err(CliError::validation(format!(
                    "{}: classifier skeleton or action vocabulary differs from the dataset",
                    path.display()
                )));
            }
            c
        }
        None => {
            let trained = train_classifier(&data, &config.classifier_config(), &mut rng_from_seed(config.seed))?;
            let c = ClassifierCheckpoint {
                provenance: Provenance {
                    step: config.classifier.steps as u64,
                    is_final: true,
                    seed: config.seed,
                    config_hash: hash.clone(),
                    skeleton: data.skeleton.clone(),
                    actions: data.actions.clone(),
                },
                classifier: trained.classifier,
                test_accuracy: trained.test_accuracy,
            };
            c.save(&out.join("classifier.bin"))?;
            c
        }
    };

    let eval = config.eval_config(ckpt.model.config.sequence_length);
    let mut rng = rng_from_seed(config.seed.wrapping_add(1));
    let report = evaluate_model(&ckpt.model, &data.skeleton, &data.test, &classifier.classifier, &eval, &mut rng)?;
    let file = ReportFile::new(&report, config.seed, hash.clone(), p.step, classifier.test_accuracy);
    let path = out.join("report.txt");
    write_file(&path, file.to_text())?;

    let mut summary = format!(
        "evaluated step {} over {} repetitions of {} motions (seed {}, config {hash}); classifier test accuracy {:.3}\n",
        p.step, eval.repetitions, eval.n_samples, config.seed, classifier.test_accuracy
    );
    for r in &file.records {
        let _ = writeln!(summary, "  {:<9} {:<13} {:>10.4} ± {:.4}", r.source, r.metric, r.mean, r.ci95);
    }
    let _ = writeln!(summary, "report {}", path.display());
    Ok(summary)
}
