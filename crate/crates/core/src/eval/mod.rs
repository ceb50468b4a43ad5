//! Motion-quality metrics over classifier features: FID, recognition
//! accuracy, diversity and multimodality, with repeated-run intervals.

pub mod classifier;
pub mod linalg;
pub mod metrics;

pub use classifier::{recognition_accuracy, train_classifier, ClassifierConfig, MotionClassifier, TrainedClassifier};
pub use metrics::{
    class_conditional_fid, diversity, fid, fid_between, mean_and_ci95, multimodality, sample_indices, GaussianStats,
};

use alloc::vec::Vec;

use rand::Rng as _;

use crate::data::PreparedMotion;
use crate::error::{Error, Result};
use crate::skeleton::Skeleton;
use crate::vae::{generate_batch, VaeModel};
use crate::Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalConfig {
    pub n_samples: usize,
    pub diversity_subset: usize,
    pub multimodality_subset: usize,
    pub repetitions: usize,
    /// Frames per generated motion; real motions are cropped to match.
    pub length: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            n_samples: 300,
            diversity_subset: 50,
            multimodality_subset: 10,
            repetitions: 20,
            length: 24,
        }
    }
}

/// One metric over all repetitions.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    /// `generated` or `real`.
    pub source: &'static str,
    pub metric: &'static str,
    pub values: Vec<f64>,
    pub mean: f64,
    pub ci95: f64,
    /// Motions per repetition.
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub rows: Vec<MetricRow>,
}

impl EvalReport {
    pub fn get(&self, source: &str, metric: &str) -> Option<&MetricRow> {
        self.rows.iter().find(|r| r.source == source && r.metric == metric)
    }
}

pub const METRICS: [&str; 4] = ["fid", "accuracy", "diversity", "multimodality"];

/// Random `length`-frame crops (whole motion when shorter) drawn with
/// replacement, with their labels.
pub fn sample_real<'a>(pool: &'a [PreparedMotion], count: usize, length: usize, rng: &mut Rng) -> (Vec<&'a [Vec<f64>]>, Vec<usize>) {
    (0..count)
        .map(|_| {
            let m = &pool[rng.random_range(0..pool.len())];
            let len = length.min(m.len());
            let start = rng.random_range(0..=m.len() - len);
            (&m.joints[start..start + len], m.action_id)
        })
        .unzip()
}

struct Scores {
    fid: f64,
    accuracy: f64,
    diversity: f64,
    multimodality: f64,
}

fn scores(
    classifier: &MotionClassifier,
    motions: &[&[Vec<f64>]],
    labels: &[usize],
    reference: &[Vec<f64>],
    config: &EvalConfig,
    rng: &mut Rng,
) -> Result<Scores> {
    let features = classifier.extract_many(motions)?;
    let classes = classifier.action_count;
    Ok(Scores {
        fid: fid_between(&features, reference)?,
        accuracy: recognition_accuracy(classifier, motions, labels)?,
        diversity: diversity(&features, config.diversity_subset, rng)?,
        multimodality: multimodality(&features, labels, classes, config.multimodality_subset, rng)?,
    })
}

/// Scores generated motions with uniformly drawn labels against real motions
/// sampled with replacement from `real`, plus the same metrics for a second
/// real sample as reference, repeated `config.repetitions` times.
pub fn evaluate_model(
    model: &VaeModel,
    skeleton: &Skeleton,
    real: &[PreparedMotion],
    classifier: &MotionClassifier,
    config: &EvalConfig,
    rng: &mut Rng,
) -> Result<EvalReport> {
    if real.is_empty() {
        return Err(Error::DegenerateDataset("no real motions to compare against".into()));
    }
    if config.n_samples < 2 || config.repetitions == 0 || config.length == 0 {
        return Err(Error::InvalidArgument(
            "evaluation needs two or more samples, one or more repetitions and a positive length".into(),
        ));
    }
    let classes = model.config.action_count;
    let mut generated: [Vec<f64>; 4] = Default::default();
    let mut reference: [Vec<f64>; 4] = Default::default();
    for _ in 0..config.repetitions {
        let (real_a, _) = sample_real(real, config.n_samples, config.length, rng);
        let (real_b, labels_b) = sample_real(real, config.n_samples, config.length, rng);
        let features_a = classifier.extract_many(&real_a)?;

        let actions: Vec<usize> = (0..config.n_samples).map(|_| rng.random_range(0..classes)).collect();
        let motions = generate_batch(model, &actions, config.length, skeleton, rng)?;
        let rows: Vec<Vec<Vec<f64>>> = motions
            .iter()
            .map(|m| m.joints.iter().map(|p| p.to_flat()).collect())
            .collect();
        let gen_refs: Vec<&[Vec<f64>]> = rows.iter().map(Vec::as_slice).collect();

        let g = scores(classifier, &gen_refs, &actions, &features_a, config, rng)?;
        let r = scores(classifier, &real_b, &labels_b, &features_a, config, rng)?;
        for (slot, s) in [(&mut generated, g), (&mut reference, r)] {
            slot[0].push(s.fid);
            slot[1].push(s.accuracy);
            slot[2].push(s.diversity);
            slot[3].push(s.multimodality);
        }
    }
    let mut rows = Vec::with_capacity(8);
    for (source, table) in [("generated", generated), ("real", reference)] {
        for (metric, values) in METRICS.iter().zip(table) {
            let (mean, ci95) = mean_and_ci95(&values);
            rows.push(MetricRow {
                source,
                metric,
                values,
                mean,
                ci95,
                n: config.n_samples,
            });
        }
    }
    Ok(EvalReport { rows })
}
