//! Run configuration, read from TOML. Every field has a desk-scale default.
//!
//! ```toml
//! seed = 7
//!
//! [model]
//! latent_dim = 16
//! hidden_dim = 64
//!
//! [training]
//! steps = 2000
//! ```

use std::path::{Path, PathBuf};

use motiongen_core::eval::{ClassifierConfig, EvalConfig};
use motiongen_core::neural::AdamConfig;
use motiongen_core::vae::VaeConfig;
use motiongen_core::Skeleton;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{read_file, CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub latent_dim: usize,
    pub hidden_dim: usize,
    pub encoder_out: usize,
    pub lambda_kl: f64,
    pub teacher_forcing: f64,
    pub sequence_length: usize,
    pub generator_layers: usize,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection {
            latent_dim: 16,
            hidden_dim: 64,
            encoder_out: 64,
            lambda_kl: 0.03,
            teacher_forcing: 0.2,
            sequence_length: 24,
            generator_layers: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerSection {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
    /// Global gradient-norm clip; 0 disables it.
    pub max_grad_norm: f64,
}

impl Default for OptimizerSection {
    fn default() -> Self {
        OptimizerSection {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay: 1e-5,
            max_grad_norm: 100.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingSection {
    pub steps: u64,
    pub batch_size: usize,
    /// Checkpoint period in steps; 0 keeps only the final checkpoint.
    pub checkpoint_every: u64,
}

impl Default for TrainingSection {
    fn default() -> Self {
        TrainingSection {
            steps: 2000,
            batch_size: 16,
            checkpoint_every: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationSection {
    pub n_samples: usize,
    pub diversity_subset: usize,
    pub multimodality_subset: usize,
    pub repetitions: usize,
    /// Generated length; 0 uses the model's training length.
    pub length: usize,
}

impl Default for EvaluationSection {
    fn default() -> Self {
        let e = EvalConfig::default();
        EvaluationSection {
            n_samples: e.n_samples,
            diversity_subset: e.diversity_subset,
            multimodality_subset: e.multimodality_subset,
            repetitions: e.repetitions,
            length: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierSection {
    pub hidden_dim: usize,
    pub steps: usize,
    pub batch_size: usize,
    pub min_length: usize,
    pub max_length: usize,
    pub lr: f64,
}

impl Default for ClassifierSection {
    fn default() -> Self {
        let c = ClassifierConfig::default();
        ClassifierSection {
            hidden_dim: c.hidden_dim,
            steps: 600,
            batch_size: c.batch,
            min_length: c.min_length,
            max_length: c.max_length,
            lr: c.lr,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSection {
    /// Used when no manifest is given on the command line; relative to the
    /// config file.
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub model: ModelSection,
    pub optimizer: OptimizerSection,
    pub training: TrainingSection,
    pub evaluation: EvaluationSection,
    pub classifier: ClassifierSection,
    pub data: DataSection,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::validation(format!("config: {e}")))
    }

    /// Reads `path`, resolving `data.manifest` against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let mut c = Self::parse(&read_file(path)?).map_err(|e| e.context(path.display()))?;
        if let Some(m) = c.data.manifest.take() {
            c.data.manifest = Some(path.parent().unwrap_or(Path::new("")).join(m));
        }
        Ok(c)
    }

    pub fn load_or_default(path: Option<&Path>) -> Result<Self> {
        path.map_or_else(|| Ok(Self::default()), Self::load)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// First 16 hex digits of the SHA-256 of the canonical TOML rendering.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn vae_config(&self, skeleton: &Skeleton, action_count: usize) -> Result<VaeConfig> {
        let m = &self.model;
        let config = VaeConfig {
            latent_dim: m.latent_dim,
            hidden_dim: m.hidden_dim,
            encoder_out: m.encoder_out,
            lambda_kl: m.lambda_kl,
            teacher_forcing: m.teacher_forcing,
            sequence_length: m.sequence_length,
            generator_layers: m.generator_layers,
            ..VaeConfig::for_skeleton(skeleton, action_count)
        };
        config.validate()?;
        Ok(config)
    }

    pub fn adam(&self) -> Result<AdamConfig> {
        let o = &self.optimizer;
        let ok = o.lr > 0.0
            && (0.0..1.0).contains(&o.beta1)
            && (0.0..1.0).contains(&o.beta2)
            && o.eps > 0.0
            && o.weight_decay >= 0.0
            && o.max_grad_norm >= 0.0;
        if !ok {
            return Err(CliError::validation(
                "optimizer: need lr > 0, betas in [0, 1), eps > 0, and weight_decay and max_grad_norm ≥ 0",
            ));
        }
        Ok(AdamConfig {
            lr: o.lr,
            beta1: o.beta1,
            beta2: o.beta2,
            eps: o.eps,
            weight_decay: o.weight_decay,
            max_grad_norm: if o.max_grad_norm == 0.0 { f64::INFINITY } else { o.max_grad_norm },
        })
    }

    pub fn eval_config(&self, model_length: usize) -> EvalConfig {
        let e = &self.evaluation;
        EvalConfig {
            n_samples: e.n_samples,
            diversity_subset: e.diversity_subset,
            multimodality_subset: e.multimodality_subset,
            repetitions: e.repetitions,
            length: if e.length == 0 { model_length } else { e.length },
        }
    }

    pub fn classifier_config(&self) -> ClassifierConfig {
        let c = &self.classifier;
        ClassifierConfig {
            hidden_dim: c.hidden_dim,
            steps: c.steps,
            batch: c.batch_size,
            min_length: c.min_length,
            max_length: c.max_length,
            lr: c.lr,
        }
    }
}
