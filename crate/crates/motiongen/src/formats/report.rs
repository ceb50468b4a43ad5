//! Evaluation report: provenance lines, then one record per metric.
//!
//! ```text
//! motiongen-report 1
//! seed 3
//! config 3f2a…
//! model_step 2000
//! classifier_test_accuracy 1.0
//! repetitions 20
//! record generated fid 0.85 0.14 300
//! ```
//!
//! A record lists source, metric, mean, 95% half-width and motions per
//! repetition.

use std::path::Path;

use motiongen_core::eval::EvalReport;

use super::text::{float, Lines};
use crate::error::{read_file, Result};

const MAGIC: &str = "motiongen-report";

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRecord {
    pub source: String,
    pub metric: String,
    pub mean: f64,
    pub ci95: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportFile {
    pub seed: u64,
    pub config: String,
    pub model_step: u64,
    pub classifier_test_accuracy: f64,
    pub repetitions: usize,
    pub records: Vec<ReportRecord>,
}

impl ReportFile {
    pub fn new(report: &EvalReport, seed: u64, config: String, model_step: u64, classifier_test_accuracy: f64) -> Self {
        ReportFile {
            seed,
            config,
            model_step,
            classifier_test_accuracy,
            repetitions: report.rows.first().map_or(0, |r| r.values.len()),
            records: report
                .rows
                .iter()
                .map(|r| ReportRecord {
                    source: r.source.to_string(),
                    metric: r.metric.to_string(),
                    mean: r.mean,
                    ci95: r.ci95,
                    n: r.n,
                })
                .collect(),
        }
    }

    pub fn get(&self, source: &str, metric: &str) -> Option<&ReportRecord> {
        self.records.iter().find(|r| r.source == source && r.metric == metric)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{MAGIC} 1\nseed {}\nconfig {}\nmodel_step {}\nclassifier_test_accuracy {}\nrepetitions {}\n",
            self.seed,
            self.config,
            self.model_step,
            float(self.classifier_test_accuracy),
            self.repetitions
        );
        out += "# record source metric mean ci95 n\n";
        for r in &self.records {
            out += &format!(
                "record {} {} {} {} {}\n",
                r.source,
                r.metric,
                float(r.mean),
                float(r.ci95),
                r.n
            );
        }
        out
    }

    pub fn parse(path: &Path, text: &str) -> Result<Self> {
        let mut lines = Lines::new(path, text);
        lines.header(MAGIC, 1)?;
        let seed = lines.value("seed", "seed")?;
        let config = lines.value("config", "config hash")?;
        let model_step = lines.value("model_step", "model step")?;
        let classifier_test_accuracy = lines.value("classifier_test_accuracy", "accuracy")?;
        let repetitions = lines.value("repetitions", "repetition count")?;
        let mut records = Vec::new();
        while let Some(l) = lines.optional("record")? {
            lines.arity(&l, 6)?;
            records.push(ReportRecord {
                source: l.tokens[1].to_string(),
                metric: l.tokens[2].to_string(),
                mean: lines.field(&l, 3, "mean")?,
                ci95: lines.field(&l, 4, "interval")?,
                n: lines.field(&l, 5, "sample count")?,
            });
        }
        lines.finish()?;
        Ok(ReportFile {
            seed,
            config,
            model_step,
            classifier_test_accuracy,
            repetitions,
            records,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(path, &read_file(path)?)
    }
}
