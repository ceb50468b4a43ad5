//! GRU action classifier whose final hidden state serves as the motion
//! feature.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng as _;

use crate::data::{Normalizer, PreparedDataset, PreparedMotion};
use crate::error::{check_len, Error, Result};
use crate::neural::tape::softmax_rows;
use crate::neural::{AdamConfig, AdamState, Bound, GruCell, Linear, Params, Tape, Tensor, Var};
use crate::Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifierConfig {
    pub hidden_dim: usize,
    pub steps: usize,
    pub batch: usize,
    /// Training windows have a length drawn from this inclusive range.
    pub min_length: usize,
    pub max_length: usize,
    pub lr: f64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            hidden_dim: 32,
            steps: 400,
            batch: 16,
            min_length: 16,
            max_length: 40,
            lr: 3e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MotionClassifier {
    pub params: Params,
    pub input: Linear,
    pub gru: GruCell,
    pub head: Linear,
    pub normalizer: Normalizer,
    pub action_count: usize,
}

impl MotionClassifier {
    pub fn new(normalizer: Normalizer, action_count: usize, hidden_dim: usize, rng: &mut Rng) -> Result<Self> {
        if action_count < 2 || hidden_dim == 0 {
            return Err(Error::InvalidArgument(
                "a classifier needs two or more actions and a positive width".into(),
            ));
        }
        let mut params = Params::new();
        let d = normalizer.dim();
        let input = Linear::new(&mut params, "classifier.input", d, hidden_dim, rng);
        let gru = GruCell::new(&mut params, "classifier.gru", hidden_dim, hidden_dim, rng);
        let head = Linear::new(&mut params, "classifier.head", hidden_dim, action_count, rng);
        Ok(MotionClassifier {
            params,
            input,
            gru,
            head,
            normalizer,
            action_count,
        })
    }

    pub fn feature_dim(&self) -> usize {
        self.gru.hidden_size
    }

    /// Final hidden state and logits for a batch of equal-length motions.
    fn forward(&self, tape: &mut Tape, bound: &Bound, motions: &[&[Vec<f64>]]) -> Result<(Var, Var)> {
        let length = motions[0].len();
        if length == 0 {
            return Err(Error::InvalidArgument("cannot classify an empty motion".into()));
        }
        for m in motions {
            check_len("classifier batch length", length, m.len())?;
        }
        let mut h = tape.constant(Tensor::zeros(motions.len(), self.feature_dim()));
        for t in 0..length {
            let rows: Vec<Vec<f64>> = motions.iter().map(|m| self.normalizer.features(&m[t])).collect();
            let x = tape.constant(Tensor::from_rows(&rows)?);
            let e = self.input.forward(tape, bound, x)?;
            let e = tape.tanh(e);
            h = self.gru.step(tape, bound, e, h)?;
        }
        let logits = self.head.forward(tape, bound, h)?;
        Ok((h, logits))
    }

    fn run(&self, motions: &[&[Vec<f64>]]) -> Result<(Tensor, Tensor)> {
        let mut tape = Tape::new();
        let bound = self.params.bind(&mut tape, false);
        let (h, logits) = self.forward(&mut tape, &bound, motions)?;
        Ok((tape.value(h).clone(), tape.value(logits).clone()))
    }

    /// Final GRU hidden state for a motion given as joint-coordinate rows.
    pub fn extract_features(&self, motion: &[Vec<f64>]) -> Result<Vec<f64>> {
        Ok(self.run(&[motion])?.0.into_data())
    }

    /// Features of many motions, batched by length.
    pub fn extract_many(&self, motions: &[&[Vec<f64>]]) -> Result<Vec<Vec<f64>>> {
        let mut out: Vec<Option<Vec<f64>>> = motions.iter().map(|_| None).collect();
        let mut lengths: Vec<usize> = motions.iter().map(|m| m.len()).collect();
        lengths.sort_unstable();
        lengths.dedup();
        for len in lengths {
            let idx: Vec<usize> = (0..motions.len()).filter(|&i| motions[i].len() == len).collect();
            let group: Vec<&[Vec<f64>]> = idx.iter().map(|&i| motions[i]).collect();
            let (h, _) = self.run(&group)?;
            for (r, &i) in idx.iter().enumerate() {
                out[i] = Some(h.row(r).to_vec());
            }
        }
        Ok(out.into_iter().map(|f| f.expect("every motion batched")).collect())
    }

    /// Class probabilities.
    pub fn predict_proba(&self, motion: &[Vec<f64>]) -> Result<Vec<f64>> {
        Ok(softmax_rows(&self.run(&[motion])?.1).into_data())
    }

    /// Most probable class of each motion.
    pub fn predict_many(&self, motions: &[&[Vec<f64>]]) -> Result<Vec<usize>> {
        let features = self.extract_many(motions)?;
        let mut tape = Tape::new();
        let bound = self.params.bind(&mut tape, false);
        let h = tape.constant(Tensor::from_rows(&features)?);
        let logits = self.head.forward(&mut tape, &bound, h)?;
        let l = tape.value(logits);
        Ok((0..l.rows())
            .map(|r| {
                l.row(r)
                    .iter()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |best, (k, &v)| if v > best.1 { (k, v) } else { best })
                    .0
            })
            .collect())
    }
}

/// Fraction of motions whose predicted class equals the claimed label.
pub fn recognition_accuracy(classifier: &MotionClassifier, motions: &[&[Vec<f64>]], labels: &[usize]) -> Result<f64> {
    check_len("label count", motions.len(), labels.len())?;
    if motions.is_empty() {
        return Err(Error::InvalidArgument("accuracy of an empty set".into()));
    }
    let predicted = classifier.predict_many(motions)?;
    let hits = predicted.iter().zip(labels).filter(|(p, l)| p == l).count();
    Ok(hits as f64 / motions.len() as f64)
}

/// Trained classifier and its accuracy on the test split (whole motions).
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedClassifier {
    pub classifier: MotionClassifier,
    pub test_accuracy: f64,
}

/// Cross-entropy training on random windows of the training split.
pub fn train_classifier(data: &PreparedDataset, config: &ClassifierConfig, rng: &mut Rng) -> Result<TrainedClassifier> {
    let classes = data.actions.len();
    if classes < 2 {
        return Err(Error::DegenerateDataset(format!("{classes} action class(es); need at least two")));
    }
    for c in 0..classes {
        let n = data.train.iter().chain(&data.test).filter(|m| m.action_id == c).count();
        if n < 2 {
            return Err(Error::DegenerateDataset(format!(
                "action `{}` has {n} motion(s); need at least two",
                data.actions[c]
            )));
        }
    }
    if config.min_length == 0 || config.min_length > config.max_length || config.batch == 0 {
        return Err(Error::InvalidArgument("invalid classifier window or batch size".into()));
    }
    let shortest = data.train.iter().map(PreparedMotion::len).min().unwrap_or(0);
    let max_len = config.max_length.min(shortest);
    let min_len = config.min_length.min(max_len);
    if min_len == 0 {
        return Err(Error::DegenerateDataset("training split has an empty motion".into()));
    }
    let mut classifier = MotionClassifier::new(data.normalizer.clone(), classes, config.hidden_dim, rng)?;
    let mut adam = AdamState::new(
        AdamConfig {
            lr: config.lr,
            weight_decay: 0.0,
            ..AdamConfig::default()
        },
        &classifier.params,
    );
    for step in 0..config.steps {
        let len = rng.random_range(min_len..=max_len);
        let mut windows: Vec<&[Vec<f64>]> = Vec::with_capacity(config.batch);
        let mut labels = Vec::with_capacity(config.batch);
        for _ in 0..config.batch {
            let m = &data.train[rng.random_range(0..data.train.len())];
            let start = rng.random_range(0..=m.len() - len);
            windows.push(&m.joints[start..start + len]);
            labels.push(m.action_id);
        }
        let mut tape = Tape::new();
        let bound = classifier.params.bind(&mut tape, true);
        let (_, logits) = classifier.forward(&mut tape, &bound, &windows)?;
        let nll = tape.softmax_nll(logits, &labels)?;
        let loss = tape.scale(nll, 1.0 / config.batch as f64);
        let value = tape.value(loss).item();
        if !value.is_finite() {
            return Err(Error::Divergence {
                step: step as u64 + 1,
                detail: format!("classifier loss {value}"),
            });
        }
        let grads = tape.backward(loss)?;
        let grads = bound.gradients(&grads, &classifier.params);
        adam.update(&mut classifier.params, &grads)?;
    }
    let test_accuracy = if data.test.is_empty() {
        f64::NAN
    } else {
        let motions: Vec<&[Vec<f64>]> = data.test.iter().map(|m| m.joints.as_slice()).collect();
        let labels: Vec<usize> = data.test.iter().map(|m| m.action_id).collect();
        recognition_accuracy(&classifier, &motions, &labels)?
    };
    Ok(TrainedClassifier {
        classifier,
        test_accuracy,
    })
}
