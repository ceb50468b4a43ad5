//! Datasets, the train/test split and conversion to training sequences.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::seq::SliceRandom;

use super::motion::MotionRecord;
use super::normalize::Normalizer;
use crate::error::{Error, Result};
use crate::kinematics::{inverse_kinematics, LiePose};
use crate::skeleton::Skeleton;
use crate::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

/// A skeleton, an action vocabulary and labelled motions with their split.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub skeleton: Skeleton,
    pub actions: Vec<String>,
    pub motions: Vec<MotionRecord>,
    pub split: Vec<Split>,
}

impl Dataset {
    pub fn new(skeleton: Skeleton, actions: Vec<String>, motions: Vec<MotionRecord>, split: Vec<Split>) -> Result<Self> {
        let data = Dataset {
            skeleton,
            actions,
            motions,
            split,
        };
        data.validate()?;
        Ok(data)
    }

    /// Every record labelled from the vocabulary, sized for the skeleton and
    /// assigned exactly one split.
    pub fn validate(&self) -> Result<()> {
        if self.split.len() != self.motions.len() {
            return Err(Error::Shape {
                what: "split assignments",
                expected: self.motions.len(),
                found: self.split.len(),
            });
        }
        for (i, m) in self.motions.iter().enumerate() {
            let wrap = |e: Error| Error::InRecord {
                record: i,
                source: Box::new(e),
            };
            if self.actions.get(m.action_id) != Some(&m.action) {
                return Err(wrap(Error::InvalidArgument(format!(
                    "label `{}` (id {}) is not in the vocabulary",
                    m.action, m.action_id
                ))));
            }
            m.validate(self.skeleton.joint_count()).map_err(wrap)?;
        }
        Ok(())
    }

    pub fn indices(&self, split: Split) -> Vec<usize> {
        (0..self.motions.len()).filter(|&i| self.split[i] == split).collect()
    }
}

/// Seeded per-class shuffle; the first `round(fraction · n)` members of each
/// class train, clamped so a class of two or more keeps one motion on each
/// side.
pub fn split_by_class(labels: &[usize], train_fraction: f64, rng: &mut Rng) -> Vec<Split> {
    let mut out = alloc::vec![Split::Train; labels.len()];
    let classes = labels.iter().copied().max().map_or(0, |m| m + 1);
    for c in 0..classes {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
        if members.len() < 2 {
            continue;
        }
        members.shuffle(rng);
        let n = members.len();
        let train = ((n as f64 * train_fraction).round() as usize).clamp(1, n - 1);
        for &i in &members[train..] {
            out[i] = Split::Test;
        }
    }
    out
}

/// One motion in every form the model and the metrics consume.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedMotion {
    pub record: usize,
    pub action_id: usize,
    /// Joint coordinates, one `3J` row per frame.
    pub joints: Vec<Vec<f64>>,
    /// Standardized root-relative features, one row per frame.
    pub features: Vec<Vec<f64>>,
    pub lie: Vec<LiePose>,
}

impl PreparedMotion {
    pub fn len(&self) -> usize {
        self.joints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.joints.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreparedDataset {
    pub skeleton: Skeleton,
    pub actions: Vec<String>,
    pub normalizer: Normalizer,
    pub train: Vec<PreparedMotion>,
    pub test: Vec<PreparedMotion>,
}

/// Converts every frame to Lie parameters and fits normalization on the
/// training split only.
pub fn preprocess(dataset: &Dataset) -> Result<PreparedDataset> {
    dataset.validate()?;
    let skeleton = &dataset.skeleton;
    let train_idx = dataset.indices(Split::Train);
    let test_idx = dataset.indices(Split::Test);
    if train_idx.is_empty() {
        return Err(Error::DegenerateDataset("the training split is empty".into()));
    }
    let rows: Vec<Vec<Vec<f64>>> = dataset.motions.iter().map(MotionRecord::rows).collect();
    let normalizer = Normalizer::fit(
        skeleton.joint_count(),
        skeleton.root(),
        train_idx.iter().flat_map(|&i| rows[i].iter().map(Vec::as_slice)),
    )?;
    let prepare = |i: usize| -> Result<PreparedMotion> {
        let motion = &dataset.motions[i];
        let lie = motion
            .frames
            .iter()
            .map(|f| inverse_kinematics(f, skeleton))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::InRecord {
                record: i,
                source: Box::new(e),
            })?;
        Ok(PreparedMotion {
            record: i,
            action_id: motion.action_id,
            features: rows[i].iter().map(|r| normalizer.features(r)).collect(),
            joints: rows[i].clone(),
            lie,
        })
    };
    let train = train_idx.into_iter().map(prepare).collect::<Result<Vec<_>>>()?;
    let test = test_idx.into_iter().map(prepare).collect::<Result<Vec<_>>>()?;
    Ok(PreparedDataset {
        skeleton: skeleton.clone(),
        actions: dataset.actions.clone(),
        normalizer,
        train,
        test,
    })
}

/// Largest absolute coordinate error of re-applying forward kinematics to
/// the prepared Lie parameters.
pub fn round_trip_error(motion: &PreparedMotion, skeleton: &Skeleton) -> Result<f64> {
    let mut worst = 0.0f64;
    for (lie, row) in motion.lie.iter().zip(&motion.joints) {
        let joints = crate::kinematics::forward_kinematics(lie, skeleton)?.to_flat();
        for (a, b) in joints.iter().zip(row) {
            worst = worst.max((a - b).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::synth::{default_specs, synthesize_dataset};
    use crate::rng_from_seed;

    fn small() -> Dataset {
        synthesize_dataset(&default_specs(), 5, &Skeleton::default_human(), 12.0, &mut rng_from_seed(3)).unwrap()
    }

    #[test]
    fn split_is_per_class_and_seeded() {
        let labels = [0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 2];
        let a = split_by_class(&labels, 0.8, &mut rng_from_seed(1));
        let b = split_by_class(&labels, 0.8, &mut rng_from_seed(1));
        assert_eq!(a, b);
        for c in 0..2 {
            let test = (0..labels.len()).filter(|&i| labels[i] == c && a[i] == Split::Test).count();
            assert_eq!(test, 1);
        }
        assert_eq!(a[10], Split::Train);
    }

    #[test]
    fn preprocess_round_trips_through_fk() {
        let data = small();
        let prep = preprocess(&data).unwrap();
        assert_eq!(prep.train.len() + prep.test.len(), 20);
        for m in prep.train.iter().chain(&prep.test) {
            assert!(round_trip_error(m, &prep.skeleton).unwrap() < 1e-9);
        }
    }

    #[test]
    fn train_features_are_standardized_and_test_is_isolated() {
        let data = small();
        let prep = preprocess(&data).unwrap();
        let dim = prep.normalizer.dim();
        let rows: Vec<&Vec<f64>> = prep.train.iter().flat_map(|m| &m.features).collect();
        let n = rows.len() as f64;
        for k in 0..dim {
            let mean = rows.iter().map(|r| r[k]).sum::<f64>() / n;
            let var = rows.iter().map(|r| (r[k] - mean).powi(2)).sum::<f64>() / n;
            assert!(mean.abs() < 1e-9, "channel {k} mean {mean}");
            assert!((var - 1.0).abs() < 1e-9 || var < 1e-12, "channel {k} var {var}");
        }
        let mut train_only = data.clone();
        let keep = data.indices(Split::Train);
        train_only.motions = keep.iter().map(|&i| data.motions[i].clone()).collect();
        train_only.split = alloc::vec![Split::Train; keep.len()];
        assert_eq!(preprocess(&train_only).unwrap().normalizer, prep.normalizer);
    }

    #[test]
    fn bad_label_is_reported_with_record() {
        let mut data = small();
        data.motions[3].action_id = 9;
        assert!(matches!(data.validate(), Err(Error::InRecord { record: 3, .. })));
    }

    #[test]
    fn degenerate_frame_is_reported_with_record() {
        let mut data = small();
        let j = data.motions[2].frames[0].joints[1];
        data.motions[2].frames[0].joints[2] = j;
        let err = preprocess(&data).unwrap_err();
        assert!(matches!(err, Error::InRecord { record: 2, .. }), "{err:?}");
    }
}
