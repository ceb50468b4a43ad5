//! Motion records, preprocessing and the procedural motion synthesizer.

pub mod motion;
pub mod normalize;
pub mod prep;
pub mod synth;

pub use motion::{resample, MotionRecord};
pub use normalize::Normalizer;
pub use prep::{preprocess, round_trip_error, split_by_class, Dataset, PreparedDataset, PreparedMotion, Split};
pub use synth::{default_specs, synthesize_dataset, DofWave, Jitter, SyntheticActionSpec};
