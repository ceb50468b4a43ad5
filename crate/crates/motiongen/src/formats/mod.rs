//! On-disk formats.

pub mod checkpoint;
pub mod manifest;
pub mod motion;
pub mod report;
pub mod skeleton;
pub mod specs;
pub mod svg;
pub mod text;

pub use checkpoint::{ClassifierCheckpoint, ModelCheckpoint, Provenance};
pub use manifest::{load_dataset, Manifest};
pub use motion::{load_motion, save_motion, MotionBody, MotionFile, MotionHeader};
pub use report::{ReportFile, ReportRecord};
pub use skeleton::{DEFAULT_SKELETON, load_skeleton, parse_skeleton, save_skeleton, skeleton_to_string};
pub use specs::SpecFile;
pub use svg::{panel_frames, render_strip};
