use alloc::boxed::Box;
use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Errors produced by the core library.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Two shapes or lengths that must agree do not.
    Shape {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    /// A matrix that should be a rotation is not orthogonal with det +1.
    NotARotation { orthogonality: f64, det: f64 },
    /// Inverse kinematics met two coincident consecutive joints.
    DegenerateBone { parent: usize, child: usize },
    /// A skeleton definition violates one of its invariants.
    InvalidSkeleton(String),
    /// A value is outside its allowed domain.
    InvalidArgument(String),
    /// A dataset cannot support the requested operation.
    DegenerateDataset(String),
    /// Training produced a non-finite loss.
    Divergence { step: u64, detail: String },
    /// An error raised while processing one record of a dataset.
    InRecord { record: usize, source: Box<Error> },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Shape {
                what,
                expected,
                found,
            } => write!(f, "{what}: expected {expected}, found {found}"),
            Error::NotARotation { orthogonality, det } => write!(
                f,
                "matrix is not a rotation (|RᵀR - I| = {orthogonality:e}, det = {det})"
            ),
            Error::DegenerateBone { parent, child } => write!(
                f,
                "joints {parent} and {child} coincide; bone direction is undefined"
            ),
            Error::InvalidSkeleton(msg) => write!(f, "invalid skeleton: {msg}"),
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::DegenerateDataset(msg) => write!(f, "degenerate dataset: {msg}"),
            Error::Divergence { step, detail } => {
                write!(f, "training diverged at step {step}: {detail}")
            }
            Error::InRecord { record, source } => write!(f, "record {record}: {source}"),
        }
    }
}

impl core::error::Error for Error {
    fn source(&self) -> Option<&(dyn core::error::Error + 'static)> {
        match self {
            Error::InRecord { source, .. } => Some(source.as_ref()),
            _ => None,
        }
    }
}

pub(crate) fn check_len(what: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Shape {
            what,
            expected,
            found,
        })
    }
}
