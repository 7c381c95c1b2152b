//! Error type shared by the solver and constructor APIs.

use alloc::string::String;
use core::fmt;

/// Everything that can go wrong while building states or running a solver.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Basis truncation below the minimum usable size.
    InvalidDimension { dim: usize, reason: &'static str },
    /// A physical parameter is outside its allowed range.
    InvalidParameter { name: &'static str, value: f64, reason: &'static str },
    /// A basis index beyond the truncation.
    OutOfRange { index: usize, dim: usize },
    /// Two objects built for different truncation sizes were combined.
    DimensionMismatch { expected: usize, found: usize },
    /// Population reached the top of the truncated basis; results would be
    /// unreliable past this point.
    TruncationOverflow { t: f64, top_population: f64 },
    /// The step-size cap collapsed below the usable floor.
    StepUnderflow { dt: f64 },
    /// An internal cross-check between two ways of computing the same
    /// quantity disagreed; indicates a bug, not bad input.
    InternalInconsistency { what: &'static str, deviation: f64 },
    /// Configuration rejected before any integration started.
    InvalidConfig(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidDimension { dim, reason } => {
                write!(f, "invalid basis dimension {dim}: {reason}")
            }
            Error::InvalidParameter { name, value, reason } => {
                write!(f, "invalid parameter {name} = {value}: {reason}")
            }
            Error::OutOfRange { index, dim } => {
                write!(f, "basis index {index} out of range for dimension {dim}")
            }
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::TruncationOverflow { t, top_population } => write!(
                f,
                "truncation overflow at t = {t}: population {top_population:.3e} in the top \
                 three basis levels (limit 1e-6); increase dim"
            ),
            Error::StepUnderflow { dt } => {
                write!(f, "integrator step collapsed to dt = {dt:.3e} (< 1e-9)")
            }
            Error::InternalInconsistency { what, deviation } => {
                write!(f, "internal consistency check failed for {what}: deviation {deviation:.3e}")
            }
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
