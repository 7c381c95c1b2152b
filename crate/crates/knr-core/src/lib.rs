//! Core dynamics of a lossy Kerr nonlinear resonator driven by a train of
//! Gaussian pulses and coupled to a finite-temperature reservoir.
//!
//! Everything works on a truncated number basis `|0>..|dim-1>` with dense
//! complex matrices. Rates and frequencies are dimensionless, expressed in
//! units of the dissipation rate `gamma`; times are in units of `1/gamma`.
//!
//! Two solver paths are provided for the same master equation:
//! the direct density-matrix integrator in [`lindblad`] and the stochastic
//! pure-state unraveling in [`trajectory`]. [`analytic`] carries closed-form
//! reference solutions used to certify both.
//!
//! The crate is `no_std` (with `alloc`) so the solvers can be embedded
//! anywhere; IO, configuration and parallel ensemble drivers live in the
//! companion CLI crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod analytic;
pub mod cmatrix;
pub mod error;
pub mod fock;
pub mod lindblad;
pub mod observables;
pub mod pulse;
pub mod trajectory;

pub use cmatrix::CMatrix;
pub use error::Error;
pub use fock::{DensityMatrix, FockOperator, SystemParams};
pub use lindblad::{EvolutionConfig, StateTrajectory};
pub use observables::ObservableRecord;
pub use pulse::PulseTrain;
pub use trajectory::{EnsembleAccumulator, EnsembleSeries, TrajectoryConfig};

/// Crate-wide result type.
pub type Result<T> = core::result::Result<T, Error>;
