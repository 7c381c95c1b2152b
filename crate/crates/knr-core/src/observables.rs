//! Measured quantities extracted from a state: photon-number populations,
//! mean photon number, the zero-delay second-order correlation
//!
//! ```text
//! g2 = <a† a† a a> / <a† a>^2 = Tr(rho n(n-1)) / Tr(rho n)^2
//! ```
//!
//! and the photon-number variance, tied to `g2` by
//! `<(dn)^2> = <n> + <n>^2 (g2 - 1)`.

use alloc::vec::Vec;
use num_complex::Complex64 as C64;

use crate::error::Error;
use crate::fock::DensityMatrix;
use crate::Result;

/// Below this mean photon number the `g2` ratio is reported as undefined
/// instead of amplifying rounding noise through a near-zero denominator.
pub const G2_UNDEFINED_THRESHOLD: f64 = 1e-6;

/// Classification of the photon-number statistics at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhotonStatistics {
    SubPoissonian,
    Poissonian,
    SuperPoissonian,
}

/// Snapshot of every reported observable at one sample time.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableRecord {
    pub t: f64,
    pub mean_n: f64,
    /// `None` when the mean photon number is below
    /// [`G2_UNDEFINED_THRESHOLD`].
    pub g2: Option<f64>,
    /// `P(0..=k_report)`, clamped to `[0, 1]`.
    pub populations: Vec<f64>,
    pub variance_n: f64,
}

/// Diagonal populations `P(0..=k)`, clamped to `[0, 1]`. The second return
/// value is the largest clamping applied, for solver diagnostics.
pub fn populations_clamped(rho: &DensityMatrix, k: usize) -> (Vec<f64>, f64) {
    let mut clamp = 0.0f64;
    let values = (0..=k.min(rho.dim - 1))
        .map(|n| {
            let p = rho.population_raw(n);
            let clipped = p.clamp(0.0, 1.0);
            clamp = clamp.max((p - clipped).abs());
            clipped
        })
        .collect();
    (values, clamp)
}

/// `P(0..=k)` without the clamp diagnostic.
pub fn populations(rho: &DensityMatrix, k: usize) -> Vec<f64> {
    populations_clamped(rho, k).0
}

/// Mean photon number `Tr(rho n)`.
pub fn mean_photon_number(rho: &DensityMatrix) -> f64 {
    (0..rho.dim).map(|n| n as f64 * rho.population_raw(n)).sum()
}

/// Normal-ordered second moment `<a† a† a a> = Tr(rho n(n-1))`, computed
/// from the diagonal since `a†^2 a^2` is diagonal in the number basis.
pub fn normal_ordered_second_moment(rho: &DensityMatrix) -> f64 {
    (0..rho.dim).map(|n| (n * n.saturating_sub(1)) as f64 * rho.population_raw(n)).sum()
}

/// Photon-number variance `Tr(rho n^2) - Tr(rho n)^2`.
pub fn photon_number_variance(rho: &DensityMatrix) -> f64 {
    let mean = mean_photon_number(rho);
    let second: f64 = (0..rho.dim).map(|n| (n * n) as f64 * rho.population_raw(n)).sum();
    second - mean * mean
}

/// Zero-delay second-order correlation; `None` when the mean photon number
/// is too small for the ratio to be meaningful.
pub fn g2_zero_delay(rho: &DensityMatrix) -> Option<f64> {
    let mean = mean_photon_number(rho);
    if mean < G2_UNDEFINED_THRESHOLD {
        return None;
    }
    Some(normal_ordered_second_moment(rho) / (mean * mean))
}

/// Field expectation `<a> = Tr(rho a)`, the quantity the linear-cavity
/// reference solution predicts at `chi = 0`.
pub fn field_expectation(rho: &DensityMatrix) -> C64 {
    // Tr(rho a) = sum_n sqrt(n) rho[n, n-1].
    let mut acc = C64::ZERO;
    for n in 1..rho.dim {
        acc += num_traits::Float::sqrt(n as f64) * rho.mat[(n, n - 1)];
    }
    acc
}

/// Build the full record for one sample time. Returns the record and the
/// largest population clamp applied.
pub fn record_from_state(t: f64, rho: &DensityMatrix, k_report: usize) -> (ObservableRecord, f64) {
    let (populations, clamp) = populations_clamped(rho, k_report);
    let record = ObservableRecord {
        t,
        mean_n: mean_photon_number(rho),
        g2: g2_zero_delay(rho),
        populations,
        variance_n: photon_number_variance(rho),
    };
    (record, clamp)
}

/// Check the variance identity `<(dn)^2> = <n> + <n>^2 (g2 - 1)` on a
/// record and classify its statistics. A violation beyond `1e-8` means the
/// record was assembled inconsistently and is reported as an error.
pub fn variance_consistency(rec: &ObservableRecord) -> Result<PhotonStatistics> {
    let g2 = rec.g2.ok_or(Error::InvalidParameter {
        name: "g2",
        value: f64::NAN,
        reason: "variance identity needs a defined g2",
    })?;
    let reconstructed = rec.mean_n + rec.mean_n * rec.mean_n * (g2 - 1.0);
    let deviation = (reconstructed - rec.variance_n).abs();
    if deviation > 1e-8 {
        return Err(Error::InternalInconsistency { what: "variance identity", deviation });
    }
    Ok(if (g2 - 1.0).abs() <= 1e-9 {
        PhotonStatistics::Poissonian
    } else if g2 < 1.0 {
        PhotonStatistics::SubPoissonian
    } else {
        PhotonStatistics::SuperPoissonian
    })
}
