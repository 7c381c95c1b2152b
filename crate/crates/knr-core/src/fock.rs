//! Operators and states on the truncated number basis.
//!
//! The mode is described in a frame rotating at the drive frequency, so the
//! only frequencies that appear are the detuning `delta`, the anharmonicity
//! `chi` and the dissipation rate `gamma` (the unit of frequency). The
//! level energies are `E_n = delta*n + chi*n*(n-1)`.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::cmatrix::CMatrix;
use crate::error::Error;
use crate::Result;

/// Physical configuration of the resonator, in units of `gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Kerr anharmonicity.
    pub chi: f64,
    /// Dissipation rate; fixes the unit of time and is normally 1.
    pub gamma: f64,
    /// Drive-resonator detuning `omega_0 - omega`.
    pub delta: f64,
    /// Mean occupation of the reservoir at the mode frequency.
    pub n_th: f64,
    /// Basis truncation; levels `|0>..|dim-1>` are kept.
    pub dim: usize,
}

impl SystemParams {
    pub fn new(chi: f64, delta: f64, n_th: f64, dim: usize) -> Result<Self> {
        let p = Self { chi, gamma: 1.0, delta, n_th, dim };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::InvalidDimension { dim: self.dim, reason: "need at least |0>,|1>" });
        }
        if self.n_th.is_nan() || self.n_th < 0.0 {
            return Err(Error::InvalidParameter {
                name: "n_th",
                value: self.n_th,
                reason: "thermal occupation must be >= 0",
            });
        }
        if self.gamma.is_nan() || self.gamma <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "gamma",
                value: self.gamma,
                reason: "dissipation rate must be > 0",
            });
        }
        if !self.chi.is_finite() || !self.delta.is_finite() {
            return Err(Error::InvalidParameter {
                name: "chi/delta",
                value: self.chi,
                reason: "must be finite",
            });
        }
        Ok(())
    }

    /// Level energy `E_n = delta*n + chi*n*(n-1)` in the rotating frame.
    #[inline]
    pub fn level_energy(&self, n: usize) -> f64 {
        let n = n as f64;
        self.delta * n + self.chi * n * (n - 1.0)
    }

    /// All level energies up to the truncation.
    pub fn level_energies(&self) -> Vec<f64> {
        (0..self.dim).map(|n| self.level_energy(n)).collect()
    }
}

/// An operator on the truncated basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    pub dim: usize,
    pub mat: CMatrix,
}

impl FockOperator {
    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn adjoint(&self) -> Self {
        Self { dim: self.dim, mat: self.mat.adjoint() }
    }
}

/// A state of the mode: Hermitian, unit trace, positive semidefinite
/// within solver tolerances.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub dim: usize,
    pub mat: CMatrix,
}

impl DensityMatrix {
    /// Wrap a matrix after checking the state invariants.
    pub fn from_matrix(mat: CMatrix) -> Result<Self> {
        let defect = mat.hermiticity_defect();
        if defect > 1e-10 {
            return Err(Error::InternalInconsistency { what: "state hermiticity", deviation: defect });
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > 1e-8 || tr.im.abs() > 1e-8 {
            return Err(Error::InternalInconsistency {
                what: "state trace",
                deviation: (tr - C64::ONE).norm(),
            });
        }
        Ok(Self { dim: mat.dim(), mat })
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    /// Diagonal element `<n|rho|n>` without clamping.
    #[inline]
    pub fn population_raw(&self, n: usize) -> f64 {
        self.mat[(n, n)].re
    }

    pub fn hermiticity_defect(&self) -> f64 {
        self.mat.hermiticity_defect()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.mat.min_eigenvalue()
    }
}

/// Annihilation operator: `a|n> = sqrt(n)|n-1>`, so entry `(n-1, n) = sqrt(n)`.
pub fn annihilation(dim: usize) -> Result<FockOperator> {
    if dim < 2 {
        return Err(Error::InvalidDimension { dim, reason: "ladder needs at least two levels" });
    }
    let mut mat = CMatrix::zeros(dim);
    for n in 1..dim {
        mat[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    Ok(FockOperator { dim, mat })
}

/// Creation operator, the adjoint of [`annihilation`].
pub fn creation(dim: usize) -> Result<FockOperator> {
    Ok(annihilation(dim)?.adjoint())
}

/// Number operator `a† a = diag(0, 1, .., dim-1)`.
pub fn number_operator(dim: usize) -> Result<FockOperator> {
    if dim < 2 {
        return Err(Error::InvalidDimension { dim, reason: "ladder needs at least two levels" });
    }
    let diag: Vec<C64> = (0..dim).map(|n| C64::new(n as f64, 0.0)).collect();
    Ok(FockOperator { dim, mat: CMatrix::from_diag(&diag) })
}

/// Rotating-frame Hamiltonian for a given instantaneous drive amplitude
/// (the product of the pump amplitude and the pulse envelope):
///
/// ```text
/// H = delta n + chi n(n-1) + drive a† + conj(drive) a
/// ```
pub fn effective_hamiltonian(p: &SystemParams, drive: C64) -> Result<FockOperator> {
    p.validate()?;
    if !drive.re.is_finite() || !drive.im.is_finite() {
        return Err(Error::InvalidParameter {
            name: "drive",
            value: drive.norm(),
            reason: "drive amplitude must be finite",
        });
    }
    let dim = p.dim;
    let mut mat = CMatrix::zeros(dim);
    for n in 0..dim {
        mat[(n, n)] = C64::new(p.level_energy(n), 0.0);
    }
    for n in 1..dim {
        let ladder = (n as f64).sqrt();
        mat[(n, n - 1)] = drive * ladder;
        mat[(n - 1, n)] = drive.conj() * ladder;
    }
    Ok(FockOperator { dim, mat })
}

/// Gibbs state of the truncated mode: `p_n` proportional to
/// `(n_th/(1+n_th))^n`, renormalized so the trace is exactly 1.
pub fn thermal_state(dim: usize, n_th: f64) -> Result<DensityMatrix> {
    if dim < 2 {
        return Err(Error::InvalidDimension { dim, reason: "need at least |0>,|1>" });
    }
    if n_th.is_nan() || n_th < 0.0 {
        return Err(Error::InvalidParameter {
            name: "n_th",
            value: n_th,
            reason: "thermal occupation must be >= 0",
        });
    }
    let q = n_th / (1.0 + n_th);
    let mut weights = vec![0.0f64; dim];
    weights[0] = 1.0;
    for n in 1..dim {
        weights[n] = weights[n - 1] * q;
    }
    let total: f64 = weights.iter().sum();
    let mut mat = CMatrix::zeros(dim);
    for n in 0..dim {
        mat[(n, n)] = C64::new(weights[n] / total, 0.0);
    }
    // Push normalization rounding into the ground level so the trace is
    // exactly 1, not just 1 up to a few ulp.
    let residual: f64 = 1.0 - mat.diag().map(|z| z.re).sum::<f64>();
    mat[(0, 0)] += C64::new(residual, 0.0);
    Ok(DensityMatrix { dim, mat })
}

/// Projector `|n><n|`.
pub fn fock_state(dim: usize, n: usize) -> Result<DensityMatrix> {
    if dim < 2 {
        return Err(Error::InvalidDimension { dim, reason: "need at least |0>,|1>" });
    }
    if n >= dim {
        return Err(Error::OutOfRange { index: n, dim });
    }
    let mut mat = CMatrix::zeros(dim);
    mat[(n, n)] = C64::ONE;
    Ok(DensityMatrix { dim, mat })
}

/// Coherent state `|alpha><alpha|` with Poissonian populations,
/// renormalized over the truncation.
pub fn coherent_state(dim: usize, alpha: C64) -> Result<DensityMatrix> {
    if dim < 2 {
        return Err(Error::InvalidDimension { dim, reason: "need at least |0>,|1>" });
    }
    let nbar = alpha.norm_sqr();
    if nbar > 0.5 * dim as f64 {
        return Err(Error::InvalidParameter {
            name: "alpha",
            value: alpha.norm(),
            reason: "truncation too small for this coherent amplitude",
        });
    }
    let mut amps = vec![C64::ZERO; dim];
    amps[0] = C64::new((-0.5 * nbar).exp(), 0.0);
    for n in 1..dim {
        amps[n] = amps[n - 1] * alpha / (n as f64).sqrt();
    }
    let mut mat = CMatrix::outer(&amps);
    let tr = mat.trace().re;
    mat.scale(C64::new(1.0 / tr, 0.0));
    Ok(DensityMatrix { dim, mat })
}

/// Bose-Einstein occupation `1/(exp(x) - 1)` for `x = hbar*omega / (k T)`.
pub fn temp_to_nth(hbar_omega_over_kt: f64) -> Result<f64> {
    if hbar_omega_over_kt.is_nan() || hbar_omega_over_kt <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "hbar_omega_over_kt",
            value: hbar_omega_over_kt,
            reason: "frequency/temperature ratio must be > 0",
        });
    }
    Ok(1.0 / hbar_omega_over_kt.exp_m1())
}
