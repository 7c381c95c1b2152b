//! Direct integration of the master equation for the driven, damped Kerr
//! mode:
//!
//! ```text
//! drho/dt = -i[H(t), rho] + sum_i ( L_i rho L_i† - 1/2 {L_i† L_i, rho} )
//! ```
//!
//! with `L_1 = sqrt((n_th+1) gamma) a` (emission into the bath) and
//! `L_2 = sqrt(n_th gamma) a†` (absorption from it). The generator is
//! applied elementwise — in the number basis every term couples `(i, j)`
//! only to its diagonal neighbors — so one application costs `O(dim^2)`
//! instead of the `O(dim^3)` of generic matrix products:
//!
//! ```text
//! (a rho a†)[i,j]  = sqrt((i+1)(j+1)) rho[i+1, j+1]
//! (a† rho a)[i,j]  = sqrt(i j)        rho[i-1, j-1]
//! {a†a, rho}[i,j]  = (i + j)          rho[i, j]
//! ```
//!
//! The operators are the *truncated* ladder matrices, so the anticommutator
//! of the absorption channel uses the truncated product `a a†`, whose last
//! diagonal entry is 0 rather than `dim`. With that convention the
//! generator preserves the trace exactly and the truncated thermal state
//! is its exact drive-free fixed point; the discarded flow between the top
//! level and the first level past the truncation is what the adequacy
//! check (top-three-level population below `1e-6`) keeps negligible.
//!
//! Integration is classical fixed-step fourth-order Runge-Kutta on the
//! flattened density matrix. Only the upper triangle is computed; the
//! lower is mirrored, which keeps every iterate exactly Hermitian.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::cmatrix::CMatrix;
use crate::error::Error;
use crate::fock::{DensityMatrix, SystemParams};
use crate::observables::{record_from_state, ObservableRecord};
use crate::pulse::PulseTrain;
use crate::Result;

/// Fraction of the stability-limited step the integrator actually takes.
/// Classical RK4 is stable on the imaginary axis up to `|E dt| = 2.83`,
/// where `E` is the largest level-energy span in the truncated basis;
/// 0.5 leaves a 5-6x margin. Accuracy in the populated sector is governed
/// by `dt_max`, not by this cap.
pub const STEP_SAFETY: f64 = 0.5;

/// Hard floor under which the step cap is treated as a failure.
pub const MIN_STEP: f64 = 1e-9;

/// Population allowed in the top three basis levels before a run aborts.
pub const TRUNCATION_LIMIT: f64 = 1e-6;

/// How many populations `P(0..=k)` solver records carry by default.
pub const DEFAULT_K_REPORT: usize = 5;

/// Time grid and integrator settings for one run.
#[derive(Debug, Clone)]
pub struct EvolutionConfig {
    /// Total integration time; rounded to a whole number of samples.
    pub t_end: f64,
    /// Upper bound on the integrator step.
    pub dt_max: f64,
    /// Spacing of the observable sampling grid.
    pub sample_dt: f64,
    pub initial_state: DensityMatrix,
    /// Highest Fock level reported in the per-sample populations.
    pub k_report: usize,
    /// Keep a copy of the state at every sample time.
    pub store_states: bool,
    /// Diagonalize every sampled state to track the minimum eigenvalue.
    pub check_positivity: bool,
}

impl EvolutionConfig {
    pub fn new(t_end: f64, dt_max: f64, sample_dt: f64, initial_state: DensityMatrix) -> Self {
        Self {
            t_end,
            dt_max,
            sample_dt,
            initial_state,
            k_report: DEFAULT_K_REPORT,
            store_states: false,
            check_positivity: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt_max > 0.0 && self.dt_max <= self.sample_dt && self.sample_dt <= self.t_end) {
            return Err(Error::InvalidConfig(alloc::format!(
                "need 0 < dt_max <= sample_dt <= t_end, got dt_max = {}, sample_dt = {}, t_end = {}",
                self.dt_max,
                self.sample_dt,
                self.t_end
            )));
        }
        let defect = self.initial_state.hermiticity_defect();
        if defect > 1e-10 {
            return Err(Error::InternalInconsistency {
                what: "initial state hermiticity",
                deviation: defect,
            });
        }
        let tr = self.initial_state.trace();
        if (tr - C64::ONE).norm() > 1e-8 {
            return Err(Error::InternalInconsistency {
                what: "initial state trace",
                deviation: (tr - C64::ONE).norm(),
            });
        }
        Ok(())
    }
}

/// Numerical health counters accumulated over a run.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SolverDiagnostics {
    /// Step size actually used.
    pub dt: f64,
    pub steps: u64,
    /// Largest `|tr rho - 1| / sample_dt` seen before renormalization.
    pub max_trace_drift_rate: f64,
    /// Largest deviation from Hermiticity before re-Hermitization.
    pub max_hermiticity_defect: f64,
    /// Largest clamp applied when reading out populations.
    pub max_population_clamp: f64,
    /// Smallest eigenvalue over all sampled states, when tracked.
    pub min_eigenvalue: Option<f64>,
}

/// Result of a master-equation run.
#[derive(Debug, Clone)]
pub struct StateTrajectory {
    /// Strictly increasing sample times, starting at 0.
    pub times: Vec<f64>,
    /// One observable record per sample time.
    pub records: Vec<ObservableRecord>,
    /// Sampled states, present when the run was configured to store them.
    pub states: Vec<DensityMatrix>,
    pub final_state: DensityMatrix,
    pub diagnostics: SolverDiagnostics,
}

/// Precomputed tables for applying the generator: level energies, ladder
/// factors, and the two bath rates.
pub(crate) struct Generator {
    pub dim: usize,
    /// `E_n = delta n + chi n(n-1)`.
    pub(crate) energy: Vec<f64>,
    /// `sqrt(n)` for `n = 0..=dim`.
    pub(crate) sq: Vec<f64>,
    /// Diagonal of the truncated `a a†`: `n+1`, except 0 at the top level.
    pub(crate) up_diag: Vec<f64>,
    /// `gamma (n_th + 1)`.
    pub gamma_down: f64,
    /// `gamma n_th`.
    pub gamma_up: f64,
    omega: C64,
}

impl Generator {
    pub fn new(p: &SystemParams, train: &PulseTrain) -> Result<Self> {
        p.validate()?;
        train.validate()?;
        let dim = p.dim;
        let mut up_diag: Vec<f64> = (0..dim).map(|n| (n + 1) as f64).collect();
        up_diag[dim - 1] = 0.0;
        Ok(Self {
            dim,
            energy: p.level_energies(),
            sq: (0..=dim).map(|n| (n as f64).sqrt()).collect(),
            up_diag,
            gamma_down: p.gamma * (p.n_th + 1.0),
            gamma_up: p.gamma * p.n_th,
            omega: train.omega,
        })
    }

    /// Spread of the level energies, the fastest coherence frequency in
    /// the basis and the quantity that limits the explicit step.
    pub fn energy_span(&self) -> f64 {
        let max = self.energy.iter().cloned().fold(f64::MIN, f64::max);
        let min = self.energy.iter().cloned().fold(f64::MAX, f64::min);
        max - min
    }

    /// Step cap from the stability of explicit RK4 against the fastest
    /// frequencies present: the energy span, the ladder-enhanced drive,
    /// and the total damping rate at the top of the basis.
    pub fn step_cap(&self, train: &PulseTrain) -> f64 {
        let drive = 2.0 * train.omega.norm() * train.envelope_sup() * (self.dim as f64).sqrt();
        let damping = (self.gamma_down + self.gamma_up) * self.dim as f64;
        let rate = (self.energy_span() + drive + damping).max(1e-12);
        STEP_SAFETY / rate
    }

    #[inline]
    pub(crate) fn drive_at(&self, train: &PulseTrain, t: f64) -> C64 {
        self.omega * train.envelope(t)
    }

    /// One application of the generator: `out = d(rho)/dt` at time `t`.
    /// Computes the upper triangle and mirrors it, so the output is
    /// Hermitian by construction (and traceless up to rounding).
    pub fn apply(&self, rho: &[C64], drive: C64, out: &mut [C64]) {
        let d = self.dim;
        debug_assert_eq!(rho.len(), d * d);
        debug_assert_eq!(out.len(), d * d);
        let drive_c = drive.conj();
        let minus_i = C64::new(0.0, -1.0);
        for i in 0..d {
            for j in i..d {
                let idx = i * d + j;
                let r = rho[idx];

                // -i [H, rho]
                let mut comm = C64::new(self.energy[i] - self.energy[j], 0.0) * r;
                if i > 0 {
                    comm += drive * (self.sq[i] * rho[(i - 1) * d + j]);
                }
                if j + 1 < d {
                    comm -= drive * (self.sq[j + 1] * rho[i * d + j + 1]);
                }
                if i + 1 < d {
                    comm += drive_c * (self.sq[i + 1] * rho[(i + 1) * d + j]);
                }
                if j > 0 {
                    comm -= drive_c * (self.sq[j] * rho[i * d + j - 1]);
                }
                let mut acc = minus_i * comm;

                // Emission channel: a rho a† - 1/2 {n, rho}.
                let mut down = -0.5 * (i + j) as f64 * r;
                if i + 1 < d && j + 1 < d {
                    down += self.sq[i + 1] * self.sq[j + 1] * rho[(i + 1) * d + j + 1];
                }
                acc += self.gamma_down * down;

                // Absorption channel: a† rho a - 1/2 {a a†, rho}, with the
                // truncated-product diagonal.
                if self.gamma_up > 0.0 {
                    let mut up = -0.5 * (self.up_diag[i] + self.up_diag[j]) * r;
                    if i > 0 && j > 0 {
                        up += self.sq[i] * self.sq[j] * rho[(i - 1) * d + j - 1];
                    }
                    acc += self.gamma_up * up;
                }

                out[idx] = acc;
                if j != i {
                    out[j * d + i] = acc.conj();
                }
            }
        }
    }

    /// Generator applied at an explicit time, envelope included.
    pub fn apply_at(&self, train: &PulseTrain, rho: &[C64], t: f64, out: &mut [C64]) {
        self.apply(rho, self.drive_at(train, t), out);
    }
}

/// Right-hand side of the master equation at time `t` for an arbitrary
/// state: `-i[H(t), rho] + dissipators`. The returned matrix is Hermitian
/// by construction and traceless up to rounding.
pub fn liouvillian_apply(
    rho: &DensityMatrix,
    t: f64,
    p: &SystemParams,
    train: &PulseTrain,
) -> Result<CMatrix> {
    if rho.dim != p.dim {
        return Err(Error::DimensionMismatch { expected: p.dim, found: rho.dim });
    }
    let gen = Generator::new(p, train)?;
    let mut out = CMatrix::zeros(p.dim);
    gen.apply_at(train, rho.mat.as_slice(), t, out.as_mut_slice());
    Ok(out)
}

struct Rk4Workspace {
    k1: Vec<C64>,
    k2: Vec<C64>,
    k3: Vec<C64>,
    k4: Vec<C64>,
    tmp: Vec<C64>,
}

impl Rk4Workspace {
    fn new(len: usize) -> Self {
        Self {
            k1: vec![C64::ZERO; len],
            k2: vec![C64::ZERO; len],
            k3: vec![C64::ZERO; len],
            k4: vec![C64::ZERO; len],
            tmp: vec![C64::ZERO; len],
        }
    }
}

#[inline]
fn axpy(out: &mut [C64], base: &[C64], factor: f64, delta: &[C64]) {
    for ((o, &b), &d) in out.iter_mut().zip(base.iter()).zip(delta.iter()) {
        *o = b + factor * d;
    }
}

#[allow(clippy::needless_range_loop)]
fn rk4_step(
    gen: &Generator,
    train: &PulseTrain,
    state: &mut [C64],
    t: f64,
    h: f64,
    ws: &mut Rk4Workspace,
) {
    gen.apply_at(train, state, t, &mut ws.k1);
    axpy(&mut ws.tmp, state, 0.5 * h, &ws.k1);
    gen.apply_at(train, &ws.tmp, t + 0.5 * h, &mut ws.k2);
    axpy(&mut ws.tmp, state, 0.5 * h, &ws.k2);
    gen.apply_at(train, &ws.tmp, t + 0.5 * h, &mut ws.k3);
    axpy(&mut ws.tmp, state, h, &ws.k3);
    gen.apply_at(train, &ws.tmp, t + h, &mut ws.k4);
    let w = h / 6.0;
    for i in 0..state.len() {
        state[i] += w * (ws.k1[i] + 2.0 * (ws.k2[i] + ws.k3[i]) + ws.k4[i]);
    }
}

/// The shared sampling grid: `n` intervals of width `sample_dt`.
pub(crate) fn sample_grid(cfg: &EvolutionConfig) -> (usize, Vec<f64>) {
    let n = (cfg.t_end / cfg.sample_dt).round().max(1.0) as usize;
    let times = (0..=n).map(|k| k as f64 * cfg.sample_dt).collect();
    (n, times)
}

pub(crate) fn effective_step(cfg: &EvolutionConfig, cap: f64) -> Result<(f64, usize)> {
    let dt = cfg.dt_max.min(cap);
    if dt < MIN_STEP {
        return Err(Error::StepUnderflow { dt });
    }
    let n_sub = (cfg.sample_dt / dt).ceil().max(1.0) as usize;
    Ok((cfg.sample_dt / n_sub as f64, n_sub))
}

fn top_three_population(rho: &[C64], dim: usize) -> f64 {
    (dim.saturating_sub(3)..dim).map(|n| rho[n * dim + n].re.abs()).sum()
}

/// Integrate the master equation over the configured grid.
///
/// After every sample interval the state is renormalized to unit trace and
/// re-Hermitized, and the run aborts if the top three basis levels
/// accumulate more than [`TRUNCATION_LIMIT`] population.
pub fn evolve(cfg: &EvolutionConfig, p: &SystemParams, train: &PulseTrain) -> Result<StateTrajectory> {
    cfg.validate()?;
    if cfg.initial_state.dim != p.dim {
        return Err(Error::DimensionMismatch { expected: p.dim, found: cfg.initial_state.dim });
    }
    let gen = Generator::new(p, train)?;
    let (dt, n_sub) = effective_step(cfg, gen.step_cap(train))?;
    let (n_samples, times) = sample_grid(cfg);

    let dim = p.dim;
    let mut state: Vec<C64> = cfg.initial_state.mat.as_slice().to_vec();
    let mut ws = Rk4Workspace::new(dim * dim);
    let mut scratch = DensityMatrix { dim, mat: CMatrix::zeros(dim) };

    let mut diagnostics = SolverDiagnostics { dt, ..Default::default() };
    let mut records = Vec::with_capacity(n_samples + 1);
    let mut states = Vec::new();

    let mut sample =
        |state: &[C64], t: f64, diagnostics: &mut SolverDiagnostics, records: &mut Vec<ObservableRecord>, states: &mut Vec<DensityMatrix>| -> Result<()> {
            let top = top_three_population(state, dim);
            if top > TRUNCATION_LIMIT {
                return Err(Error::TruncationOverflow { t, top_population: top });
            }
            scratch.mat.as_mut_slice().copy_from_slice(state);
            let (record, clamp) = record_from_state(t, &scratch, cfg.k_report);
            diagnostics.max_population_clamp = diagnostics.max_population_clamp.max(clamp);
            if cfg.check_positivity {
                let low = scratch.mat.min_eigenvalue();
                diagnostics.min_eigenvalue =
                    Some(diagnostics.min_eigenvalue.map_or(low, |m: f64| m.min(low)));
            }
            if cfg.store_states {
                states.push(scratch.clone());
            }
            records.push(record);
            Ok(())
        };

    sample(&state, 0.0, &mut diagnostics, &mut records, &mut states)?;

    for k in 0..n_samples {
        let t_start = times[k];
        for s in 0..n_sub {
            rk4_step(&gen, train, &mut state, t_start + s as f64 * dt, dt, &mut ws);
        }
        diagnostics.steps += n_sub as u64;

        // Renormalize and re-Hermitize once per sample, keeping the drift
        // observable as a diagnostic.
        let trace: f64 = (0..dim).map(|n| state[n * dim + n].re).sum();
        let drift = (trace - 1.0).abs() / cfg.sample_dt;
        diagnostics.max_trace_drift_rate = diagnostics.max_trace_drift_rate.max(drift);
        let inv = 1.0 / trace;
        for z in state.iter_mut() {
            *z *= inv;
        }
        let mut defect = 0.0f64;
        for i in 0..dim {
            for j in (i + 1)..dim {
                let upper = state[i * dim + j];
                let lower = state[j * dim + i];
                defect = defect.max((upper - lower.conj()).norm());
                let avg = 0.5 * (upper + lower.conj());
                state[i * dim + j] = avg;
                state[j * dim + i] = avg.conj();
            }
            defect = defect.max(state[i * dim + i].im.abs());
            state[i * dim + i] = C64::new(state[i * dim + i].re, 0.0);
        }
        diagnostics.max_hermiticity_defect = diagnostics.max_hermiticity_defect.max(defect);

        sample(&state, times[k + 1], &mut diagnostics, &mut records, &mut states)?;
    }

    scratch.mat.as_mut_slice().copy_from_slice(&state);
    Ok(StateTrajectory { times, records, states, final_state: scratch, diagnostics })
}
