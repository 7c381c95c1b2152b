//! Stochastic unraveling of the master equation as an ensemble of pure
//! quantum trajectories.
//!
//! Each trajectory evolves a state vector under the non-Hermitian
//! generator `H(t) - (i/2) sum_i L_i† L_i`, letting the norm decay. A
//! uniform variate `r` is drawn up front; when `|psi|^2` falls to `r` a
//! quantum jump fires, with the channel (photon emitted into the bath vs
//! absorbed from it) chosen proportionally to `|L_i psi|^2`. Averaging
//! observables over many trajectories reproduces the density-matrix
//! solution of [`crate::lindblad::evolve`].
//!
//! Reproducibility: trajectory `i` reads its randomness from stream `i`
//! of a counter-based generator keyed by the root seed, so its result
//! never depends on which other trajectories ran or in what order.
//! Ensembles are reduced in fixed batches of [`TRAJECTORY_BATCH`]
//! consecutive indices; batch partials are merged in index order, so any
//! parallel schedule reproduces the sequential result bit for bit.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cmatrix::CMatrix;
use crate::error::Error;
use crate::fock::SystemParams;
use crate::lindblad::{effective_step, sample_grid, EvolutionConfig, Generator, TRUNCATION_LIMIT};
use crate::observables::G2_UNDEFINED_THRESHOLD;
use crate::pulse::PulseTrain;
use crate::Result;

/// Number of consecutive trajectory indices accumulated into one partial
/// sum. The reduction order over batches is fixed, which is what makes
/// parallel ensembles bitwise reproducible.
pub const TRAJECTORY_BATCH: u64 = 32;

/// Settings for a trajectory ensemble; the integration grid and initial
/// state are shared with the master-equation path.
#[derive(Debug, Clone)]
pub struct TrajectoryConfig {
    pub n_traj: u64,
    /// Root seed; trajectory `i` uses stream `i` derived from it.
    pub seed: u64,
    pub evolution: EvolutionConfig,
}

impl TrajectoryConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_traj == 0 {
            return Err(Error::InvalidConfig(alloc::string::String::from("n_traj must be >= 1")));
        }
        self.evolution.validate()
    }
}

/// Which bath process fired at a jump.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JumpChannel {
    /// `L_1 = sqrt((n_th+1) gamma) a`.
    Emission,
    /// `L_2 = sqrt(n_th gamma) a†`.
    Absorption,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpEvent {
    pub t: f64,
    pub channel: JumpChannel,
}

/// Per-sample observables of a single trajectory, plus its jump log.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    /// `<n>` at each sample time.
    pub mean_n: Vec<f64>,
    /// `<n(n-1)>` at each sample time.
    pub second_moment: Vec<f64>,
    /// `P(0..=k_report)` per sample, flattened bin-major.
    pub populations: Vec<f64>,
    pub jumps: Vec<JumpEvent>,
}

/// Everything shared between the trajectories of one ensemble: generator
/// tables, the sampled initial-state eigendecomposition, and the grid.
pub struct TrajectoryPlan {
    gen: Generator,
    train: PulseTrain,
    /// Eigenvalues (clamped to be nonnegative, renormalized) and
    /// eigenvectors of the initial density matrix.
    init_probs: Vec<f64>,
    init_vectors: CMatrix,
    times: Vec<f64>,
    n_samples: usize,
    dt: f64,
    n_sub: usize,
    k_report: usize,
    seed: u64,
}

impl TrajectoryPlan {
    pub fn new(cfg: &TrajectoryConfig, p: &SystemParams, train: &PulseTrain) -> Result<Self> {
        cfg.validate()?;
        if cfg.evolution.initial_state.dim != p.dim {
            return Err(Error::DimensionMismatch {
                expected: p.dim,
                found: cfg.evolution.initial_state.dim,
            });
        }
        let gen = Generator::new(p, train)?;
        let (dt, n_sub) = effective_step(&cfg.evolution, gen.step_cap(train))?;
        let (n_samples, times) = sample_grid(&cfg.evolution);

        let (mut probs, vectors) = cfg.evolution.initial_state.mat.eigh();
        for p in probs.iter_mut() {
            *p = p.max(0.0);
        }
        let total: f64 = probs.iter().sum();
        for p in probs.iter_mut() {
            *p /= total;
        }

        Ok(Self {
            gen,
            train: *train,
            init_probs: probs,
            init_vectors: vectors,
            times,
            n_samples,
            dt,
            n_sub,
            k_report: cfg.evolution.k_report,
            seed: cfg.seed,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn k_report(&self) -> usize {
        self.k_report
    }

    /// Deterministic function of `(root seed, index)`: run one trajectory.
    pub fn run(&self, index: u64) -> Result<TrajectoryRecord> {
        let dim = self.gen.dim;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);

        // Draw the initial pure state from the eigendecomposition of the
        // initial density matrix.
        let mut psi = vec![C64::ZERO; dim];
        {
            let u: f64 = rng.random();
            let mut cum = 0.0;
            let mut pick = self.init_probs.len() - 1;
            for (k, &w) in self.init_probs.iter().enumerate() {
                cum += w;
                if u < cum {
                    pick = k;
                    break;
                }
            }
            for (n, amp) in psi.iter_mut().enumerate() {
                *amp = self.init_vectors[(n, pick)];
            }
        }

        let mut record = TrajectoryRecord {
            mean_n: Vec::with_capacity(self.n_samples + 1),
            second_moment: Vec::with_capacity(self.n_samples + 1),
            populations: Vec::with_capacity((self.n_samples + 1) * (self.k_report + 1)),
            jumps: Vec::new(),
        };

        let mut ws = VectorRk4 {
            k1: vec![C64::ZERO; dim],
            k2: vec![C64::ZERO; dim],
            k3: vec![C64::ZERO; dim],
            k4: vec![C64::ZERO; dim],
            tmp: vec![C64::ZERO; dim],
        };

        let mut threshold: f64 = rng.random();
        self.sample_into(&psi, 0.0, &mut record)?;

        for k in 0..self.n_samples {
            let t_start = self.times[k];
            for s in 0..self.n_sub {
                let t = t_start + s as f64 * self.dt;
                rk4_vector_step(&self.gen, &self.train, &mut psi, t, self.dt, &mut ws);
                let norm_sq: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
                if norm_sq <= threshold {
                    self.jump(&mut psi, t + self.dt, &mut rng, &mut record.jumps);
                    threshold = rng.random();
                }
            }
            self.sample_into(&psi, self.times[k + 1], &mut record)?;
        }

        Ok(record)
    }

    /// Fire one jump: pick the channel with probability proportional to
    /// `|L_i psi|^2`, apply the ladder operator, renormalize.
    fn jump(&self, psi: &mut [C64], t: f64, rng: &mut ChaCha8Rng, jumps: &mut Vec<JumpEvent>) {
        let dim = self.gen.dim;
        let mut weight_down = 0.0;
        let mut weight_up = 0.0;
        for (n, amp) in psi.iter().enumerate() {
            let occ = amp.norm_sqr();
            weight_down += n as f64 * occ;
            weight_up += self.gen.up_diag[n] * occ;
        }
        weight_down *= self.gen.gamma_down;
        weight_up *= self.gen.gamma_up;
        let total = weight_down + weight_up;
        if total <= 0.0 {
            // Dark state; nothing can jump.
            return;
        }
        let u: f64 = rng.random();
        let channel = if u * total < weight_down { JumpChannel::Emission } else { JumpChannel::Absorption };
        match channel {
            JumpChannel::Emission => {
                for n in 0..dim - 1 {
                    psi[n] = self.gen.sq[n + 1] * psi[n + 1];
                }
                psi[dim - 1] = C64::ZERO;
            }
            JumpChannel::Absorption => {
                for n in (1..dim).rev() {
                    psi[n] = self.gen.sq[n] * psi[n - 1];
                }
                psi[0] = C64::ZERO;
            }
        }
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let inv = 1.0 / norm;
        for z in psi.iter_mut() {
            *z *= inv;
        }
        jumps.push(JumpEvent { t, channel });
    }

    fn sample_into(&self, psi: &[C64], t: f64, record: &mut TrajectoryRecord) -> Result<()> {
        let dim = self.gen.dim;
        let norm_sq: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        let inv = 1.0 / norm_sq;
        let mut mean = 0.0;
        let mut second = 0.0;
        let mut top = 0.0;
        for (n, amp) in psi.iter().enumerate() {
            let occ = amp.norm_sqr() * inv;
            mean += n as f64 * occ;
            second += (n * n.saturating_sub(1)) as f64 * occ;
            if n + 3 >= dim {
                top += occ;
            }
        }
        if top > TRUNCATION_LIMIT {
            return Err(Error::TruncationOverflow { t, top_population: top });
        }
        record.mean_n.push(mean);
        record.second_moment.push(second);
        for n in 0..=self.k_report {
            let occ = psi.get(n).map_or(0.0, |amp| amp.norm_sqr() * inv);
            record.populations.push(occ.clamp(0.0, 1.0));
        }
        Ok(())
    }
}

struct VectorRk4 {
    k1: Vec<C64>,
    k2: Vec<C64>,
    k3: Vec<C64>,
    k4: Vec<C64>,
    tmp: Vec<C64>,
}

/// `dpsi/dt = -i H(t) psi - 1/2 (gamma_down n + gamma_up m) psi`, the
/// deterministic drift between jumps.
pub(crate) fn non_hermitian_rhs(
    gen: &Generator,
    drive: C64,
    psi: &[C64],
    out: &mut [C64],
) {
    let dim = gen.dim;
    let minus_i = C64::new(0.0, -1.0);
    let drive_c = drive.conj();
    for (n, slot) in out.iter_mut().enumerate() {
        let decay = 0.5 * (gen.gamma_down * n as f64 + gen.gamma_up * gen.up_diag[n]);
        let mut h_psi = C64::new(gen.energy[n], 0.0) * psi[n];
        if n > 0 {
            h_psi += drive * (gen.sq[n] * psi[n - 1]);
        }
        if n + 1 < dim {
            h_psi += drive_c * (gen.sq[n + 1] * psi[n + 1]);
        }
        *slot = minus_i * h_psi - decay * psi[n];
    }
}

#[allow(clippy::needless_range_loop)]
fn rk4_vector_step(
    gen: &Generator,
    train: &PulseTrain,
    psi: &mut [C64],
    t: f64,
    h: f64,
    ws: &mut VectorRk4,
) {
    let half = 0.5 * h;
    non_hermitian_rhs(gen, gen.drive_at(train, t), psi, &mut ws.k1);
    for i in 0..psi.len() {
        ws.tmp[i] = psi[i] + half * ws.k1[i];
    }
    let drive_mid = gen.drive_at(train, t + half);
    non_hermitian_rhs(gen, drive_mid, &ws.tmp, &mut ws.k2);
    for i in 0..psi.len() {
        ws.tmp[i] = psi[i] + half * ws.k2[i];
    }
    non_hermitian_rhs(gen, drive_mid, &ws.tmp, &mut ws.k3);
    for i in 0..psi.len() {
        ws.tmp[i] = psi[i] + h * ws.k3[i];
    }
    non_hermitian_rhs(gen, gen.drive_at(train, t + h), &ws.tmp, &mut ws.k4);
    let w = h / 6.0;
    for i in 0..psi.len() {
        psi[i] += w * (ws.k1[i] + 2.0 * (ws.k2[i] + ws.k3[i]) + ws.k4[i]);
    }
}

/// Order-insensitive running sums of trajectory observables and their
/// squares, one slot per (sample bin, quantity).
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleAccumulator {
    pub count: u64,
    k_report: usize,
    sum_n: Vec<f64>,
    sum_n_sq: Vec<f64>,
    sum_m: Vec<f64>,
    sum_m_sq: Vec<f64>,
    sum_nm: Vec<f64>,
    sum_p: Vec<f64>,
    sum_p_sq: Vec<f64>,
}

impl EnsembleAccumulator {
    pub fn new(n_bins: usize, k_report: usize) -> Self {
        Self {
            count: 0,
            k_report,
            sum_n: vec![0.0; n_bins],
            sum_n_sq: vec![0.0; n_bins],
            sum_m: vec![0.0; n_bins],
            sum_m_sq: vec![0.0; n_bins],
            sum_nm: vec![0.0; n_bins],
            sum_p: vec![0.0; n_bins * (k_report + 1)],
            sum_p_sq: vec![0.0; n_bins * (k_report + 1)],
        }
    }

    pub fn add(&mut self, record: &TrajectoryRecord) {
        self.count += 1;
        for (b, (&x, &y)) in record.mean_n.iter().zip(record.second_moment.iter()).enumerate() {
            self.sum_n[b] += x;
            self.sum_n_sq[b] += x * x;
            self.sum_m[b] += y;
            self.sum_m_sq[b] += y * y;
            self.sum_nm[b] += x * y;
        }
        for (slot, &p) in record.populations.iter().enumerate() {
            self.sum_p[slot] += p;
            self.sum_p_sq[slot] += p * p;
        }
    }

    /// Pairwise sum of two partials. Addition of partial sums is
    /// commutative bit for bit; schedule independence of full ensembles
    /// comes from the fixed batch boundaries.
    pub fn merge(mut self, other: &Self) -> Self {
        assert_eq!(self.sum_n.len(), other.sum_n.len(), "accumulator grids differ");
        self.count += other.count;
        for (a, b) in self.sum_n.iter_mut().zip(&other.sum_n) {
            *a += b;
        }
        for (a, b) in self.sum_n_sq.iter_mut().zip(&other.sum_n_sq) {
            *a += b;
        }
        for (a, b) in self.sum_m.iter_mut().zip(&other.sum_m) {
            *a += b;
        }
        for (a, b) in self.sum_m_sq.iter_mut().zip(&other.sum_m_sq) {
            *a += b;
        }
        for (a, b) in self.sum_nm.iter_mut().zip(&other.sum_nm) {
            *a += b;
        }
        for (a, b) in self.sum_p.iter_mut().zip(&other.sum_p) {
            *a += b;
        }
        for (a, b) in self.sum_p_sq.iter_mut().zip(&other.sum_p_sq) {
            *a += b;
        }
        self
    }

    /// Bin-wise means and standard errors. With a single trajectory the
    /// standard errors are reported as zero.
    pub fn finalize(&self, times: Vec<f64>) -> EnsembleSeries {
        let n = self.count as f64;
        let bins = self.sum_n.len();
        let mut series = EnsembleSeries {
            times,
            n_traj: self.count,
            k_report: self.k_report,
            mean_n: Vec::with_capacity(bins),
            sem_n: Vec::with_capacity(bins),
            g2: Vec::with_capacity(bins),
            sem_g2: Vec::with_capacity(bins),
            variance_n: Vec::with_capacity(bins),
            populations: Vec::with_capacity(bins),
            sem_populations: Vec::with_capacity(bins),
        };
        let sample_var = |sum: f64, sum_sq: f64| -> f64 {
            if self.count < 2 {
                return 0.0;
            }
            let mean = sum / n;
            ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
        };
        for b in 0..bins {
            let x = self.sum_n[b] / n;
            let y = self.sum_m[b] / n;
            let vx = sample_var(self.sum_n[b], self.sum_n_sq[b]);
            let vy = sample_var(self.sum_m[b], self.sum_m_sq[b]);
            series.mean_n.push(x);
            series.sem_n.push((vx / n).sqrt());
            // Ensemble <n^2> = <n(n-1)> + <n>.
            series.variance_n.push(y + x - x * x);
            if x >= G2_UNDEFINED_THRESHOLD {
                let g2 = y / (x * x);
                series.g2.push(Some(g2));
                if self.count >= 2 {
                    let cxy = (self.sum_nm[b] - n * x * y) / (n - 1.0);
                    let x2 = x * x;
                    let var_g2 = (vy / (x2 * x2) - 4.0 * y * cxy / (x2 * x2 * x)
                        + 4.0 * y * y * vx / (x2 * x2 * x2))
                        / n;
                    series.sem_g2.push(Some(var_g2.max(0.0).sqrt()));
                } else {
                    series.sem_g2.push(Some(0.0));
                }
            } else {
                series.g2.push(None);
                series.sem_g2.push(None);
            }
            let k = self.k_report + 1;
            let mut pops = Vec::with_capacity(k);
            let mut sems = Vec::with_capacity(k);
            for j in 0..k {
                let slot = b * k + j;
                pops.push(self.sum_p[slot] / n);
                sems.push((sample_var(self.sum_p[slot], self.sum_p_sq[slot]) / n).sqrt());
            }
            series.populations.push(pops);
            series.sem_populations.push(sems);
        }
        series
    }
}

/// Ensemble means with standard errors on the shared sample grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSeries {
    pub times: Vec<f64>,
    pub n_traj: u64,
    pub k_report: usize,
    pub mean_n: Vec<f64>,
    pub sem_n: Vec<f64>,
    pub g2: Vec<Option<f64>>,
    pub sem_g2: Vec<Option<f64>>,
    pub variance_n: Vec<f64>,
    /// `P(0..=k_report)` per bin.
    pub populations: Vec<Vec<f64>>,
    pub sem_populations: Vec<Vec<f64>>,
}

/// Run one trajectory standalone. Equivalent to building a
/// [`TrajectoryPlan`] and calling [`TrajectoryPlan::run`] with the same
/// index.
pub fn run_trajectory(
    cfg: &TrajectoryConfig,
    index: u64,
    p: &SystemParams,
    train: &PulseTrain,
) -> Result<TrajectoryRecord> {
    TrajectoryPlan::new(cfg, p, train)?.run(index)
}

/// Sequential reference ensemble: batches of [`TRAJECTORY_BATCH`]
/// consecutive trajectories, merged in batch order. A parallel driver
/// that preserves the same batch boundaries and merge order reproduces
/// this bit for bit.
pub fn ensemble_average(
    cfg: &TrajectoryConfig,
    p: &SystemParams,
    train: &PulseTrain,
) -> Result<EnsembleSeries> {
    let plan = TrajectoryPlan::new(cfg, p, train)?;
    let n_bins = plan.times.len();
    let mut total = EnsembleAccumulator::new(n_bins, plan.k_report);
    let mut start = 0u64;
    while start < cfg.n_traj {
        let end = (start + TRAJECTORY_BATCH).min(cfg.n_traj);
        let mut batch = EnsembleAccumulator::new(n_bins, plan.k_report);
        for index in start..end {
            batch.add(&plan.run(index)?);
        }
        total = total.merge(&batch);
        start = end;
    }
    Ok(total.finalize(plan.times.clone()))
}
