//! Execution of a scenario: resolve sweeps, hand each point to the chosen
//! solver path(s), and collect uniform time-series tables.
//!
//! Trajectory ensembles run in parallel over fixed batches of consecutive
//! indices ([`knr_core::trajectory::TRAJECTORY_BATCH`]); the batch
//! partials are merged in index order afterwards, so the result is byte
//! for byte the same as the sequential reference no matter how many
//! workers rayon uses.

use knr_core::fock::{fock_state, thermal_state, SystemParams};
use knr_core::lindblad::{evolve, EvolutionConfig, SolverDiagnostics, StateTrajectory};
use knr_core::pulse::{validate_selectivity, PulseTrain, SelectivityReport};
use knr_core::trajectory::{
    EnsembleAccumulator, EnsembleSeries, TrajectoryConfig, TrajectoryPlan, TRAJECTORY_BATCH,
};
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::CliError;
use crate::scenario::{InitialState, ScenarioConfig, SolverChoice};

/// Reported populations P0..P5 in series tables.
pub const K_REPORT: usize = 5;

/// Command-line overrides applied on top of a scenario file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub solver: Option<SolverChoice>,
    pub seed: Option<u64>,
    pub n_traj: Option<u64>,
    pub dim: Option<usize>,
    pub check_positivity: bool,
}

/// One row of the uniform output table.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesRow {
    pub t: f64,
    pub mean_n: f64,
    pub g2: Option<f64>,
    pub populations: [f64; K_REPORT + 1],
    pub variance_n: f64,
    pub envelope: f64,
}

/// Which solver produced a table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    MasterEquation,
    Trajectories,
}

impl SolverKind {
    pub fn tag(self) -> &'static str {
        match self {
            SolverKind::MasterEquation => "me",
            SolverKind::Trajectories => "traj",
        }
    }
}

/// Everything produced for one (scenario point, solver) pair.
pub struct RunProduct {
    /// Concrete scenario (sweep value substituted).
    pub scenario: ScenarioConfig,
    /// `None` for plain runs, `Some((path, value))` for sweep points.
    pub sweep_point: Option<(String, f64)>,
    pub solver: SolverKind,
    pub rows: Vec<SeriesRow>,
    pub selectivity: SelectivityReport,
    pub pulse_count: u64,
    pub master: Option<StateTrajectory>,
    pub ensemble: Option<EnsembleSeries>,
    pub diagnostics: Option<SolverDiagnostics>,
    pub wall_seconds: f64,
}

/// Physical objects resolved from one concrete scenario point.
pub struct ResolvedPoint {
    pub params: SystemParams,
    pub train: PulseTrain,
    pub evolution: EvolutionConfig,
}

pub fn resolve_point(s: &ScenarioConfig) -> Result<ResolvedPoint, CliError> {
    let params = SystemParams::new(s.system.chi, s.system.delta, s.system.n_th, s.system.dim)?;
    let train = PulseTrain::new(
        C64::new(s.pulse.omega, s.pulse.omega_im),
        s.pulse.width,
        s.pulse.period,
        s.pulse.t0,
        Some(s.effective_pulse_count()),
    )?;
    let initial = match s.evolution.initial {
        InitialState::Thermal => thermal_state(s.system.dim, s.system.n_th)?,
        InitialState::Vacuum => fock_state(s.system.dim, 0)?,
    };
    let mut evolution =
        EvolutionConfig::new(s.evolution.t_end, s.evolution.dt_max, s.evolution.sample_dt, initial);
    evolution.k_report = K_REPORT;
    Ok(ResolvedPoint { params, train, evolution })
}

/// Parallel ensemble with the fixed-batch reduction. Returns bitwise the
/// same series as [`knr_core::trajectory::ensemble_average`].
pub fn parallel_ensemble(
    cfg: &TrajectoryConfig,
    p: &SystemParams,
    train: &PulseTrain,
) -> Result<EnsembleSeries, CliError> {
    let plan = TrajectoryPlan::new(cfg, p, train)?;
    let n_bins = plan.times().len();
    let n_batches = cfg.n_traj.div_ceil(TRAJECTORY_BATCH);
    let partials: Result<Vec<EnsembleAccumulator>, knr_core::Error> = (0..n_batches)
        .into_par_iter()
        .map(|b| {
            let start = b * TRAJECTORY_BATCH;
            let end = (start + TRAJECTORY_BATCH).min(cfg.n_traj);
            let mut acc = EnsembleAccumulator::new(n_bins, plan.k_report());
            for index in start..end {
                acc.add(&plan.run(index)?);
            }
            Ok(acc)
        })
        .collect();
    let partials = partials?;
    let mut total = EnsembleAccumulator::new(n_bins, plan.k_report());
    for partial in &partials {
        total = total.merge(partial);
    }
    Ok(total.finalize(plan.times().to_vec()))
}

fn rows_from_master(out: &StateTrajectory, train: &PulseTrain) -> Vec<SeriesRow> {
    out.times
        .iter()
        .zip(out.records.iter())
        .map(|(&t, rec)| {
            let mut populations = [0.0; K_REPORT + 1];
            for (slot, &p) in populations.iter_mut().zip(rec.populations.iter()) {
                *slot = p;
            }
            SeriesRow {
                t,
                mean_n: rec.mean_n,
                g2: rec.g2,
                populations,
                variance_n: rec.variance_n,
                envelope: train.envelope(t),
            }
        })
        .collect()
}

fn rows_from_ensemble(series: &EnsembleSeries, train: &PulseTrain) -> Vec<SeriesRow> {
    (0..series.times.len())
        .map(|b| {
            let mut populations = [0.0; K_REPORT + 1];
            for (slot, &p) in populations.iter_mut().zip(series.populations[b].iter()) {
                *slot = p;
            }
            SeriesRow {
                t: series.times[b],
                mean_n: series.mean_n[b],
                g2: series.g2[b],
                populations,
                variance_n: series.variance_n[b],
                envelope: train.envelope(series.times[b]),
            }
        })
        .collect()
}

fn run_point(
    scenario: &ScenarioConfig,
    sweep_point: Option<(String, f64)>,
    overrides: &Overrides,
) -> Result<Vec<RunProduct>, CliError> {
    let mut scenario = scenario.clone();
    if let Some(dim) = overrides.dim {
        scenario.system.dim = dim;
    }
    if let Some(seed) = overrides.seed {
        scenario.run.seed = seed;
    }
    if let Some(n_traj) = overrides.n_traj {
        scenario.run.n_traj = n_traj;
    }
    let solver = overrides.solver.unwrap_or(scenario.run.solver);
    scenario.run.solver = solver;
    scenario.validate()?;

    let resolved = resolve_point(&scenario)?;
    let selectivity = validate_selectivity(&resolved.train, &resolved.params);
    let pulse_count = scenario.effective_pulse_count();
    let mut products = Vec::new();

    if matches!(solver, SolverChoice::MasterEquation | SolverChoice::Both) {
        let mut evolution = resolved.evolution.clone();
        evolution.check_positivity = overrides.check_positivity;
        let started = std::time::Instant::now();
        let out = evolve(&evolution, &resolved.params, &resolved.train)?;
        let wall_seconds = started.elapsed().as_secs_f64();
        products.push(RunProduct {
            scenario: scenario.clone(),
            sweep_point: sweep_point.clone(),
            solver: SolverKind::MasterEquation,
            rows: rows_from_master(&out, &resolved.train),
            selectivity,
            pulse_count,
            diagnostics: Some(out.diagnostics),
            master: Some(out),
            ensemble: None,
            wall_seconds,
        });
    }
    if matches!(solver, SolverChoice::Trajectories | SolverChoice::Both) {
        let cfg = TrajectoryConfig {
            n_traj: scenario.run.n_traj,
            seed: scenario.run.seed,
            evolution: resolved.evolution.clone(),
        };
        let started = std::time::Instant::now();
        let series = parallel_ensemble(&cfg, &resolved.params, &resolved.train)?;
        let wall_seconds = started.elapsed().as_secs_f64();
        products.push(RunProduct {
            scenario: scenario.clone(),
            sweep_point,
            solver: SolverKind::Trajectories,
            rows: rows_from_ensemble(&series, &resolved.train),
            selectivity,
            pulse_count,
            master: None,
            ensemble: Some(series),
            diagnostics: None,
            wall_seconds,
        });
    }
    Ok(products)
}

/// Run a scenario, expanding its sweep (if any) into one run per value.
pub fn execute(scenario: &ScenarioConfig, overrides: &Overrides) -> Result<Vec<RunProduct>, CliError> {
    scenario.validate()?;
    match &scenario.sweep {
        None => run_point(scenario, None, overrides),
        Some(sweep) => {
            let mut products = Vec::new();
            for (k, &value) in sweep.values.iter().enumerate() {
                let dim = sweep.dims.as_ref().map(|d| d[k]);
                let point = scenario.with_sweep_value(value, dim)?;
                products.extend(run_point(&point, Some((sweep.path.clone(), value)), overrides)?);
            }
            Ok(products)
        }
    }
}
