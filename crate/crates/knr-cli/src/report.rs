//! Peak, dip, baseline, and oscillation-count extraction from a finished
//! run, plus the run summary assembled from them.
//!
//! Window conventions, recorded in every summary and metadata document:
//! a pulse window is `[center - 3T, center + 3T]`; the pre-pulse baseline
//! window is `[0, t0 - 3T]`; the front of a pulse is the leading half
//! `[center - 3T, center]` of its window; extrema are counted inside
//! `[center - w, center + w]` with `w = min(3T, tau/2)` so neighboring
//! windows never overlap.

use serde::Serialize;

use knr_core::analytic::count_extrema;
use knr_core::lindblad::SolverDiagnostics;

use crate::runner::{RunProduct, SeriesRow, SolverKind};

/// Wiggles in a population smaller than this are not counted as Rabi
/// extrema; well under one oscillation's visible amplitude (~0.05+) and
/// above trajectory sampling noise at the ensemble sizes in use.
pub const POPULATION_EXTREMA_PROMINENCE: f64 = 0.012;

#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct Extremum {
    pub value: f64,
    pub t: f64,
}

#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct WindowSpec {
    pub pulse_half_width: f64,
    pub baseline_end: f64,
    pub extrema_half_width: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticsSummary {
    pub dt: f64,
    pub steps: u64,
    pub max_trace_drift_rate: f64,
    pub max_hermiticity_defect: f64,
    pub max_population_clamp: f64,
    pub min_eigenvalue: Option<f64>,
}

impl From<&SolverDiagnostics> for DiagnosticsSummary {
    fn from(d: &SolverDiagnostics) -> Self {
        Self {
            dt: d.dt,
            steps: d.steps,
            max_trace_drift_rate: d.max_trace_drift_rate,
            max_hermiticity_defect: d.max_hermiticity_defect,
            max_population_clamp: d.max_population_clamp,
            min_eigenvalue: d.min_eigenvalue,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub scenario: String,
    pub sweep_point: Option<(String, f64)>,
    pub solver: &'static str,
    pub seed: u64,
    pub n_traj: Option<u64>,
    pub windows: WindowSpec,
    pub max_mean_n: Extremum,
    pub max_p1: Extremum,
    pub max_p2: Extremum,
    /// Smallest defined g2 inside the pulse windows.
    pub min_g2_in_pulse_windows: Option<Extremum>,
    /// g2 read off at the time of the mean-photon-number peak.
    pub g2_at_mean_peak: Option<f64>,
    /// `<(dn)^2> / <n>` at the mean-photon-number peak.
    pub variance_ratio_at_mean_peak: Option<f64>,
    /// Average g2 over the pre-pulse window.
    pub baseline_g2: Option<f64>,
    /// Largest defined g2 on the leading halves of the pulse windows.
    pub front_peak_g2: Option<Extremum>,
    /// Extrema of P1 / P2 per full pulse window, in pulse order.
    pub p1_extrema_per_window: Vec<usize>,
    pub p2_extrema_per_window: Vec<usize>,
    pub selectivity_satisfied: bool,
    pub diagnostics: Option<DiagnosticsSummary>,
    /// Not serialized: files must be byte-identical across runs.
    #[serde(skip)]
    pub wall_seconds: f64,
}

fn index_range(rows: &[SeriesRow], lo: f64, hi: f64) -> std::ops::Range<usize> {
    let start = rows.partition_point(|r| r.t < lo);
    let end = rows.partition_point(|r| r.t <= hi);
    start..end
}

fn max_by<F: Fn(&SeriesRow) -> f64>(rows: &[SeriesRow], f: F) -> Extremum {
    let mut best = Extremum { value: f64::MIN, t: 0.0 };
    for row in rows {
        let v = f(row);
        if v > best.value {
            best = Extremum { value: v, t: row.t };
        }
    }
    best
}

/// Pulse centers that fall inside the run window.
pub fn pulse_centers(product: &RunProduct) -> Vec<f64> {
    let t0 = product.scenario.pulse.t0;
    let period = product.scenario.pulse.period;
    let t_end = product.scenario.evolution.t_end;
    (0..product.pulse_count)
        .map(|k| t0 + k as f64 * period)
        .filter(|&c| c <= t_end)
        .collect()
}

pub fn summarize(product: &RunProduct) -> RunSummary {
    let rows = &product.rows;
    let width = product.scenario.pulse.width;
    let period = product.scenario.pulse.period;
    let t0 = product.scenario.pulse.t0;
    let t_end = product.scenario.evolution.t_end;
    let half = 3.0 * width;
    let extrema_half = half.min(0.5 * period);
    let centers = pulse_centers(product);

    let max_mean_n = max_by(rows, |r| r.mean_n);
    let max_p1 = max_by(rows, |r| r.populations[1]);
    let max_p2 = max_by(rows, |r| r.populations[2]);

    let peak_row = &rows[rows.partition_point(|r| r.t < max_mean_n.t).min(rows.len() - 1)];
    let g2_at_mean_peak = peak_row.g2;
    let variance_ratio_at_mean_peak =
        (peak_row.mean_n > 0.0).then(|| peak_row.variance_n / peak_row.mean_n);

    let mut min_g2: Option<Extremum> = None;
    let mut front_peak: Option<Extremum> = None;
    for &c in &centers {
        for row in &rows[index_range(rows, c - half, c + half)] {
            if let Some(g2) = row.g2 {
                if min_g2.is_none_or(|m| g2 < m.value) {
                    min_g2 = Some(Extremum { value: g2, t: row.t });
                }
            }
        }
        for row in &rows[index_range(rows, c - half, c)] {
            if let Some(g2) = row.g2 {
                if front_peak.is_none_or(|m| g2 > m.value) {
                    front_peak = Some(Extremum { value: g2, t: row.t });
                }
            }
        }
    }

    let baseline_end = (t0 - half).max(0.0);
    let baseline_rows = &rows[index_range(rows, 0.0, baseline_end)];
    let defined: Vec<f64> = baseline_rows.iter().filter_map(|r| r.g2).collect();
    let baseline_g2 = (!defined.is_empty())
        .then(|| defined.iter().sum::<f64>() / defined.len() as f64);

    let mut p1_extrema_per_window = Vec::new();
    let mut p2_extrema_per_window = Vec::new();
    for &c in &centers {
        if c - extrema_half < 0.0 || c + extrema_half > t_end {
            continue;
        }
        let window = &rows[index_range(rows, c - extrema_half, c + extrema_half)];
        let p1: Vec<f64> = window.iter().map(|r| r.populations[1]).collect();
        let p2: Vec<f64> = window.iter().map(|r| r.populations[2]).collect();
        p1_extrema_per_window.push(count_extrema(&p1, POPULATION_EXTREMA_PROMINENCE));
        p2_extrema_per_window.push(count_extrema(&p2, POPULATION_EXTREMA_PROMINENCE));
    }

    RunSummary {
        scenario: product.scenario.name.clone(),
        sweep_point: product.sweep_point.clone(),
        solver: product.solver.tag(),
        seed: product.scenario.run.seed,
        n_traj: matches!(product.solver, SolverKind::Trajectories)
            .then_some(product.scenario.run.n_traj),
        windows: WindowSpec {
            pulse_half_width: half,
            baseline_end,
            extrema_half_width: extrema_half,
        },
        max_mean_n,
        max_p1,
        max_p2,
        min_g2_in_pulse_windows: min_g2,
        g2_at_mean_peak,
        variance_ratio_at_mean_peak,
        baseline_g2,
        front_peak_g2: front_peak,
        p1_extrema_per_window,
        p2_extrema_per_window,
        selectivity_satisfied: product.selectivity.all_satisfied(),
        diagnostics: product.diagnostics.as_ref().map(DiagnosticsSummary::from),
        wall_seconds: product.wall_seconds,
    }
}

impl RunSummary {
    /// One-paragraph human rendering for the console.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let label = match &self.sweep_point {
            Some((path, value)) => format!("{} [{path} = {value}]", self.scenario),
            None => self.scenario.clone(),
        };
        out.push_str(&format!("{label} ({})\n", self.solver));
        out.push_str(&format!(
            "  max <n> = {:.4} at t = {:.2};  max P1 = {:.4};  max P2 = {:.4}\n",
            self.max_mean_n.value, self.max_mean_n.t, self.max_p1.value, self.max_p2.value
        ));
        if let Some(g2) = self.g2_at_mean_peak {
            out.push_str(&format!("  g2 at <n> peak = {g2:.4}"));
            if let Some(ratio) = self.variance_ratio_at_mean_peak {
                out.push_str(&format!(";  variance/mean = {ratio:.4}"));
            }
            out.push('\n');
        }
        if let Some(dip) = self.min_g2_in_pulse_windows {
            out.push_str(&format!("  min g2 in pulse windows = {:.4} at t = {:.2}\n", dip.value, dip.t));
        }
        if let Some(baseline) = self.baseline_g2 {
            out.push_str(&format!("  pre-pulse g2 baseline = {baseline:.4}\n"));
        }
        if let Some(front) = self.front_peak_g2 {
            out.push_str(&format!("  pulse-front g2 peak = {:.4} at t = {:.2}\n", front.value, front.t));
        }
        if !self.p1_extrema_per_window.is_empty() {
            out.push_str(&format!(
                "  P1/P2 extrema per pulse window: {:?} / {:?}\n",
                self.p1_extrema_per_window, self.p2_extrema_per_window
            ));
        }
        if !self.selectivity_satisfied {
            out.push_str("  note: pulse selectivity inequalities not all satisfied\n");
        }
        out.push_str(&format!("  wall clock: {:.2} s\n", self.wall_seconds));
        out
    }
}
