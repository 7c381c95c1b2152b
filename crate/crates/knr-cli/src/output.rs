//! File emission: one CSV table plus one JSON metadata sidecar per
//! (scenario point, solver), and one JSON summary document per scenario.
//! Files are written atomically (temp file + rename) and contain nothing
//! nondeterministic, so identical config and seed give identical bytes.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliError;
use crate::report::{summarize, RunSummary, WindowSpec};
use crate::runner::{RunProduct, SeriesRow, K_REPORT};
use crate::scenario::{EvolutionSection, PulseSection, SystemSection};

pub const CSV_HEADER: &str = "t,mean_n,g2,P0,P1,P2,P3,P4,P5,variance_n,envelope";

#[derive(Debug, Serialize)]
struct SelectivityMeta {
    gamma_t: f64,
    chi_t: f64,
    gamma_tau: f64,
    all_satisfied: bool,
}

/// Sidecar describing exactly how a table was produced.
#[derive(Debug, Serialize)]
pub struct Metadata {
    pub scenario: String,
    pub solver: &'static str,
    pub sweep_path: Option<String>,
    pub sweep_value: Option<f64>,
    pub system: SystemSection,
    pub pulse: PulseSection,
    pub evolution: EvolutionSection,
    pub pulse_count: u64,
    pub seed: u64,
    pub n_traj: Option<u64>,
    pub code_version: &'static str,
    pub g2_undefined_threshold: f64,
    pub truncation_limit: f64,
    pub windows: WindowSpec,
    selectivity: SelectivityMeta,
    pub diagnostics: Option<crate::report::DiagnosticsSummary>,
    pub columns: &'static str,
}

fn atomic_write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let tmp = path.with_extension("tmp");
    {
        let mut file = fs::File::create(&tmp)?;
        file.write_all(bytes)?;
        file.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn format_cell(value: f64) -> String {
    format!("{value:.12e}")
}

pub fn render_csv(rows: &[SeriesRow]) -> String {
    let mut out = String::with_capacity(rows.len() * 160);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&format_cell(row.t));
        out.push(',');
        out.push_str(&format_cell(row.mean_n));
        out.push(',');
        if let Some(g2) = row.g2 {
            out.push_str(&format_cell(g2));
        }
        for k in 0..=K_REPORT {
            out.push(',');
            out.push_str(&format_cell(row.populations[k]));
        }
        out.push(',');
        out.push_str(&format_cell(row.variance_n));
        out.push(',');
        out.push_str(&format_cell(row.envelope));
        out.push('\n');
    }
    out
}

/// Base file name for one product: `scenario[__path=value]__solver`.
pub fn product_stem(product: &RunProduct) -> String {
    let mut stem = product.scenario.name.clone();
    if let Some((path, value)) = &product.sweep_point {
        let short = path.rsplit('.').next().unwrap_or(path);
        stem.push_str(&format!("__{short}={value}"));
    }
    stem.push_str("__");
    stem.push_str(product.solver.tag());
    stem
}

fn metadata_for(product: &RunProduct) -> Metadata {
    let summary = summarize(product);
    Metadata {
        scenario: product.scenario.name.clone(),
        solver: product.solver.tag(),
        sweep_path: product.sweep_point.as_ref().map(|(p, _)| p.clone()),
        sweep_value: product.sweep_point.as_ref().map(|(_, v)| *v),
        system: product.scenario.system,
        pulse: product.scenario.pulse,
        evolution: product.scenario.evolution,
        pulse_count: product.pulse_count,
        seed: product.scenario.run.seed,
        n_traj: summary.n_traj,
        code_version: env!("CARGO_PKG_VERSION"),
        g2_undefined_threshold: knr_core::observables::G2_UNDEFINED_THRESHOLD,
        truncation_limit: knr_core::lindblad::TRUNCATION_LIMIT,
        windows: summary.windows,
        selectivity: SelectivityMeta {
            gamma_t: product.selectivity.gamma_t,
            chi_t: product.selectivity.chi_t,
            gamma_tau: product.selectivity.gamma_tau,
            all_satisfied: product.selectivity.all_satisfied(),
        },
        diagnostics: product.diagnostics.as_ref().map(Into::into),
        columns: CSV_HEADER,
    }
}

/// Write the table and sidecar for one product; returns the CSV path.
pub fn write_product(dir: &Path, product: &RunProduct) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir)?;
    let stem = product_stem(product);
    let csv_path = dir.join(format!("{stem}.csv"));
    atomic_write(&csv_path, render_csv(&product.rows).as_bytes())?;
    let meta = metadata_for(product);
    let meta_path = dir.join(format!("{stem}.meta.json"));
    let json = serde_json::to_string_pretty(&meta).expect("metadata serializes");
    atomic_write(&meta_path, json.as_bytes())?;
    Ok(csv_path)
}

#[derive(Debug, Serialize)]
struct SummaryDocument<'a> {
    scenario: &'a str,
    runs: &'a [RunSummary],
}

/// Write the per-scenario summary document (wall-clock excluded so the
/// file is reproducible; timings go to the console).
pub fn write_summary(dir: &Path, scenario: &str, runs: &[RunSummary]) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir)?;
    let path = dir.join(format!("{scenario}.summary.json"));
    let doc = SummaryDocument { scenario, runs };
    let json = serde_json::to_string_pretty(&doc).expect("summary serializes");
    atomic_write(&path, json.as_bytes())?;
    Ok(path)
}
