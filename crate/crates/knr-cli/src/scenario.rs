//! Scenario configuration: the on-disk TOML schema, validation, sweep
//! resolution, and the catalog of builtin operating points.
//!
//! All frequencies are in units of the dissipation rate `gamma`, times in
//! units of `1/gamma`.

use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub system: SystemSection,
    pub pulse: PulseSection,
    pub evolution: EvolutionSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    /// Kerr anharmonicity chi.
    pub chi: f64,
    /// Detuning of the resonator from the drive.
    pub delta: f64,
    /// Mean reservoir occupation.
    pub n_th: f64,
    /// Fock-basis truncation.
    pub dim: usize,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PulseSection {
    /// Peak pump amplitude (real part).
    pub omega: f64,
    /// Imaginary part of the pump amplitude, normally zero.
    #[serde(default)]
    pub omega_im: f64,
    /// Pulse duration T.
    pub width: f64,
    /// Pulse separation tau.
    pub period: f64,
    /// Center of the first pulse.
    #[serde(default = "default_t0")]
    pub t0: f64,
    /// Number of pulses; derived from the window when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<u64>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct EvolutionSection {
    pub t_end: f64,
    #[serde(default = "default_dt_max")]
    pub dt_max: f64,
    #[serde(default = "default_sample_dt")]
    pub sample_dt: f64,
    #[serde(default)]
    pub initial: InitialState,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "kebab-case")]
pub enum InitialState {
    /// Thermal state at the reservoir occupation; vacuum when `n_th = 0`.
    #[default]
    Thermal,
    Vacuum,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default)]
    pub solver: SolverChoice,
    #[serde(default = "default_n_traj")]
    pub n_traj: u64,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

impl Default for RunSection {
    fn default() -> Self {
        Self { solver: SolverChoice::default(), n_traj: default_n_traj(), seed: default_seed() }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SolverChoice {
    #[default]
    MasterEquation,
    Trajectories,
    Both,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// Dotted path of the swept parameter, e.g. `system.n_th`.
    pub path: String,
    pub values: Vec<f64>,
    /// Optional per-value truncation override, same length as `values`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<Vec<usize>>,
}

fn default_t0() -> f64 {
    2.0
}
fn default_dt_max() -> f64 {
    1e-4
}
fn default_sample_dt() -> f64 {
    0.01
}
fn default_n_traj() -> u64 {
    1000
}
fn default_seed() -> u64 {
    7
}

/// Parameter paths a sweep may reference.
pub const SWEEPABLE_PATHS: &[&str] = &[
    "system.chi",
    "system.delta",
    "system.n_th",
    "pulse.omega",
    "pulse.width",
    "pulse.period",
    "pulse.t0",
];

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: ScenarioConfig =
            toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.name.is_empty() {
            return Err(CliError::Config("scenario name must not be empty".into()));
        }
        if self.system.dim < 2 {
            return Err(CliError::Config(format!("dim must be >= 2, got {}", self.system.dim)));
        }
        if self.system.n_th < 0.0 {
            return Err(CliError::Config(format!("n_th must be >= 0, got {}", self.system.n_th)));
        }
        if self.pulse.width <= 0.0 || self.pulse.period <= 0.0 {
            return Err(CliError::Config("pulse width and period must be > 0".into()));
        }
        if !(self.evolution.dt_max > 0.0
            && self.evolution.dt_max <= self.evolution.sample_dt
            && self.evolution.sample_dt <= self.evolution.t_end)
        {
            return Err(CliError::Config(format!(
                "need 0 < dt_max <= sample_dt <= t_end, got {} / {} / {}",
                self.evolution.dt_max, self.evolution.sample_dt, self.evolution.t_end
            )));
        }
        if self.run.n_traj == 0 {
            return Err(CliError::Config("n_traj must be >= 1".into()));
        }
        if let Some(sweep) = &self.sweep {
            if !SWEEPABLE_PATHS.contains(&sweep.path.as_str()) {
                return Err(CliError::Config(format!(
                    "unknown sweep path {:?}; valid paths: {}",
                    sweep.path,
                    SWEEPABLE_PATHS.join(", ")
                )));
            }
            if sweep.values.is_empty() {
                return Err(CliError::Config("sweep value list must not be empty".into()));
            }
            if let Some(dims) = &sweep.dims {
                if dims.len() != sweep.values.len() {
                    return Err(CliError::Config(format!(
                        "sweep.dims has {} entries for {} values",
                        dims.len(),
                        sweep.values.len()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Apply one sweep value, producing a concrete single-run scenario.
    pub fn with_sweep_value(&self, value: f64, dim: Option<usize>) -> Result<Self, CliError> {
        let mut out = self.clone();
        out.sweep = None;
        let path = self.sweep.as_ref().map(|s| s.path.as_str()).unwrap_or("");
        match path {
            "system.chi" => out.system.chi = value,
            "system.delta" => out.system.delta = value,
            "system.n_th" => out.system.n_th = value,
            "pulse.omega" => out.pulse.omega = value,
            "pulse.width" => out.pulse.width = value,
            "pulse.period" => out.pulse.period = value,
            "pulse.t0" => out.pulse.t0 = value,
            other => {
                return Err(CliError::Config(format!("unknown sweep path {other:?}")));
            }
        }
        if let Some(dim) = dim {
            out.system.dim = dim;
        }
        out.validate()?;
        Ok(out)
    }

    /// Number of pulses covering the run window when the config leaves it
    /// open: `ceil(t_end / period) + 1`.
    pub fn effective_pulse_count(&self) -> u64 {
        self.pulse
            .count
            .unwrap_or_else(|| (self.evolution.t_end / self.pulse.period).ceil() as u64 + 1)
    }
}

fn scenario(
    name: &str,
    (chi, delta, n_th, dim): (f64, f64, f64, usize),
    (omega, width, period): (f64, f64, f64),
    t_end: f64,
) -> ScenarioConfig {
    ScenarioConfig {
        name: name.into(),
        system: SystemSection { chi, delta, n_th, dim },
        pulse: PulseSection {
            omega,
            omega_im: 0.0,
            width,
            period,
            t0: default_t0(),
            count: None,
        },
        evolution: EvolutionSection {
            t_end,
            dt_max: default_dt_max(),
            sample_dt: default_sample_dt(),
            initial: InitialState::Thermal,
        },
        run: RunSection::default(),
        sweep: None,
    }
}

/// The builtin operating points. Two drive conditions recur throughout:
/// the one-photon point (chi = 15, resonant drive) and the two-photon
/// point (chi = 30, drive detuned by -chi onto the |0> -> |2> resonance);
/// the variations change the reservoir occupation or the pulse shape.
pub fn builtins() -> Vec<ScenarioConfig> {
    let mut list = vec![
        scenario("fig1-onephoton", (15.0, 0.0, 0.0, 16), (6.0, 0.4, 5.5), 22.0),
        scenario("fig1-twophoton", (30.0, -30.0, 0.0, 18), (12.0, 0.4, 5.5), 22.0),
        scenario("fig2-onephoton", (15.0, 0.0, 0.1, 18), (6.0, 0.4, 5.5), 22.0),
        scenario("fig2-twophoton", (30.0, -30.0, 0.1, 20), (12.0, 0.4, 5.5), 22.0),
        scenario("fig3-sweep", (15.0, 0.0, 0.0, 16), (6.0, 0.4, 5.5), 22.0),
        scenario("fig4a", (15.0, 0.0, 0.58, 26), (6.0, 0.4, 5.5), 22.0),
        scenario("fig4b", (30.0, -30.0, 0.58, 28), (12.0, 0.4, 5.5), 22.0),
        scenario("fig4c", (15.0, 0.0, 1.9, 44), (6.0, 0.4, 5.5), 22.0),
        scenario("fig4d", (30.0, -30.0, 1.9, 44), (12.0, 0.4, 5.5), 22.0),
        scenario("fig5a", (15.0, 0.0, 0.0, 18), (8.0, 0.8, 4.0), 16.0),
        scenario("fig5b", (30.0, -30.0, 0.0, 22), (12.0, 0.8, 4.0), 16.0),
        scenario("fig6a", (15.0, 0.0, 0.0, 24), (14.0, 0.4, 5.5), 22.0),
        scenario("fig6b", (30.0, -30.0, 0.0, 28), (25.0, 0.4, 5.5), 22.0),
    ];
    for cfg in list.iter_mut() {
        if cfg.name == "fig3-sweep" {
            cfg.sweep = Some(SweepSection {
                path: "system.n_th".into(),
                values: vec![0.0, 0.1, 0.25, 0.5, 1.0, 1.9],
                dims: Some(vec![16, 18, 22, 26, 34, 44]),
            });
        }
    }
    list
}

pub fn builtin_by_name(name: &str) -> Option<ScenarioConfig> {
    builtins().into_iter().find(|s| s.name == name)
}
