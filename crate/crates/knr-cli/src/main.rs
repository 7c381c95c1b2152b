use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use knr_cli::error::CliError;
use knr_cli::output::{write_product, write_summary};
use knr_cli::report::summarize;
use knr_cli::runner::{execute, Overrides};
use knr_cli::scenario::{builtin_by_name, builtins, ScenarioConfig, SolverChoice};

/// Simulator for a pulse-driven, lossy Kerr nonlinear resonator coupled
/// to a thermal reservoir.
#[derive(Parser)]
#[command(name = "knr", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file (or a builtin scenario by name).
    Run {
        /// Path to a scenario TOML file, or the name of a builtin.
        config: String,
        /// Override the solver selection.
        #[arg(long, value_enum)]
        solver: Option<SolverArg>,
        /// Override the root seed of the trajectory ensemble.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the number of trajectories.
        #[arg(long)]
        n_traj: Option<u64>,
        /// Override the Fock-basis truncation.
        #[arg(long)]
        dim: Option<usize>,
        /// Diagonalize every sampled state to monitor positivity.
        #[arg(long)]
        check_positivity: bool,
        /// Directory for the output tables.
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// List the builtin scenarios and their parameters.
    List,
    /// Write every builtin scenario as a TOML file into a directory.
    GenerateBuiltins { dir: PathBuf },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum SolverArg {
    Me,
    Traj,
    Both,
}

impl From<SolverArg> for SolverChoice {
    fn from(value: SolverArg) -> Self {
        match value {
            SolverArg::Me => SolverChoice::MasterEquation,
            SolverArg::Traj => SolverChoice::Trajectories,
            SolverArg::Both => SolverChoice::Both,
        }
    }
}

fn load_scenario(spec: &str) -> Result<ScenarioConfig, CliError> {
    let path = PathBuf::from(spec);
    if path.is_file() {
        let text = std::fs::read_to_string(&path)?;
        return ScenarioConfig::from_toml(&text);
    }
    builtin_by_name(spec).ok_or_else(|| {
        CliError::Config(format!(
            "{spec} is neither a readable file nor a builtin scenario; see `knr list`"
        ))
    })
}

fn run(spec: &str, overrides: Overrides, out_dir: &PathBuf) -> Result<(), CliError> {
    let scenario = load_scenario(spec)?;
    let products = execute(&scenario, &overrides)?;
    let mut summaries = Vec::with_capacity(products.len());
    for product in &products {
        let csv = write_product(out_dir, product)?;
        let summary = summarize(product);
        print!("{}", summary.render_text());
        println!("  table: {}", csv.display());
        summaries.push(summary);
    }
    let summary_path = write_summary(out_dir, &scenario.name, &summaries)?;
    println!("summary: {}", summary_path.display());
    Ok(())
}

fn list() {
    println!(
        "{:<16} {:>5} {:>6} {:>5} {:>6} {:>5} {:>5} {:>5} {:>6}",
        "name", "chi", "delta", "n_th", "omega", "T", "tau", "dim", "t_end"
    );
    for s in builtins() {
        let sweep = s
            .sweep
            .as_ref()
            .map(|sw| format!("  sweep {} over {:?}", sw.path, sw.values))
            .unwrap_or_default();
        println!(
            "{:<16} {:>5} {:>6} {:>5} {:>6} {:>5} {:>5} {:>5} {:>6}{}",
            s.name,
            s.system.chi,
            s.system.delta,
            s.system.n_th,
            s.pulse.omega,
            s.pulse.width,
            s.pulse.period,
            s.system.dim,
            s.evolution.t_end,
            sweep
        );
    }
}

fn generate_builtins(dir: &PathBuf) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    for s in builtins() {
        let path = dir.join(format!("{}.toml", s.name));
        std::fs::write(&path, s.to_toml())?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, solver, seed, n_traj, dim, check_positivity, out_dir } => {
            let overrides = Overrides {
                solver: solver.map(Into::into),
                seed,
                n_traj,
                dim,
                check_positivity,
            };
            run(&config, overrides, &out_dir)
        }
        Command::List => {
            list();
            Ok(())
        }
        Command::GenerateBuiltins { dir } => generate_builtins(&dir),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
