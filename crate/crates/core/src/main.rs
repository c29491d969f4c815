use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use stap_codesign::am::{run, RunOptions};
use stap_codesign::harness::{
    load_scenario, run_comparison, write_comparison, write_table, write_trace, emit_trace,
    ExperimentSpec, TraceFormat,
};
use stap_codesign::waveform::{MultiplierMode, SolverKind};
use stap_codesign::{Error, Result, ScenarioConfig};

/// Joint STAP receive-filter and waveform design by alternating minimization.
#[derive(Parser)]
#[command(name = "stap-codesign", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario JSON file; the built-in 5x8x8 reference scenario if omitted.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Alternating-minimization iterations.
    #[arg(long, default_value_t = 20)]
    iters: usize,
    /// Power multiplier policy for the waveform step: root or zero.
    #[arg(long, default_value = "root")]
    lambda_mode: MultiplierMode,
    /// Also report iterates rescaled onto the power boundary.
    #[arg(long)]
    rescale: bool,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file (run) or directory (compare, montecarlo).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Trace format: csv or json.
    #[arg(long, default_value = "csv")]
    format: TraceFormat,
}

#[derive(Subcommand)]
enum Command {
    /// Run one solver and emit its trace.
    Run {
        #[command(flatten)]
        common: Common,
        /// am-direct, qcqp, sdp or cls.
        #[arg(long, default_value = "am-direct")]
        solver: SolverKind,
    },
    /// Run several solvers from one shared initial waveform.
    Compare {
        #[command(flatten)]
        common: Common,
        /// Solvers to compare (repeat or comma-separate); all by default.
        #[arg(long, value_delimiter = ',')]
        solver: Vec<SolverKind>,
    },
    /// Monte Carlo comparison table over seeded trials.
    Montecarlo {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        solver: Vec<SolverKind>,
        #[arg(long, default_value_t = 50)]
        trials: usize,
    },
}

fn scenario(common: &Common) -> Result<ScenarioConfig> {
    let mut cfg = match &common.scenario {
        Some(path) => load_scenario(path)?,
        None => ScenarioConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn compare(common: &Common, solvers: &[SolverKind], trials: usize) -> Result<()> {
    let mut spec = ExperimentSpec::new(scenario(common)?);
    if !solvers.is_empty() {
        spec.solvers = solvers.to_vec();
    }
    spec.mode = common.lambda_mode;
    spec.rescale = common.rescale;
    spec.trials = trials;
    spec.max_iter = common.iters;
    spec.output_path = common.out.clone();
    let comparison = run_comparison(&spec)?;
    if let Some(dir) = &spec.output_path {
        write_comparison(&comparison, dir, common.format)?;
    }
    for cell in &comparison.cells {
        if let Err(e) = &cell.outcome {
            eprintln!("trial {} {}: {e}", cell.trial, cell.solver);
        }
    }
    write_table(&comparison.table, io::stdout().lock())
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { common, solver } => {
            let cfg = scenario(&common)?;
            let opts = RunOptions {
                max_iter: common.iters,
                mode: common.lambda_mode,
                rescale: common.rescale,
                ..RunOptions::default()
            };
            let report = run(&cfg, solver, &opts)?;
            match &common.out {
                Some(path) => emit_trace(&report.trace, path, common.format)?,
                None => write_trace(&report.trace, io::stdout().lock(), common.format)?,
            }
            eprintln!(
                "{solver}/{}: final objective {:.6e}, monotonicity violations {}, stationary {}",
                common.lambda_mode, report.final_objective, report.monotonicity_violations, report.stationary
            );
            Ok(())
        }
        Command::Compare { common, solver } => compare(&common, &solver, 1),
        Command::Montecarlo {
            common,
            solver,
            trials,
        } => compare(&common, &solver, trials),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e.root_cause() {
                Error::Io(_) | Error::Csv(_) | Error::Json(_) => 1,
                _ if e.is_validation() => 2,
                _ => 3,
            };
            ExitCode::from(code)
        }
    }
}
