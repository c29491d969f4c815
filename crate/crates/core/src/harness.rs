//! Experiment orchestration and trace output.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use crate::am::{full_objective, run_with_bundle, IterateTrace, RunOptions, RunReport};
use crate::error::{Error, Result};
use crate::radar::CovarianceBundle;
use crate::scenario::ScenarioConfig;
use crate::waveform::{scale_solution, MultiplierMode, SolverKind};

/// Reads and validates a JSON scenario file.
pub fn load_scenario(path: &Path) -> Result<ScenarioConfig> {
    ScenarioConfig::from_json(&fs::read_to_string(path)?)
}

#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub scenario: ScenarioConfig,
    pub solvers: Vec<SolverKind>,
    pub mode: MultiplierMode,
    pub rescale: bool,
    pub trials: usize,
    pub max_iter: usize,
    pub seed: u64,
    pub output_path: Option<PathBuf>,
}

impl ExperimentSpec {
    /// One trial of every solver in root mode, seeded from the scenario.
    pub fn new(scenario: ScenarioConfig) -> Self {
        Self {
            seed: scenario.seed,
            scenario,
            solvers: SolverKind::ALL.to_vec(),
            mode: MultiplierMode::Root,
            rescale: false,
            trials: 1,
            max_iter: 20,
            output_path: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        if self.trials == 0 {
            return Err(Error::validation("trials", "must be >= 1"));
        }
        if self.solvers.is_empty() {
            return Err(Error::validation("solvers", "must name at least one solver"));
        }
        Ok(())
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of trial `t`: depends only on the experiment seed and `t`.
pub fn trial_seed(seed: u64, trial: usize) -> u64 {
    splitmix64(seed ^ splitmix64(trial as u64))
}

/// One (trial, solver) run.
#[derive(Debug)]
pub struct Cell {
    pub trial: usize,
    pub seed: u64,
    pub solver: SolverKind,
    pub outcome: Result<RunReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub label: String,
    pub mean_final_objective: f64,
    pub std_final_objective: f64,
    /// Successful trials.
    pub trials: usize,
    pub failures: usize,
}

impl ComparisonRow {
    fn from_values(label: String, values: &[f64], failures: usize) -> Self {
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        Self {
            label,
            mean_final_objective: mean,
            std_final_objective: var.sqrt(),
            trials: n,
            failures,
        }
    }

    pub fn std_error(&self) -> f64 {
        self.std_final_objective / (self.trials as f64).sqrt()
    }
}

#[derive(Debug)]
pub struct Comparison {
    pub cells: Vec<Cell>,
    pub table: Vec<ComparisonRow>,
}

impl Comparison {
    pub fn row(&self, label: &str) -> Option<&ComparisonRow> {
        self.table.iter().find(|r| r.label == label)
    }
}

/// Final objective of a run on the power budget: the last iterate, scaled
/// down onto `‖s‖² = P_o` if it exceeds the budget.
pub fn feasible_final_objective(report: &RunReport, bundle: &CovarianceBundle) -> Result<f64> {
    let last = report.trace.last();
    if last.power <= report.trace.power {
        return Ok(last.objective);
    }
    let (w, s) = scale_solution(&last.w, &last.s, report.trace.power)?;
    Ok(full_objective(bundle, &w, &s))
}

/// Runs every requested solver on every trial. Trial `t` runs on a copy of
/// the scenario seeded with [`trial_seed`], so all solvers share its initial
/// waveform. Failed cells are kept and counted, not propagated.
pub fn run_comparison(spec: &ExperimentSpec) -> Result<Comparison> {
    spec.validate()?;
    let cfg = &spec.scenario;
    let bundle = CovarianceBundle::new(cfg);
    let per_trial: Vec<Vec<Cell>> = (0..spec.trials)
        .into_par_iter()
        .map(|trial| {
            let seed = trial_seed(spec.seed, trial);
            let trial_cfg = ScenarioConfig { seed, ..cfg.clone() };
            spec.solvers
                .iter()
                .map(|&solver| {
                    let opts = RunOptions {
                        max_iter: spec.max_iter,
                        mode: spec.mode,
                        rescale: spec.rescale,
                        ..RunOptions::default()
                    };
                    Cell {
                        trial,
                        seed,
                        solver,
                        outcome: run_with_bundle(&trial_cfg, &bundle, solver, &opts),
                    }
                })
                .collect()
        })
        .collect();
    let cells: Vec<Cell> = per_trial.into_iter().flatten().collect();

    let mut table = Vec::new();
    for &solver in &spec.solvers {
        let mine = cells.iter().filter(|c| c.solver == solver);
        let mut values = Vec::new();
        let mut rescaled = Vec::new();
        let mut failures = 0;
        for cell in mine {
            match &cell.outcome {
                Ok(report) => match feasible_final_objective(report, &bundle) {
                    Ok(v) => {
                        values.push(v);
                        if let Some(r) = &report.trace.last().rescaled {
                            rescaled.push(r.objective);
                        }
                    }
                    Err(_) => failures += 1,
                },
                Err(_) => failures += 1,
            }
        }
        let label = format!("{solver}/{}", spec.mode);
        table.push(ComparisonRow::from_values(label.clone(), &values, failures));
        if spec.rescale {
            table.push(ComparisonRow::from_values(format!("{label}/rescaled"), &rescaled, failures));
        }
    }
    Ok(Comparison { cells, table })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TraceFormat {
    #[default]
    Csv,
    Json,
}

impl TraceFormat {
    pub fn extension(self) -> &'static str {
        match self {
            TraceFormat::Csv => "csv",
            TraceFormat::Json => "json",
        }
    }
}

impl fmt::Display for TraceFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.extension())
    }
}

impl FromStr for TraceFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(TraceFormat::Csv),
            "json" => Ok(TraceFormat::Json),
            _ => Err(Error::validation("format", format!("unknown format `{s}` (csv, json)"))),
        }
    }
}

pub const TRACE_COLUMNS: [&str; 10] = [
    "iter",
    "objective",
    "clutter_objective",
    "power",
    "capon_residual",
    "multiplier",
    "step_w",
    "step_s",
    "drift",
    "rescaled_objective",
];

/// One parsed trace row.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct TraceRow {
    pub iter: usize,
    pub objective: f64,
    pub clutter_objective: f64,
    pub power: f64,
    pub capon_residual: f64,
    pub multiplier: f64,
    pub step_w: f64,
    pub step_s: f64,
    pub drift: Option<f64>,
    pub rescaled_objective: Option<f64>,
}

impl TraceRow {
    pub fn from_trace(trace: &IterateTrace) -> Vec<TraceRow> {
        trace
            .records
            .iter()
            .map(|r| TraceRow {
                iter: r.iteration,
                objective: r.objective,
                clutter_objective: r.clutter_objective,
                power: r.power,
                capon_residual: r.capon_residual,
                multiplier: r.multiplier,
                step_w: r.step_w,
                step_s: r.step_s,
                drift: r.drift,
                rescaled_objective: r.rescaled.as_ref().map(|p| p.objective),
            })
            .collect()
    }

    fn floats(&self) -> [Option<f64>; 9] {
        [
            Some(self.objective),
            Some(self.clutter_objective),
            Some(self.power),
            Some(self.capon_residual),
            Some(self.multiplier),
            Some(self.step_w),
            Some(self.step_s),
            self.drift,
            self.rescaled_objective,
        ]
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
fn float_text(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_csv<W: Write>(rows: &[TraceRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_COLUMNS)?;
    for row in rows {
        let mut fields = vec![row.iter.to_string()];
        fields.extend(row.floats().iter().map(|v| v.map(float_text).unwrap_or_default()));
        w.write_record(&fields)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct JsonTrace {
    solver: SolverKind,
    lambda_mode: MultiplierMode,
    rescaled: bool,
    seed: u64,
    kappa: Box<RawValue>,
    power: Box<RawValue>,
    records: Vec<serde_json::Map<String, serde_json::Value>>,
}

fn raw(x: f64) -> Result<Box<RawValue>> {
    let text = if x.is_finite() { float_text(x) } else { "null".into() };
    Ok(RawValue::from_string(text)?)
}

fn write_json<W: Write>(trace: &IterateTrace, rows: &[TraceRow], mut out: W) -> Result<()> {
    let mut records = Vec::with_capacity(rows.len());
    for row in rows {
        let mut map = serde_json::Map::new();
        map.insert(TRACE_COLUMNS[0].into(), row.iter.into());
        for (name, v) in TRACE_COLUMNS[1..].iter().zip(row.floats()) {
            let value = match v {
                Some(x) => serde_json::to_value(raw(x)?)?,
                None => serde_json::Value::Null,
            };
            map.insert((*name).into(), value);
        }
        records.push(map);
    }
    let doc = JsonTrace {
        solver: trace.solver,
        lambda_mode: trace.mode,
        rescaled: trace.rescaled,
        seed: trace.seed,
        kappa: raw(trace.kappa)?,
        power: raw(trace.power)?,
        records,
    };
    serde_json::to_writer_pretty(&mut out, &doc)?;
    writeln!(out)?;
    Ok(())
}

/// Writes a trace to any sink.
pub fn write_trace<W: Write>(trace: &IterateTrace, out: W, format: TraceFormat) -> Result<()> {
    let rows = TraceRow::from_trace(trace);
    match format {
        TraceFormat::Csv => write_csv(&rows, out),
        TraceFormat::Json => write_json(trace, &rows, out),
    }
}

/// Writes a trace file, one row per record (initial pair included).
pub fn emit_trace(trace: &IterateTrace, path: &Path, format: TraceFormat) -> Result<()> {
    let file = fs::File::create(path)?;
    write_trace(trace, std::io::BufWriter::new(file), format)
}

/// Parses a CSV trace written by [`emit_trace`].
pub fn read_trace_csv(path: &Path) -> Result<Vec<TraceRow>> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    if headers.iter().ne(TRACE_COLUMNS) {
        return Err(Error::Parse(format!("unexpected trace header {headers:?}")));
    }
    Ok(reader.deserialize().collect::<std::result::Result<_, _>>()?)
}

/// Writes the comparison table as CSV.
pub fn write_table<W: Write>(table: &[ComparisonRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["label", "mean_final_objective", "std_final_objective", "std_error", "trials", "failures"])?;
    for row in table {
        w.write_record([
            row.label.clone(),
            float_text(row.mean_final_objective),
            float_text(row.std_final_objective),
            float_text(row.std_error()),
            row.trials.to_string(),
            row.failures.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `trial<t>_<solver>.<ext>` for every successful cell, plus
/// `failures.csv` and `table.csv`, into `dir`.
pub fn write_comparison(comparison: &Comparison, dir: &Path, format: TraceFormat) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut failures = csv::Writer::from_path(dir.join("failures.csv"))?;
    failures.write_record(["trial", "solver", "error"])?;
    for cell in &comparison.cells {
        match &cell.outcome {
            Ok(report) => {
                let name = format!("trial{:03}_{}.{}", cell.trial, cell.solver, format.extension());
                emit_trace(&report.trace, &dir.join(name), format)?;
            }
            Err(e) => {
                failures.write_record([cell.trial.to_string(), cell.solver.to_string(), e.to_string()])?;
            }
        }
    }
    failures.flush()?;
    write_table(&comparison.table, fs::File::create(dir.join("table.csv"))?)
}
