//! Alternating minimization of `f(w, s) = wᴴ R_u(s) w` over the receive
//! filter and the transmit waveform.
//!
//! Each iteration takes the MVDR filter for the current waveform and then
//! the best waveform for that filter, so the half-step objectives
//! `f(w₀,s₀) ≥ f(w₁,s₁) ≥ f(w₂,s₁) ≥ f(w₂,s₂) ≥ …` are nonincreasing.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{c, complement_basis, quad_form, CMatrix, CVector};
use crate::radar::{clutter_form, CovarianceBundle};
use crate::receiver::{mvdr_for, WeightVector};
use crate::scenario::ScenarioConfig;
use crate::waveform::{
    scale_solution, solve, DualCertificate, MultiplierMode, SolverKind, Waveform,
    WaveformProblem, WaveformSolution,
};

/// Relative slack allowed before a half-step increase counts as a
/// monotonicity violation.
pub const MONOTONE_SLACK: f64 = 1e-9;

/// Threshold on the KKT residual and step sizes for the stationarity flag.
pub const STATIONARY_TOL: f64 = 1e-6;

/// Seed of the boundary sampler used for the constraint-set drift.
const DRIFT_SEED: u64 = 0x5eed_d21f;

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub max_iter: usize,
    /// Stop once the relative objective change falls to this level;
    /// zero disables early stopping.
    pub obj_tol: f64,
    pub mode: MultiplierMode,
    /// Also report each iterate scaled onto the power boundary. The
    /// iteration itself continues from the unscaled pair.
    pub rescale: bool,
    /// Starting waveform; drawn from the scenario seed when absent.
    pub init_waveform: Option<Waveform>,
    /// Boundary samples per set for the drift estimate.
    pub drift_samples: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            max_iter: 20,
            obj_tol: 0.0,
            mode: MultiplierMode::Root,
            rescale: false,
            init_waveform: None,
            drift_samples: 256,
        }
    }
}

/// An iterate scaled onto `‖s‖² = P_o`.
#[derive(Debug, Clone)]
pub struct RescaledPair {
    pub w: WeightVector,
    pub s: Waveform,
    pub objective: f64,
    pub clutter_objective: f64,
}

#[derive(Debug, Clone)]
pub struct IterateRecord {
    pub iteration: usize,
    pub w: WeightVector,
    pub s: Waveform,
    /// `f(w_k, s_k)`.
    pub objective: f64,
    /// `f(w_k, s_{k-1})`; equal to `objective` for the initial record.
    pub half_step_objective: f64,
    /// `w_kᴴ R_c(s_k) w_k`.
    pub clutter_objective: f64,
    /// `|s_kᴴ Gᴴ w_k − κ|`.
    pub capon_residual: f64,
    /// `|w_kᴴ G s_{k-1} − κ|`, the receive-side Capon residual.
    pub receive_capon_residual: f64,
    pub power: f64,
    pub multiplier: f64,
    pub kkt_residual: f64,
    pub step_w: f64,
    pub step_s: f64,
    /// Hausdorff estimate between consecutive waveform feasible sets;
    /// `None` for the initial record or when a set is empty.
    pub drift: Option<f64>,
    pub rescaled: Option<RescaledPair>,
    pub certificate: Option<DualCertificate>,
}

#[derive(Debug, Clone)]
pub struct IterateTrace {
    pub solver: SolverKind,
    pub mode: MultiplierMode,
    pub rescaled: bool,
    /// Scenario seed (the source of `s₀` unless one was supplied).
    pub seed: u64,
    pub kappa: f64,
    pub power: f64,
    pub records: Vec<IterateRecord>,
}

impl IterateTrace {
    pub fn last(&self) -> &IterateRecord {
        self.records.last().expect("a trace always holds the initial record")
    }

    /// `f(w₀,s₀), f(w₁,s₀), f(w₁,s₁), f(w₂,s₁), …`.
    pub fn half_step_sequence(&self) -> Vec<f64> {
        let mut seq = Vec::with_capacity(2 * self.records.len());
        for (k, r) in self.records.iter().enumerate() {
            if k > 0 {
                seq.push(r.half_step_objective);
            }
            seq.push(r.objective);
        }
        seq
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub trace: IterateTrace,
    /// True when the objective tolerance triggered an early stop.
    pub converged: bool,
    /// KKT residual and both step sizes of the last iterate are below
    /// [`STATIONARY_TOL`].
    pub stationary: bool,
    pub final_objective: f64,
    pub monotonicity_violations: usize,
    pub hull_diameter_w: f64,
    pub hull_diameter_s: f64,
    pub max_constraint_drift: Option<f64>,
}

/// `f(w, s) = wᴴ (R_n + R_i) w + Σ_q |wᴴ A_q s|²`.
pub fn full_objective(bundle: &CovarianceBundle, w: &CVector, s: &CVector) -> f64 {
    quad_form(&bundle.noise_plus_interference, w) + clutter_form(&bundle.clutter_ops, w, s)
}

/// Seeded complex Gaussian waveform scaled to `‖s‖² = P_o`.
pub fn initial_waveform(len: usize, power: f64, seed: u64) -> Waveform {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = CVector::from_fn(len, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    s.scale((power / s.norm_squared()).sqrt())
}

/// One alternation: `w = MVDR(s_prev)`, then the waveform step for `w`.
pub fn am_step(
    bundle: &CovarianceBundle,
    s_prev: &Waveform,
    kappa: f64,
    power: f64,
    solver: SolverKind,
    mode: MultiplierMode,
) -> Result<(WeightVector, WaveformSolution)> {
    let w = mvdr_for(bundle, s_prev, kappa)?;
    let problem = WaveformProblem::from_receiver(
        bundle.waveform_hessian(&w),
        &bundle.target_map,
        &w,
        kappa,
        power,
    )?;
    let sol = solve(solver, &problem, mode)?;
    Ok((w, sol))
}

/// Builds the scenario covariances and runs the alternation.
pub fn run(cfg: &ScenarioConfig, solver: SolverKind, opts: &RunOptions) -> Result<RunReport> {
    cfg.validate()?;
    run_with_bundle(cfg, &CovarianceBundle::new(cfg), solver, opts)
}

/// Runs the alternation against prebuilt covariances.
pub fn run_with_bundle(
    cfg: &ScenarioConfig,
    bundle: &CovarianceBundle,
    solver: SolverKind,
    opts: &RunOptions,
) -> Result<RunReport> {
    let (kappa, power) = (cfg.kappa, cfg.power);
    let n = cfg.dims.samples;
    let s0 = match &opts.init_waveform {
        Some(s) if s.len() != n => {
            return Err(Error::Dimension(format!(
                "initial waveform has length {}, expected {n}",
                s.len()
            )))
        }
        Some(s) => s.clone(),
        None => initial_waveform(n, power, cfg.seed),
    };

    let rescaled = |w: &CVector, s: &CVector| -> Result<Option<RescaledPair>> {
        if !opts.rescale {
            return Ok(None);
        }
        let (w, s) = scale_solution(w, s, power)?;
        Ok(Some(RescaledPair {
            objective: full_objective(bundle, &w, &s),
            clutter_objective: clutter_form(&bundle.clutter_ops, &w, &s),
            w,
            s,
        }))
    };

    let w0 = mvdr_for(bundle, &s0, kappa).map_err(|e| Error::at_iteration(0, e))?;
    let objective0 = full_objective(bundle, &w0, &s0);
    let capon0 = (w0.dotc(&bundle.steer(&s0)) - c(kappa)).norm();
    let mut records = vec![IterateRecord {
        iteration: 0,
        objective: objective0,
        half_step_objective: objective0,
        clutter_objective: clutter_form(&bundle.clutter_ops, &w0, &s0),
        capon_residual: capon0,
        receive_capon_residual: capon0,
        power: s0.norm_squared(),
        multiplier: 0.0,
        kkt_residual: 0.0,
        step_w: 0.0,
        step_s: 0.0,
        drift: None,
        rescaled: rescaled(&w0, &s0).map_err(|e| Error::at_iteration(0, e))?,
        certificate: None,
        w: w0,
        s: s0,
    }];

    let mut converged = false;
    for k in 1..=opts.max_iter {
        let prev = records.last().expect("initial record");
        let (w, sol) = am_step(bundle, &prev.s, kappa, power, solver, opts.mode)
            .map_err(|e| Error::at_iteration(k, e))?;
        let s = sol.s;
        let objective = full_objective(bundle, &w, &s);
        let drift = constraint_set_drift(
            &bundle.receive_steering(&prev.w),
            &bundle.receive_steering(&w),
            kappa,
            power,
            opts.drift_samples,
        )
        .ok();
        let record = IterateRecord {
            iteration: k,
            objective,
            half_step_objective: full_objective(bundle, &w, &prev.s),
            clutter_objective: clutter_form(&bundle.clutter_ops, &w, &s),
            capon_residual: sol.capon_residual,
            receive_capon_residual: (w.dotc(&bundle.steer(&prev.s)) - c(kappa)).norm(),
            power: sol.power,
            multiplier: sol.multiplier,
            kkt_residual: sol.kkt_residual,
            step_w: (&w - &prev.w).norm(),
            step_s: (&s - &prev.s).norm(),
            drift,
            rescaled: rescaled(&w, &s).map_err(|e| Error::at_iteration(k, e))?,
            certificate: sol.certificate,
            w,
            s,
        };
        let change = (record.objective - prev.objective).abs();
        let stop = opts.obj_tol > 0.0 && change <= opts.obj_tol * prev.objective.abs();
        records.push(record);
        if stop {
            converged = true;
            break;
        }
    }

    let trace = IterateTrace {
        solver,
        mode: opts.mode,
        rescaled: opts.rescale,
        seed: cfg.seed,
        kappa,
        power,
        records,
    };
    Ok(summarize(trace, converged))
}

fn summarize(trace: IterateTrace, converged: bool) -> RunReport {
    let seq = trace.half_step_sequence();
    let monotonicity_violations = seq
        .windows(2)
        .filter(|p| p[1] > p[0] + MONOTONE_SLACK * p[0].abs())
        .count();
    let ws: Vec<CVector> = trace.records.iter().map(|r| r.w.clone()).collect();
    let ss: Vec<CVector> = trace.records.iter().map(|r| r.s.clone()).collect();
    let max_constraint_drift = trace
        .records
        .iter()
        .filter_map(|r| r.drift)
        .fold(None, |acc: Option<f64>, d| Some(acc.map_or(d, |a| a.max(d))));
    let last = trace.last();
    let stationary = trace.records.len() > 1
        && last.kkt_residual <= STATIONARY_TOL
        && last.step_w <= STATIONARY_TOL
        && last.step_s <= STATIONARY_TOL;
    RunReport {
        converged,
        stationary,
        final_objective: last.objective,
        monotonicity_violations,
        hull_diameter_w: hull_diameter(&ws),
        hull_diameter_s: hull_diameter(&ss),
        max_constraint_drift,
        trace,
    }
}

/// Diameter of the convex hull of `points`, i.e. the largest pairwise
/// distance.
pub fn hull_diameter(points: &[CVector]) -> f64 {
    let mut best = 0.0_f64;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            best = best.max((a - b).norm());
        }
    }
    best
}

/// The waveform feasible set `{s : sᴴ y = κ, ‖s‖² ≤ P_o}` as a disk in the
/// hyperplane: centre `κ y / ‖y‖²`, radius `√(P_o − κ²/‖y‖²)`.
struct CaponDisk {
    y: CVector,
    y_norm2: f64,
    kappa: f64,
    center: CVector,
    radius: f64,
}

impl CaponDisk {
    fn new(y: &CVector, kappa: f64, power: f64) -> Result<Self> {
        let problem = WaveformProblem::new(CMatrix::zeros(y.len(), y.len()), y.clone(), kappa, power)?;
        problem.check_feasible()?;
        Ok(Self {
            y: y.clone(),
            y_norm2: problem.steering_norm2(),
            kappa,
            center: problem.capon_point(),
            radius: problem.slack_radius2().max(0.0).sqrt(),
        })
    }

    /// Exact Euclidean projection: onto the hyperplane, then radially onto
    /// the disk (the two displacements are orthogonal).
    fn project(&self, p: &CVector) -> CVector {
        let shift = (c(self.kappa) - self.y.dotc(p)) / c(self.y_norm2);
        let on_plane = p + &self.y * shift;
        let offset = &on_plane - &self.center;
        let len = offset.norm();
        if len <= self.radius {
            on_plane
        } else {
            &self.center + offset.scale(self.radius / len)
        }
    }

    fn distance(&self, p: &CVector) -> f64 {
        (p - self.project(p)).norm()
    }

    /// Centre plus `count` seeded points on the boundary circle.
    fn samples(&self, count: usize) -> Result<Vec<CVector>> {
        let basis = complement_basis(&self.y)?;
        let mut rng = ChaCha8Rng::seed_from_u64(DRIFT_SEED);
        let mut out = vec![self.center.clone()];
        if basis.ncols() == 0 {
            return Ok(out);
        }
        for _ in 0..count {
            let z = CVector::from_fn(basis.ncols(), |_, _| {
                Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
            });
            let dir = &basis * z;
            out.push(&self.center + dir.scale(self.radius / dir.norm()));
        }
        Ok(out)
    }
}

/// Sampled estimate of the Hausdorff distance between the waveform feasible
/// sets for steering vectors `y_prev` and `y_curr`. The distance to a convex
/// set is convex, so its maximum over a disk sits on the boundary; the
/// estimate samples the boundary circles plus the centres.
pub fn constraint_set_drift(
    y_prev: &CVector,
    y_curr: &CVector,
    kappa: f64,
    power: f64,
    samples: usize,
) -> Result<f64> {
    let a = CaponDisk::new(y_prev, kappa, power)?;
    let b = CaponDisk::new(y_curr, kappa, power)?;
    let one_way = |from: &CaponDisk, to: &CaponDisk| -> Result<f64> {
        Ok(from
            .samples(samples)?
            .iter()
            .map(|p| to.distance(p))
            .fold(0.0_f64, f64::max))
    };
    Ok(one_way(&a, &b)?.max(one_way(&b, &a)?))
}

/// Replays every step of a trace from its recorded waveform and checks that
/// `w_k = MVDR(s_{k-1})` and `s_k = solver(w_k)` hold to `1e-12` relative.
pub fn functional_relation_check(trace: &IterateTrace, bundle: &CovarianceBundle) -> bool {
    let close = |a: &CVector, b: &CVector| (a - b).norm() <= 1e-12 * (1.0 + b.norm());
    let Some(first) = trace.records.first() else {
        return false;
    };
    match mvdr_for(bundle, &first.s, trace.kappa) {
        Ok(w0) if close(&w0, &first.w) => {}
        _ => return false,
    }
    trace.records.windows(2).all(|pair| {
        match am_step(bundle, &pair[0].s, trace.kappa, trace.power, trace.solver, trace.mode) {
            Ok((w, sol)) => close(&w, &pair[1].w) && close(&sol.s, &pair[1].s),
            Err(_) => false,
        }
    })
}
