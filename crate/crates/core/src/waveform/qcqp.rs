//! Waveform subproblem in projected (QCQP) form.
//!
//! With `s = κ y / ‖y‖² + P⊥ q` the problem becomes
//! `min_q qᴴ B q + 2 (κ/‖y‖²) Re{qᴴ b}` subject to `‖P⊥ q‖² ≤ r²`, whose
//! solution is `q(γ) = −(κ/‖y‖²) B(γ)⁺ b` with `B(γ) = P⊥ F0 P⊥ + γ P⊥`.

use super::{MultiplierMode, Projected, SolverKind, WaveformProblem, WaveformSolution};
use crate::error::Result;
use crate::linalg::{bisect_root, pseudo_inverse, CVector};

pub(crate) fn projected_step(proj: &Projected, gamma: f64) -> Result<CVector> {
    let pinv = pseudo_inverse(&proj.shifted(gamma))?;
    Ok((&pinv * &proj.linear).scale(-proj.coef))
}

/// `φ(γ)`; NaN if the decomposition fails, which bisection reports.
pub(crate) fn excess(proj: &Projected, gamma: f64) -> f64 {
    projected_step(proj, gamma).map_or(f64::NAN, |q| (&proj.perp * q).norm_squared() - proj.radius2)
}

/// Secular function `φ(γ) = ‖P⊥ q(γ)‖² − r²`; nonincreasing for `γ ≥ 0`.
pub fn secular_residual(problem: &WaveformProblem, gamma: f64) -> Result<f64> {
    Ok(excess(&problem.projected()?, gamma))
}

/// Solves the projected problem. The multiplier `γ` is zero when
/// `φ(0) ≤ 0`, otherwise the root of `φ` found by bisection.
pub fn qcqp_solve(problem: &WaveformProblem, mode: MultiplierMode) -> Result<WaveformSolution> {
    let done = |s: CVector, gamma: f64| {
        WaveformSolution::assemble(problem, SolverKind::Qcqp, mode, s, gamma)
    };
    let proj = problem.projected()?;
    let build = |gamma: f64| -> Result<CVector> {
        Ok(&proj.perp * projected_step(&proj, gamma)? + problem.capon_point())
    };

    if mode == MultiplierMode::Zero {
        return Ok(done(build(0.0)?, 0.0));
    }
    problem.check_feasible()?;
    if problem.is_degenerate() {
        return Ok(done(problem.capon_point(), 0.0));
    }
    if excess(&proj, 0.0) <= 0.0 {
        return Ok(done(build(0.0)?, 0.0));
    }
    let gamma = bisect_root(|g| excess(&proj, g), 0.0, 1.0, 0.0)?;
    Ok(done(build(gamma)?, gamma))
}
