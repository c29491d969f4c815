//! Waveform subproblem as least squares on a hyperellipsoid.
//!
//! With `S = F0^{1/2}`, `C = S P⊥` and `d = −(κ/‖y‖²) S y` the projected
//! objective equals `‖C q − d‖² − ‖d‖²`, so the subproblem is
//! `min ‖C q − d‖²` over `‖P⊥ q‖² ≤ r²`. It is solved on an orthonormal basis
//! `U` of the complement of `y`, where the constraint is a plain ball.

use super::{MultiplierMode, SolverKind, WaveformProblem, WaveformSolution};
use crate::error::Result;
use crate::linalg::{bisect_root, c, complement_basis, hermitian_sqrt, svd, tol, CMatrix, CVector};

/// `(C, d)` with `C = F0^{1/2} P⊥` and `d = −(κ/‖y‖²) F0^{1/2} y`.
pub fn ls_operator(problem: &WaveformProblem) -> Result<(CMatrix, CVector)> {
    let root = hermitian_sqrt(&problem.hessian)?;
    let proj = problem.projected()?;
    let op = &root * &proj.perp;
    let target = (&root * &problem.steering).scale(-proj.coef);
    Ok((op, target))
}

/// Solves the constrained least squares problem through the SVD of the
/// operator restricted to the complement basis. The multiplier is the
/// Tikhonov weight `α` of the ball constraint.
pub fn cls_solve(problem: &WaveformProblem, mode: MultiplierMode) -> Result<WaveformSolution> {
    let done = |s: CVector, alpha: f64| {
        WaveformSolution::assemble(problem, SolverKind::Cls, mode, s, alpha)
    };
    if mode == MultiplierMode::Root {
        problem.check_feasible()?;
        if problem.is_degenerate() {
            return Ok(done(problem.capon_point(), 0.0));
        }
    }

    let (op, target) = ls_operator(problem)?;
    let basis = complement_basis(&problem.steering)?;
    let dec = svd(&(&op * &basis))?;
    let (u, v, sigma) = (dec.u, dec.v, dec.singular_values);
    let top = sigma.iter().fold(0.0_f64, |a, &s| a.max(s));
    let proj_target = u.ad_mul(&target);
    // σ² are eigenvalues of the projected curvature, so rank is decided on
    // σ² to agree with the pseudoinverse used by the projected solvers.
    let keep: Vec<usize> = (0..sigma.len())
        .filter(|&i| sigma[i] * sigma[i] > tol::RANK * top * top)
        .collect();

    // x(α) = V diag(σ / (σ² + α)) Uᴴ d, in basis coordinates.
    let coords = |alpha: f64| {
        let mut z = CVector::zeros(v.ncols());
        for &i in &keep {
            z[i] = proj_target[i] * c(sigma[i] / (sigma[i] * sigma[i] + alpha));
        }
        &v * z
    };
    let excess = |alpha: f64| {
        keep.iter()
            .map(|&i| {
                let s2 = sigma[i] * sigma[i];
                s2 * proj_target[i].norm_sqr() / ((s2 + alpha) * (s2 + alpha))
            })
            .sum::<f64>()
            - problem.slack_radius2()
    };
    let build = |alpha: f64| &basis * coords(alpha) + problem.capon_point();

    if mode == MultiplierMode::Zero || excess(0.0) <= 0.0 {
        return Ok(done(build(0.0), 0.0));
    }
    let alpha = bisect_root(excess, 0.0, 1.0, 0.0)?;
    Ok(done(build(alpha), alpha))
}
