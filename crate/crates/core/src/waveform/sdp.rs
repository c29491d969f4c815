//! Lagrange dual of the projected problem and its duality certificate.
//!
//! The dual function for multiplier `α ≥ 0` is
//!
//! ```text
//! g(α) = α (κ²/‖y‖² − P_o) − (κ²/‖y‖⁴) bᴴ B(α)⁺ b
//! ```
//!
//! (and `−∞` when `b` leaves the range of `B(α)`). It is concave, and its
//! derivative equals the secular function of the projected problem, so the
//! maximizer is also the QCQP multiplier. The primal point is recovered from
//! the lifted rank-one matrix `[q qᴴ, q; qᴴ, 1]`.

use serde::{Deserialize, Serialize};

use super::qcqp::{excess, projected_step};
use super::{MultiplierMode, Projected, SolverKind, WaveformProblem, WaveformSolution};
use crate::error::{Error, Result};
use crate::linalg::{bisect_root, hermitian_eigen, pseudo_inverse, tol, CMatrix, CVector};

/// Duality certificate for a waveform solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualCertificate {
    /// Dual multiplier of the power constraint.
    pub alpha: f64,
    /// Epigraph variable `−(κ²/‖y‖⁴) bᴴ B(α)⁺ b`.
    pub beta: f64,
    /// `g(α)`.
    pub dual_value: f64,
    /// Lifted primal objective `Tr(Q M)`.
    pub primal_value: f64,
    /// `primal_value − dual_value`; nonnegative up to rounding.
    pub gap: f64,
    /// Ratio of the second to the largest eigenvalue of the lifted matrix.
    pub rank1_residual: f64,
    /// Whether the lifted matrix is PSD within tolerance.
    pub lifted_psd: bool,
}

struct DualTerms {
    value: f64,
    beta: f64,
}

fn dual_terms(proj: &Projected, alpha: f64) -> Result<DualTerms> {
    let shifted = proj.shifted(alpha);
    let pinv = pseudo_inverse(&shifted)?;
    let x = &pinv * &proj.linear;
    // b must lie in range(B(α)); otherwise the inner minimum is unbounded.
    let back = &shifted * &x - &proj.linear;
    if back.norm() > tol::MOORE_PENROSE * proj.linear.norm().max(f64::MIN_POSITIVE) {
        return Ok(DualTerms {
            value: f64::NEG_INFINITY,
            beta: f64::NEG_INFINITY,
        });
    }
    let beta = -proj.coef * proj.coef * proj.linear.dotc(&x).re;
    Ok(DualTerms {
        value: -alpha * proj.radius2 + beta,
        beta,
    })
}

/// `g(α)`, the Lagrange dual of the projected waveform problem.
pub fn dual_function(problem: &WaveformProblem, alpha: f64) -> Result<f64> {
    Ok(dual_terms(&problem.projected()?, alpha)?.value)
}

/// `g'(α) = ‖P⊥ q(α)‖² − r²`, the secular function of the projected problem.
fn dual_slope(proj: &Projected, alpha: f64) -> f64 {
    excess(proj, alpha)
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for the maximizer of `g` on `[lo, hi]`, stopped at
/// a relative width of `1e-12`.
fn golden_max(proj: &Projected, mut lo: f64, mut hi: f64) -> f64 {
    let g = |a: f64| dual_terms(proj, a).map_or(f64::NAN, |t| t.value);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let (mut g1, mut g2) = (g(x1), g(x2));
    while hi - lo > 1e-12 * hi.max(1.0) {
        if g1 < g2 {
            lo = x1;
            x1 = x2;
            g1 = g2;
            x2 = lo + INV_PHI * (hi - lo);
            g2 = g(x2);
        } else {
            hi = x2;
            x2 = x1;
            g2 = g1;
            x1 = hi - INV_PHI * (hi - lo);
            g1 = g(x1);
        }
    }
    0.5 * (lo + hi)
}

/// Maximizes the dual, then recovers the primal waveform from the rank-one
/// lifted solution. The returned solution always carries a certificate.
///
/// The maximizer is bracketed by doubling until `g'` turns nonpositive,
/// located by golden-section search on `g`, and polished by bisection on the
/// sign of `g'` (golden section alone cannot resolve the flat top of `g`
/// below about `√ε` relative accuracy).
pub fn sdp_dual_solve(problem: &WaveformProblem, mode: MultiplierMode) -> Result<WaveformSolution> {
    let proj = problem.projected()?;
    let finish = |s: CVector, alpha: f64| -> Result<WaveformSolution> {
        let mut sol = WaveformSolution::assemble(problem, SolverKind::Sdp, mode, s, alpha);
        sol.certificate = Some(sdp_certificate(problem, &sol)?);
        Ok(sol)
    };
    let build = |alpha: f64| -> Result<CVector> {
        Ok(&proj.perp * projected_step(&proj, alpha)? + problem.capon_point())
    };

    if mode == MultiplierMode::Zero {
        return finish(build(0.0)?, 0.0);
    }
    problem.check_feasible()?;
    if problem.is_degenerate() {
        return finish(problem.capon_point(), 0.0);
    }
    if dual_slope(&proj, 0.0) <= 0.0 {
        return finish(build(0.0)?, 0.0);
    }

    let mut hi = 1.0;
    let mut doublings = 0;
    while dual_slope(&proj, hi) > 0.0 {
        if doublings == tol::MAX_DOUBLINGS {
            return Err(Error::NoSignChange { lo: 0.0, hi });
        }
        hi *= 2.0;
        doublings += 1;
    }
    let center = golden_max(&proj, 0.0, hi);
    let (lo, hi) = if dual_slope(&proj, center) > 0.0 {
        (center, hi)
    } else {
        (0.0, center)
    };
    let alpha = bisect_root(|a| dual_slope(&proj, a), lo, hi, 0.0)?;
    finish(build(alpha)?, alpha)
}

/// Lifted-matrix certificate for any waveform solution of `problem`.
///
/// The component `q = s − κ y / ‖y‖²` is lifted to `Q = [q qᴴ, q; qᴴ, 1]`,
/// and the primal value `Tr(Q M)` with `M = [B(0), (κ/‖y‖²) b; ·, 0]` is
/// compared against `g(multiplier)`.
pub fn sdp_certificate(problem: &WaveformProblem, solution: &WaveformSolution) -> Result<DualCertificate> {
    let proj = problem.projected()?;
    let n = problem.dim();
    let q = &solution.s - problem.capon_point();

    let mut lifted = CMatrix::zeros(n + 1, n + 1);
    lifted.view_mut((0, 0), (n, n)).copy_from(&(&q * q.adjoint()));
    lifted.view_mut((0, n), (n, 1)).copy_from(&q);
    lifted.view_mut((n, 0), (1, n)).copy_from(&q.adjoint());
    lifted[(n, n)] = crate::linalg::c(1.0);

    let mut cost = CMatrix::zeros(n + 1, n + 1);
    cost.view_mut((0, 0), (n, n)).copy_from(&proj.curvature);
    let half = proj.linear.scale(proj.coef);
    cost.view_mut((0, n), (n, 1)).copy_from(&half);
    cost.view_mut((n, 0), (1, n)).copy_from(&half.adjoint());
    let primal_value = (&lifted * &cost).trace().re;

    let (values, _) = hermitian_eigen(&lifted);
    let top = values[n];
    let floor = tol::PSD * top;
    let lifted_psd = values[0] >= -floor;
    let second = if values[n - 1] < floor { 0.0 } else { values[n - 1] };
    let rank1_residual = second / top;

    let terms = dual_terms(&proj, solution.multiplier)?;
    Ok(DualCertificate {
        alpha: solution.multiplier,
        beta: terms.beta,
        dual_value: terms.value,
        primal_value,
        gap: primal_value - terms.value,
        rank1_residual,
        lifted_psd,
    })
}
