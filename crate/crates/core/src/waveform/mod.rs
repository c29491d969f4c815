//! Waveform half-step of the alternating minimization.
//!
//! For a fixed receive filter `w` the waveform subproblem is
//!
//! ```text
//! min_s  sᴴ F0 s   s.t.  sᴴ y = κ,  ‖s‖² ≤ P_o,        y = Gᴴ w
//! ```
//!
//! Writing `s = κ y / ‖y‖² + P⊥ q` removes the linear constraint and leaves a
//! trust-region style problem in `q`. Four solvers are provided and agree to
//! numerical precision:
//!
//! * [`direct_update`]: closed form `κ F⁻¹ y / (yᴴ F⁻¹ y)` with `F = F0 + λI`
//!   and a bisection on `λ`;
//! * [`qcqp_solve`]: the projected problem with a pseudoinverse and a secular
//!   equation in `γ`;
//! * [`sdp_dual_solve`]: maximization of the concave Lagrange dual in `α`,
//!   returning a duality certificate;
//! * [`cls_solve`]: least squares on a hyperellipsoid via the SVD.
//!
//! All three multipliers are the same Lagrange multiplier of the power
//! constraint, so the returned `multiplier` is comparable across solvers.

mod cls;
mod direct;
mod qcqp;
mod scaling;
mod sdp;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, complement_projector, quad_form, tol, CMatrix, CVector};

pub use cls::{cls_solve, ls_operator};
pub use direct::direct_update;
pub use qcqp::{qcqp_solve, secular_residual};
pub use scaling::{scale_solution, scale_to_power_if_needed};
pub use sdp::{dual_function, sdp_certificate, sdp_dual_solve, DualCertificate};

/// Transmit code, length `N`.
pub type Waveform = CVector;

/// Relative slack below which the power budget counts as exactly met by the
/// Capon point alone (`P_o = κ² / ‖y‖²`).
const DEGENERATE_RADIUS: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    AmDirect,
    Qcqp,
    Sdp,
    Cls,
}

impl SolverKind {
    pub const ALL: [SolverKind; 4] = [
        SolverKind::AmDirect,
        SolverKind::Qcqp,
        SolverKind::Sdp,
        SolverKind::Cls,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::AmDirect => "am-direct",
            SolverKind::Qcqp => "qcqp",
            SolverKind::Sdp => "sdp",
            SolverKind::Cls => "cls",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SolverKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                Error::validation("solver", format!("unknown solver `{s}` (am-direct, qcqp, sdp, cls)"))
            })
    }
}

/// How the power-constraint multiplier is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MultiplierMode {
    /// Smallest nonnegative multiplier that meets the power bound.
    #[default]
    Root,
    /// Multiplier pinned to zero; the power bound is ignored.
    Zero,
}

impl MultiplierMode {
    pub fn name(self) -> &'static str {
        match self {
            MultiplierMode::Root => "root",
            MultiplierMode::Zero => "zero",
        }
    }
}

impl fmt::Display for MultiplierMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MultiplierMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "root" => Ok(MultiplierMode::Root),
            "zero" => Ok(MultiplierMode::Zero),
            _ => Err(Error::validation("lambda-mode", format!("unknown mode `{s}` (root, zero)"))),
        }
    }
}

/// One instance of the waveform subproblem.
#[derive(Debug, Clone)]
pub struct WaveformProblem {
    /// `F0(w) = Σ_q A_qᴴ w wᴴ A_q`.
    pub hessian: CMatrix,
    /// `y_w = Gᴴ w`.
    pub steering: CVector,
    pub kappa: f64,
    pub power: f64,
}

impl WaveformProblem {
    pub fn new(hessian: CMatrix, steering: CVector, kappa: f64, power: f64) -> Result<Self> {
        let n = steering.len();
        if hessian.shape() != (n, n) {
            return Err(Error::Dimension(format!(
                "hessian is {}x{}, steering has length {n}",
                hessian.nrows(),
                hessian.ncols()
            )));
        }
        if steering.norm() <= tol::ZERO {
            return Err(Error::ZeroSteering);
        }
        Ok(Self {
            hessian,
            steering,
            kappa,
            power,
        })
    }

    /// Builds the subproblem for receive filter `w`.
    pub fn from_receiver(
        hessian: CMatrix,
        target_map: &CMatrix,
        w: &CVector,
        kappa: f64,
        power: f64,
    ) -> Result<Self> {
        Self::new(hessian, target_map.ad_mul(w), kappa, power)
    }

    pub fn dim(&self) -> usize {
        self.steering.len()
    }

    pub fn steering_norm2(&self) -> f64 {
        self.steering.norm_squared()
    }

    /// `κ y / ‖y‖²`: the minimum-norm point satisfying the Capon constraint.
    pub fn capon_point(&self) -> CVector {
        self.steering.scale(self.kappa / self.steering_norm2())
    }

    /// Power left for the component orthogonal to `y`: `P_o − κ² / ‖y‖²`.
    pub fn slack_radius2(&self) -> f64 {
        self.power - self.kappa * self.kappa / self.steering_norm2()
    }

    pub fn check_feasible(&self) -> Result<()> {
        let minimum = self.kappa * self.kappa / self.steering_norm2();
        if self.power < minimum * (1.0 - 1e-12) {
            return Err(Error::Infeasible {
                power: self.power,
                minimum,
            });
        }
        Ok(())
    }

    /// True when the feasible set collapses to the Capon point.
    pub(crate) fn is_degenerate(&self) -> bool {
        self.slack_radius2() <= DEGENERATE_RADIUS * self.power
    }

    /// Objective `sᴴ F0 s` of the full waveform.
    pub fn objective(&self, s: &CVector) -> f64 {
        quad_form(&self.hessian, s)
    }

    pub(crate) fn projected(&self) -> Result<Projected> {
        Projected::new(self)
    }
}

/// Quantities of the problem restricted to the complement of `y`.
#[derive(Debug, Clone)]
pub(crate) struct Projected {
    /// `P⊥ = I − y yᴴ / ‖y‖²`.
    pub perp: CMatrix,
    /// `B(0) = P⊥ F0 P⊥`.
    pub curvature: CMatrix,
    /// `b = P⊥ F0 y`.
    pub linear: CVector,
    /// `κ / ‖y‖²`.
    pub coef: f64,
    /// `P_o − κ² / ‖y‖²`.
    pub radius2: f64,
}

impl Projected {
    fn new(p: &WaveformProblem) -> Result<Self> {
        let perp = complement_projector(&p.steering)?;
        let curvature = &perp * &p.hessian * &perp;
        let linear = &perp * (&p.hessian * &p.steering);
        Ok(Self {
            perp,
            curvature,
            linear,
            coef: p.kappa / p.steering_norm2(),
            radius2: p.slack_radius2(),
        })
    }

    /// `B(γ) = P⊥ F0 P⊥ + γ P⊥`.
    pub fn shifted(&self, gamma: f64) -> CMatrix {
        &self.curvature + self.perp.scale(gamma)
    }

    /// Projected objective `qᴴ B(0) q + 2 (κ/‖y‖²) Re{qᴴ b}`, without the
    /// constant `(κ²/‖y‖⁴) yᴴ F0 y`.
    #[cfg(test)]
    pub fn reduced_objective(&self, q: &CVector) -> f64 {
        quad_form(&self.curvature, q) + 2.0 * self.coef * q.dotc(&self.linear).re
    }
}

/// The constant dropped when passing to the projected objective.
pub fn dropped_constant(p: &WaveformProblem) -> f64 {
    let coef = p.kappa / p.steering_norm2();
    coef * coef * quad_form(&p.hessian, &p.steering)
}

/// Output of any waveform solver.
#[derive(Debug, Clone)]
pub struct WaveformSolution {
    pub kind: SolverKind,
    pub mode: MultiplierMode,
    pub s: Waveform,
    /// Power-constraint multiplier (`λ`, `γ` or `α` depending on `kind`).
    pub multiplier: f64,
    /// `sᴴ F0 s`.
    pub objective: f64,
    /// `|sᴴ y − κ|`.
    pub capon_residual: f64,
    /// `‖s‖²`.
    pub power: f64,
    /// Relative stationarity residual combined with complementary slackness.
    pub kkt_residual: f64,
    pub certificate: Option<DualCertificate>,
}

impl WaveformSolution {
    pub(crate) fn assemble(
        problem: &WaveformProblem,
        kind: SolverKind,
        mode: MultiplierMode,
        s: CVector,
        multiplier: f64,
    ) -> Self {
        let objective = problem.objective(&s);
        let capon_residual = (s.dotc(&problem.steering) - c(problem.kappa)).norm();
        let power = s.norm_squared();
        let kkt_residual = kkt_residual(problem, &s, multiplier);
        Self {
            kind,
            mode,
            s,
            multiplier,
            objective,
            capon_residual,
            power,
            kkt_residual,
            certificate: None,
        }
    }

    /// `multiplier · (P_o − ‖s‖²)`.
    pub fn complementarity(&self, power_budget: f64) -> f64 {
        self.multiplier * (power_budget - self.power)
    }
}

/// Stationarity `(F0 + λI) s ∥ y` measured relative to the size of its
/// terms, maxed with the relative complementary slackness `|λ (P_o − ‖s‖²)| / P_o`.
pub fn kkt_residual(problem: &WaveformProblem, s: &CVector, multiplier: f64) -> f64 {
    let y = &problem.steering;
    let grad = &problem.hessian * s + s.scale(multiplier);
    let mu = y.dotc(&grad) / c(problem.steering_norm2());
    let residual = (&grad - y * mu).norm();
    let scale = problem.hessian.norm() * s.norm() + multiplier * s.norm();
    let stationarity = if scale > 0.0 { residual / scale } else { residual };
    let slack = (multiplier * (problem.power - s.norm_squared())).abs() / problem.power;
    stationarity.max(slack)
}

/// Rotates `s` by a unit phase so that `sᴴ y` is real and positive.
pub fn align_phase(s: &CVector, y: &CVector) -> CVector {
    let inner = s.dotc(y);
    if inner.norm() == 0.0 {
        return s.clone();
    }
    // (s e^{iθ})ᴴ y = e^{-iθ} sᴴ y, so rotate by the phase of sᴴ y.
    let phase = Complex64::from_polar(1.0, inner.arg());
    s * phase
}

/// Dispatches to the solver selected by `kind`.
pub fn solve(kind: SolverKind, problem: &WaveformProblem, mode: MultiplierMode) -> Result<WaveformSolution> {
    match kind {
        SolverKind::AmDirect => direct_update(problem, mode),
        SolverKind::Qcqp => qcqp_solve(problem, mode),
        SolverKind::Sdp => sdp_dual_solve(problem, mode),
        SolverKind::Cls => cls_solve(problem, mode),
    }
}


#[cfg(test)]
mod tests {
    use super::testutil::*;
    use super::*;
    use crate::linalg::testutil::*;
    use crate::linalg::max_abs;
    use proptest::prelude::*;

    fn all_root(p: &WaveformProblem) -> Vec<WaveformSolution> {
        SolverKind::ALL
            .iter()
            .map(|&k| solve(k, p, MultiplierMode::Root).unwrap())
            .collect()
    }

    #[test]
    fn names_round_trip() {
        for k in SolverKind::ALL {
            assert_eq!(k.name().parse::<SolverKind>().unwrap(), k);
        }
        assert!("newton".parse::<SolverKind>().is_err());
        assert_eq!("zero".parse::<MultiplierMode>().unwrap(), MultiplierMode::Zero);
    }

    #[test]
    fn problem_rejects_zero_steering_and_bad_shapes() {
        assert!(matches!(
            WaveformProblem::new(CMatrix::identity(3, 3), CVector::zeros(3), 1.0, 1.0),
            Err(Error::ZeroSteering)
        ));
        assert!(matches!(
            WaveformProblem::new(CMatrix::identity(2, 2), CVector::zeros(3), 1.0, 1.0),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn all_solvers_report_infeasible() {
        let mut p = random_problem(31, 6, 6, 2.0);
        p.power = 0.5 / p.steering_norm2();
        for k in SolverKind::ALL {
            assert!(
                matches!(solve(k, &p, MultiplierMode::Root), Err(Error::Infeasible { .. })),
                "{k}"
            );
        }
    }

    #[test]
    fn align_phase_makes_inner_product_positive() {
        let mut r = rng(32);
        let s = random_vector(&mut r, 5);
        let y = random_vector(&mut r, 5);
        let a = align_phase(&s, &y);
        let inner = a.dotc(&y);
        assert!(inner.im.abs() < 1e-13 * inner.norm());
        assert!(inner.re > 0.0);
        assert!((a.norm() - s.norm()).abs() < 1e-14);
    }

    #[test]
    fn dropped_constant_restores_full_objective() {
        let p = random_problem(33, 8, 8, 3.0);
        let proj = p.projected().unwrap();
        let mut r = rng(34);
        let q = &proj.perp * random_vector(&mut r, 8);
        let s = &q + p.capon_point();
        let full = p.objective(&s);
        let split = proj.reduced_objective(&q) + dropped_constant(&p);
        assert!((full - split).abs() <= 1e-12 * full.abs().max(1.0));
    }

    #[test]
    fn multipliers_coincide_across_solvers() {
        let p = tight_problem(35, 8);
        let sols = all_root(&p);
        let reference = sols[0].multiplier;
        assert!(reference > 0.0);
        for s in &sols {
            assert!(
                (s.multiplier - reference).abs() <= 1e-6 * reference,
                "{}: {} vs {}",
                s.kind,
                s.multiplier,
                reference
            );
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        /// Four-way equivalence on random PSD instances, including
        /// rank-deficient Hessians.
        #[test]
        fn solvers_agree(seed in any::<u64>(), rank in 1usize..=8, power_hi in 1.0f64..6.0) {
            let p = random_problem(seed, 8, rank, power_hi);
            prop_assume!(p.slack_radius2() > 1e-6 * p.power);
            let sols = all_root(&p);
            let y = &p.steering;
            let base = &sols[0];
            for s in &sols {
                prop_assert!(s.capon_residual <= 1e-8, "{} capon {}", s.kind, s.capon_residual);
                prop_assert!(s.power <= p.power + 1e-8);
                prop_assert!(s.complementarity(p.power).abs() <= 1e-6 * p.power);
                prop_assert!(s.multiplier >= 0.0);
                let rel = (s.objective - base.objective).abs() / base.objective.abs().max(1e-300);
                prop_assert!(rel <= 1e-6 || (s.objective - base.objective).abs() <= 1e-12 * max_abs(&p.hessian),
                    "{} objective {} vs {}", s.kind, s.objective, base.objective);
                let diff = (align_phase(&s.s, y) - align_phase(&base.s, y)).norm();
                prop_assert!(diff <= 1e-5 * base.s.norm().max(1.0), "{} waveform diff {}", s.kind, diff);
            }
        }
    }
}
