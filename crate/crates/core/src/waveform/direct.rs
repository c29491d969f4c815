//! Closed-form waveform update with a bisected power multiplier.

use nalgebra::Cholesky;

use super::{MultiplierMode, SolverKind, WaveformProblem, WaveformSolution};
use crate::error::{Error, Result};
use crate::linalg::{bisect_root, c, hermitian_eigen, tol, CMatrix, CVector};

/// `κ (F0 + λI)⁻¹ y / (yᴴ (F0 + λI)⁻¹ y)`, or `None` when the shifted
/// Hessian is numerically singular.
fn shifted_update(problem: &WaveformProblem, lambda: f64) -> Option<CVector> {
    let n = problem.dim();
    let shifted = &problem.hessian + CMatrix::identity(n, n).scale(lambda);
    let x = Cholesky::new(shifted)?.solve(&problem.steering);
    let gain = problem.steering.dotc(&x).re;
    if !(gain.is_finite() && gain > 0.0) {
        return None;
    }
    Some(x.scale(problem.kappa / gain))
}

/// Eigen-based view of the Hessian used to detect singularity and to take
/// the `λ → 0⁺` limit.
struct Spectrum {
    values: Vec<f64>,
    vectors: CMatrix,
    /// Eigenvalues at or below this count as zero.
    floor: f64,
}

impl Spectrum {
    fn new(hessian: &CMatrix) -> Self {
        let (values, vectors) = hermitian_eigen(hessian);
        let top = values.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        Self {
            values: values.iter().copied().collect(),
            vectors,
            floor: tol::RANK * top,
        }
    }

    fn is_singular(&self) -> bool {
        self.values.iter().any(|&v| v <= self.floor)
    }

    /// `lim_{λ→0⁺} s(λ)`. If `y` has a component in the null space the limit
    /// is the minimum-norm zero-objective point `κ P_Z y / ‖P_Z y‖²`;
    /// otherwise it is the pseudoinverse form `κ F0⁺ y / (yᴴ F0⁺ y)`.
    fn zero_limit(&self, problem: &WaveformProblem) -> Result<CVector> {
        let y = &problem.steering;
        let coords = self.vectors.ad_mul(y);
        let null: Vec<usize> = (0..self.values.len())
            .filter(|&i| self.values[i] <= self.floor)
            .collect();
        let null_norm2: f64 = null.iter().map(|&i| coords[i].norm_sqr()).sum();
        let n = problem.dim();
        if null_norm2.sqrt() > 1e-10 * y.norm() {
            let mut s = CVector::zeros(n);
            for &i in &null {
                s += self.vectors.column(i) * coords[i];
            }
            return Ok(s.scale(problem.kappa / null_norm2));
        }
        let mut x = CVector::zeros(n);
        for (i, &v) in self.values.iter().enumerate() {
            if v > self.floor {
                x += self.vectors.column(i) * (coords[i] / c(v));
            }
        }
        let gain = y.dotc(&x).re;
        if !(gain.is_finite() && gain > 0.0) {
            return Err(Error::NumericalFailure("pseudoinverse gain is not positive".into()));
        }
        Ok(x.scale(problem.kappa / gain))
    }
}

/// The unconstrained minimizer on the Capon hyperplane, computed by the same
/// code path for both multiplier modes so their `λ = 0` iterates coincide.
fn unconstrained(problem: &WaveformProblem, spectrum: &Spectrum) -> Option<CVector> {
    if spectrum.is_singular() {
        return None;
    }
    shifted_update(problem, 0.0)
}

/// Waveform update `s(λ) = κ F(λ)⁻¹ y / (yᴴ F(λ)⁻¹ y)` with `F(λ) = F0 + λI`.
///
/// In [`MultiplierMode::Root`] the multiplier is zero when the unconstrained
/// update already meets the power bound, and otherwise the root of
/// `‖s(λ)‖² = P_o` found by bisection to machine precision (`‖s(λ)‖²` is
/// nonincreasing in `λ`). A singular `F0` uses the `λ → 0⁺` limit.
///
/// In [`MultiplierMode::Zero`] the power bound is ignored and a singular
/// `F0` is an error.
pub fn direct_update(problem: &WaveformProblem, mode: MultiplierMode) -> Result<WaveformSolution> {
    let spectrum = Spectrum::new(&problem.hessian);
    let done = |s: CVector, lambda: f64| {
        WaveformSolution::assemble(problem, SolverKind::AmDirect, mode, s, lambda)
    };

    if mode == MultiplierMode::Zero {
        let s = unconstrained(problem, &spectrum).ok_or(Error::SingularHessian)?;
        return Ok(done(s, 0.0));
    }

    problem.check_feasible()?;
    if problem.is_degenerate() {
        return Ok(done(problem.capon_point(), 0.0));
    }
    let at_zero = match unconstrained(problem, &spectrum) {
        Some(s) => s,
        None => spectrum.zero_limit(problem)?,
    };
    let excess0 = at_zero.norm_squared() - problem.power;
    if excess0 <= 0.0 {
        return Ok(done(at_zero, 0.0));
    }

    let excess = |lambda: f64| {
        if lambda == 0.0 {
            return excess0;
        }
        shifted_update(problem, lambda).map_or(f64::NAN, |s| s.norm_squared() - problem.power)
    };
    let lambda = bisect_root(excess, 0.0, 1.0, 0.0)?;
    let s = if lambda == 0.0 {
        at_zero
    } else {
        shifted_update(problem, lambda)
            .ok_or_else(|| Error::NumericalFailure(format!("F0 + {lambda} I is singular")))?
    };
    Ok(done(s, lambda))
}

#[cfg(test)]
mod tests {
    use super::super::testutil::*;
    use super::*;
    use crate::linalg::testutil::*;
    use crate::linalg::{complement_basis, quad_form};
    use proptest::prelude::*;

    fn e(n: usize, i: usize) -> CVector {
        let mut v = CVector::zeros(n);
        v[i] = c(1.0);
        v
    }

    #[test]
    fn identity_hessian_gives_scaled_steering() {
        let y = e(3, 0);
        let p = WaveformProblem::new(CMatrix::identity(3, 3), y.clone(), 1.0, 10.0).unwrap();
        let sol = direct_update(&p, MultiplierMode::Root).unwrap();
        assert_eq!(sol.multiplier, 0.0);
        assert!((&sol.s - &y).norm() < 1e-15);
    }

    #[test]
    fn diagonal_example_is_inverse_weighted() {
        let f0 = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.0), c(4.0)]));
        let y = CVector::from_vec(vec![c(1.0), c(1.0)]);
        let p = WaveformProblem::new(f0, y, 1.0, 10.0).unwrap();
        let sol = direct_update(&p, MultiplierMode::Root).unwrap();
        let want = CVector::from_vec(vec![c(0.8), c(0.2)]);
        assert!((&sol.s - want).norm() < 1e-14);
        assert_eq!(sol.multiplier, 0.0);
    }

    #[test]
    fn infeasible_budget() {
        let y = CVector::from_vec(vec![c(0.5), c(0.0)]);
        let p = WaveformProblem::new(CMatrix::identity(2, 2), y, 1.0, 1.0).unwrap();
        assert!(matches!(
            direct_update(&p, MultiplierMode::Root),
            Err(Error::Infeasible { .. })
        ));
    }

    #[test]
    fn zero_mode_rejects_singular_hessian() {
        let mut r = rng(41);
        let f0 = random_psd(&mut r, 5, 2);
        let p = WaveformProblem::new(f0, random_vector(&mut r, 5), 1.0, 1.0).unwrap();
        assert!(matches!(
            direct_update(&p, MultiplierMode::Zero),
            Err(Error::SingularHessian)
        ));
    }

    #[test]
    fn zero_mode_ignores_budget() {
        let p = tight_problem(42, 6);
        let sol = direct_update(&p, MultiplierMode::Zero).unwrap();
        assert_eq!(sol.multiplier, 0.0);
        assert!(sol.power > p.power);
        assert!(sol.capon_residual < 1e-12);
    }

    #[test]
    fn active_budget_is_met_to_machine_precision() {
        let p = tight_problem(43, 8);
        let sol = direct_update(&p, MultiplierMode::Root).unwrap();
        assert!(sol.multiplier > 0.0);
        assert!((sol.power - p.power).abs() <= 1e-12 * p.power);
        assert!(sol.kkt_residual < 1e-9, "{}", sol.kkt_residual);
    }

    /// `y` orthogonal to the null space: the limit is the pseudoinverse form.
    #[test]
    fn singular_hessian_with_steering_in_range() {
        let f0 = CMatrix::from_diagonal(&CVector::from_vec(vec![c(2.0), c(1.0), c(0.0)]));
        let y = CVector::from_vec(vec![c(1.0), c(1.0), c(0.0)]);
        let p = WaveformProblem::new(f0, y, 1.0, 10.0).unwrap();
        let sol = direct_update(&p, MultiplierMode::Root).unwrap();
        let want = CVector::from_vec(vec![c(1.0 / 3.0), c(2.0 / 3.0), c(0.0)]);
        assert!((&sol.s - want).norm() < 1e-13);
    }

    /// `y` touching the null space: zero objective at the min-norm point.
    #[test]
    fn singular_hessian_with_null_component() {
        let f0 = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.0), c(0.0)]));
        let y = CVector::from_vec(vec![c(1.0), c(2.0)]);
        let p = WaveformProblem::new(f0, y, 1.0, 10.0).unwrap();
        let sol = direct_update(&p, MultiplierMode::Root).unwrap();
        let want = CVector::from_vec(vec![c(0.0), c(0.5)]);
        assert!((&sol.s - want).norm() < 1e-14);
        assert!(sol.objective.abs() < 1e-14);
    }

    /// Dense scan of feasible waveforms on the Capon hyperplane: none beats
    /// the direct update.
    #[test]
    fn no_sampled_feasible_point_is_better() {
        let p = tight_problem(44, 4);
        let sol = direct_update(&p, MultiplierMode::Root).unwrap();
        let u = complement_basis(&p.steering).unwrap();
        let center = p.capon_point();
        let radius = p.slack_radius2().sqrt();
        let mut r = rng(45);
        for _ in 0..20_000 {
            let dir = &u * random_vector(&mut r, 3);
            let t: f64 = rand::Rng::random(&mut r);
            let s = &center + dir.scale(radius * t.sqrt() / dir.norm());
            assert!(quad_form(&p.hessian, &s) >= sol.objective - 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn power_is_nonincreasing_in_multiplier(seed in any::<u64>(), a in 0.0f64..10.0, d in 0.0f64..10.0) {
            let p = random_problem(seed, 6, 6, 2.0);
            let lo = shifted_update(&p, a).unwrap().norm_squared();
            let hi = shifted_update(&p, a + d).unwrap().norm_squared();
            prop_assert!(hi <= lo * (1.0 + 1e-10));
        }

        #[test]
        fn root_mode_satisfies_kkt(seed in any::<u64>()) {
            let p = random_problem(seed, 6, 6, 3.0);
            prop_assume!(!p.is_degenerate());
            let sol = direct_update(&p, MultiplierMode::Root).unwrap();
            prop_assert!(sol.capon_residual <= 1e-10);
            prop_assert!(sol.power <= p.power * (1.0 + 1e-12));
            prop_assert!(sol.multiplier >= 0.0);
            prop_assert!(sol.kkt_residual <= 1e-8, "kkt {}", sol.kkt_residual);
        }
    }
}
