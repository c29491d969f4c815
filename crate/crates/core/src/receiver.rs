//! Receive-filter half-step: the MVDR (Capon) weight for a fixed waveform.

use nalgebra::Cholesky;

use crate::error::{Error, Result};
use crate::linalg::{tol, CMatrix, CVector};
use crate::radar::CovarianceBundle;

/// Space-time receive filter, length `M * N * L`.
pub type WeightVector = CVector;

/// Solves `r x = b` for Hermitian positive definite `r`, falling back to
/// pivoted LU if the Cholesky factorization breaks down.
pub(crate) fn hermitian_solve(r: &CMatrix, b: &CVector) -> Option<CVector> {
    if let Some(chol) = Cholesky::new(r.clone()) {
        return Some(chol.solve(b));
    }
    r.clone().lu().solve(b)
}

/// `w = κ R_u⁻¹ G s / (sᴴ Gᴴ R_u⁻¹ G s)`, the minimum-output-power filter
/// subject to `wᴴ G s = κ`.
pub fn mvdr_update(
    total_cov: &CMatrix,
    target_map: &CMatrix,
    s: &CVector,
    kappa: f64,
) -> Result<WeightVector> {
    let steering = target_map * s;
    if steering.norm() <= tol::ZERO {
        return Err(Error::ZeroSteering);
    }
    let x = hermitian_solve(total_cov, &steering).ok_or(Error::SingularCovariance)?;
    let gain = steering.dotc(&x).re;
    if !(gain.is_finite() && gain > 0.0) {
        return Err(Error::SingularCovariance);
    }
    Ok(x.scale(kappa / gain))
}

/// MVDR weight against the scenario covariance `R_u(s)`.
pub fn mvdr_for(bundle: &CovarianceBundle, s: &CVector, kappa: f64) -> Result<WeightVector> {
    mvdr_update(&bundle.total_cov(s), &bundle.target_map, s, kappa)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::testutil::*;
    use crate::linalg::{c, complement_basis, quad_form};
    use num_complex::Complex64;

    fn identity_map(n: usize) -> CMatrix {
        CMatrix::identity(n, n)
    }

    fn random_pd(seed: u64, n: usize) -> CMatrix {
        let mut r = rng(seed);
        random_psd(&mut r, n, n) + CMatrix::identity(n, n).scale(0.1)
    }

    #[test]
    fn identity_covariance_examples() {
        let mut e1 = CVector::zeros(4);
        e1[0] = c(1.0);
        let w = mvdr_update(&identity_map(4), &identity_map(4), &e1, 1.0).unwrap();
        assert!((w - &e1).norm() < 1e-15);

        let mut r = rng(21);
        let gs = random_vector(&mut r, 5);
        let w = mvdr_update(&identity_map(5), &identity_map(5), &gs, 2.0).unwrap();
        let want = gs.scale(2.0 / gs.norm_squared());
        assert!((w - want).norm() < 1e-14);
    }

    #[test]
    fn zero_steering_is_rejected() {
        assert!(matches!(
            mvdr_update(&identity_map(3), &identity_map(3), &CVector::zeros(3), 1.0),
            Err(Error::ZeroSteering)
        ));
    }

    #[test]
    fn singular_covariance_is_reported() {
        let r = CMatrix::zeros(3, 3);
        let s = CVector::from_element(3, c(1.0));
        assert!(matches!(
            mvdr_update(&r, &identity_map(3), &s, 1.0),
            Err(Error::SingularCovariance)
        ));
    }

    /// Eliminates the Capon constraint by parametrizing `w = w_p + U z` with
    /// `U` spanning the complement of `Gs`, then solves the normal equations.
    #[test]
    fn matches_hyperplane_elimination() {
        let n = 8;
        let ru = random_pd(22, n);
        let mut r = rng(23);
        let gs = random_vector(&mut r, n);
        let kappa = 1.0;
        let w = mvdr_update(&ru, &identity_map(n), &gs, kappa).unwrap();

        let w_p = gs.scale(kappa / gs.norm_squared());
        let u = complement_basis(&gs).unwrap();
        let lhs = u.adjoint() * &ru * &u;
        let rhs = -(u.adjoint() * &ru * &w_p);
        let z = lhs.lu().solve(&rhs).unwrap();
        let oracle = &w_p + &u * z;
        assert!((&w - &oracle).norm() <= 1e-10 * oracle.norm());
    }

    #[test]
    fn capon_optimality_and_homogeneity() {
        let n = 8;
        let ru = random_pd(24, n);
        let mut r = rng(25);
        let gs = random_vector(&mut r, n);
        let kappa = 1.3;
        let w = mvdr_update(&ru, &identity_map(n), &gs, kappa).unwrap();
        assert!((w.dotc(&gs) - Complex64::new(kappa, 0.0)).norm() <= 1e-10 * kappa);

        let base = quad_form(&ru, &w);
        let u = complement_basis(&gs).unwrap();
        for _ in 0..20 {
            let delta = &u * random_vector(&mut r, n - 1);
            let perturbed = &w + &delta;
            assert!(base <= quad_form(&ru, &perturbed) + 1e-12);
        }

        let w2 = mvdr_update(&ru, &identity_map(n), &gs, 2.0 * kappa).unwrap();
        assert!((w2 - w.scale(2.0)).norm() <= 1e-14 * w.norm());
    }
}
