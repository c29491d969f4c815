//! Rescaling of a receive/transmit pair onto the power boundary.

use crate::error::{Error, Result};
use crate::linalg::{tol, CVector};

/// `(w', s') = (ρ w, s / ρ)` with `ρ = ‖s‖ / √P_o`, so that `‖s'‖² = P_o`
/// while `w'ᴴ G s' = wᴴ G s` is preserved.
pub fn scale_solution(w: &CVector, s: &CVector, power: f64) -> Result<(CVector, CVector)> {
    let norm2 = s.norm_squared();
    if norm2.sqrt() <= tol::ZERO {
        return Err(Error::ZeroWaveform);
    }
    let ratio = (norm2 / power).sqrt();
    Ok((w.scale(ratio), s.unscale(ratio)))
}

/// Rescales only when `s` exceeds the power budget.
pub fn scale_to_power_if_needed(w: &CVector, s: &CVector, power: f64) -> Result<(CVector, CVector)> {
    if s.norm_squared() > power {
        scale_solution(w, s, power)
    } else {
        Ok((w.clone(), s.clone()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::linalg::testutil::*;

    #[test]
    fn doubles_and_halves() {
        let w = CVector::from_vec(vec![c(1.0), c(1.0)]);
        let s = CVector::from_vec(vec![c(2.0), c(0.0)]);
        let (w2, s2) = scale_solution(&w, &s, 1.0).unwrap();
        assert!((w2 - w.scale(2.0)).norm() < 1e-15);
        assert!((s2 - CVector::from_vec(vec![c(1.0), c(0.0)])).norm() < 1e-15);
    }

    #[test]
    fn on_boundary_is_unchanged() {
        let w = CVector::from_vec(vec![c(0.3), c(-0.2)]);
        let s = CVector::from_vec(vec![c(0.6), c(0.8)]);
        let (w2, s2) = scale_solution(&w, &s, s.norm_squared()).unwrap();
        assert_eq!(w2, w);
        assert_eq!(s2, s);
    }

    #[test]
    fn zero_waveform_is_rejected() {
        let w = CVector::from_element(2, c(1.0));
        assert!(matches!(
            scale_solution(&w, &CVector::zeros(2), 1.0),
            Err(Error::ZeroWaveform)
        ));
    }

    #[test]
    fn preserves_gain_and_hits_budget() {
        let mut r = rng(81);
        for _ in 0..20 {
            let g = random_matrix(&mut r, 6, 4);
            let w = random_vector(&mut r, 6);
            let s = random_vector(&mut r, 4);
            let (w2, s2) = scale_solution(&w, &s, 1.7).unwrap();
            assert!((s2.norm_squared() - 1.7).abs() <= 1e-12 * 1.7);
            let before = w.dotc(&(&g * &s));
            let after = w2.dotc(&(&g * &s2));
            assert!((before - after).norm() <= 1e-12 * before.norm());
        }
    }

    #[test]
    fn within_budget_is_left_alone() {
        let w = CVector::from_element(2, c(1.0));
        let s = CVector::from_element(2, c(0.1));
        let (w2, s2) = scale_to_power_if_needed(&w, &s, 1.0).unwrap();
        assert_eq!((w2, s2), (w, s));
    }
}
