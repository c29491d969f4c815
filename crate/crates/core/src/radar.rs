//! STAP signal model: steering vectors, the waveform-to-space-time map and
//! the noise, interference and clutter covariances.
//!
//! Every space-time vector has length `M * N * L` and is indexed with the
//! Doppler (pulse) index outermost, fast time in the middle and the sensor
//! index innermost, i.e. element `(l, n, m)` lives at `(l * N + n) * M + m`.
//! This is the order of `v ⊗ s ⊗ a`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::linalg::{c, kron, CMatrix, CVector};
use crate::scenario::{Dims, ScenarioConfig};

/// Half-wavelength ULA response, `exp(-iπ m sin(az) cos(el))`.
pub fn spatial_steering(azimuth: f64, elevation: f64, sensors: usize) -> CVector {
    let phase = -PI * azimuth.sin() * elevation.cos();
    CVector::from_fn(sensors, |m, _| Complex64::from_polar(1.0, phase * m as f64))
}

/// Slow-time response, `exp(i 2π f_d l)`.
pub fn doppler_steering(doppler: f64, pulses: usize) -> CVector {
    CVector::from_fn(pulses, |l, _| {
        Complex64::from_polar(1.0, 2.0 * PI * doppler * l as f64)
    })
}

/// `v(doppler) ⊗ I_N ⊗ a(azimuth, elevation)`, so that `map * s = v ⊗ s ⊗ a`.
pub fn space_time_map(dims: Dims, azimuth: f64, elevation: f64, doppler: f64) -> CMatrix {
    let v = CMatrix::from_column_slice(
        dims.pulses,
        1,
        doppler_steering(doppler, dims.pulses).as_slice(),
    );
    let a = CMatrix::from_column_slice(
        dims.sensors,
        1,
        spatial_steering(azimuth, elevation, dims.sensors).as_slice(),
    );
    let eye = CMatrix::identity(dims.samples, dims.samples);
    kron(&kron(&v, &eye), &a)
}

/// Target map `G` with `G s = v(f_d) ⊗ s ⊗ a(θ_t, φ_t)`.
pub fn build_target_map(cfg: &ScenarioConfig) -> CMatrix {
    let t = cfg.target;
    space_time_map(cfg.dims, t.azimuth, t.elevation, t.doppler)
}

/// Toeplitz noise covariance with entries `exp(-decay |i - j|)`.
pub fn build_noise_cov(cfg: &ScenarioConfig) -> CMatrix {
    let n = cfg.space_time_dim();
    let decay = cfg.noise.decay;
    CMatrix::from_fn(n, n, |i, j| c((-decay * i.abs_diff(j) as f64).exp()))
}

/// Sum of rank-one interferer covariances `p · (t ⊗ a)(t ⊗ a)ᴴ`, where `t`
/// is a unit-modulus phase ramp over the `L * N` slow/fast-time lags.
pub fn build_interference_cov(cfg: &ScenarioConfig) -> CMatrix {
    let n = cfg.space_time_dim();
    let lags = cfg.dims.pulses * cfg.dims.samples;
    let mut r = CMatrix::zeros(n, n);
    for intf in &cfg.interferers {
        let ramp = CVector::from_fn(lags, |j, _| {
            Complex64::from_polar(1.0, intf.phase_rate * j as f64)
        });
        let a = spatial_steering(intf.azimuth, intf.elevation, cfg.dims.sensors);
        let u = ramp.kronecker(&a);
        r += (&u * u.adjoint()).scale(intf.power);
    }
    r
}

/// Clutter patch azimuths, linearly spaced over the configured span.
pub fn clutter_azimuths(cfg: &ScenarioConfig) -> Vec<f64> {
    let q = cfg.clutter.patches;
    let [lo, hi] = cfg.clutter.azimuth_span;
    if q == 1 {
        return vec![0.5 * (lo + hi)];
    }
    let step = (hi - lo) / (q - 1) as f64;
    (0..q).map(|i| lo + step * i as f64).collect()
}

/// Per-patch operators `A_q = √p · (v(f_q) ⊗ I_N ⊗ a(θ_q, φ_c))`.
pub fn build_clutter_operators(cfg: &ScenarioConfig) -> Vec<CMatrix> {
    let cl = cfg.clutter;
    let amp = cl.patch_power.sqrt();
    clutter_azimuths(cfg)
        .into_iter()
        .map(|az| {
            let doppler = cl.doppler_slope * az.sin() * cl.elevation.cos() / 2.0;
            space_time_map(cfg.dims, az, cl.elevation, doppler).scale(amp)
        })
        .collect()
}

/// `R_c(s) = Σ_q A_q s sᴴ A_qᴴ`.
pub fn clutter_cov(ops: &[CMatrix], s: &CVector) -> CMatrix {
    let n = ops.first().map_or(0, |a| a.nrows());
    let mut r = CMatrix::zeros(n, n);
    for a in ops {
        let x = a * s;
        r.gerc(c(1.0), &x, &x, c(1.0));
    }
    r
}

/// `F0(w) = Σ_q A_qᴴ w wᴴ A_q`, the waveform-domain Hessian satisfying
/// `sᴴ F0(w) s = wᴴ R_c(s) w`.
pub fn waveform_hessian(ops: &[CMatrix], w: &CVector) -> CMatrix {
    let n = ops.first().map_or(0, |a| a.ncols());
    let mut f = CMatrix::zeros(n, n);
    for a in ops {
        let x = a.ad_mul(w);
        f.gerc(c(1.0), &x, &x, c(1.0));
    }
    f
}

/// `wᴴ R_c(s) w = Σ_q |wᴴ A_q s|²` without forming `R_c`.
pub fn clutter_form(ops: &[CMatrix], w: &CVector, s: &CVector) -> f64 {
    ops.iter().map(|a| w.dotc(&(a * s)).norm_sqr()).sum()
}

/// Model-built covariances for one scenario. Immutable once built.
#[derive(Debug, Clone)]
pub struct CovarianceBundle {
    pub noise: CMatrix,
    pub interference: CMatrix,
    /// `R_n + R_i`, the waveform-independent part.
    pub noise_plus_interference: CMatrix,
    pub clutter_ops: Vec<CMatrix>,
    pub target_map: CMatrix,
}

impl CovarianceBundle {
    pub fn new(cfg: &ScenarioConfig) -> Self {
        let noise = build_noise_cov(cfg);
        let interference = build_interference_cov(cfg);
        let noise_plus_interference = &noise + &interference;
        Self {
            noise,
            interference,
            noise_plus_interference,
            clutter_ops: build_clutter_operators(cfg),
            target_map: build_target_map(cfg),
        }
    }

    pub fn clutter_cov(&self, s: &CVector) -> CMatrix {
        clutter_cov(&self.clutter_ops, s)
    }

    pub fn waveform_hessian(&self, w: &CVector) -> CMatrix {
        waveform_hessian(&self.clutter_ops, w)
    }

    /// `R_u(s) = R_c(s) + R_n + R_i`.
    pub fn total_cov(&self, s: &CVector) -> CMatrix {
        self.clutter_cov(s) + &self.noise_plus_interference
    }

    /// `G s`.
    pub fn steer(&self, s: &CVector) -> CVector {
        &self.target_map * s
    }

    /// `Gᴴ w`.
    pub fn receive_steering(&self, w: &CVector) -> CVector {
        self.target_map.ad_mul(w)
    }
}
