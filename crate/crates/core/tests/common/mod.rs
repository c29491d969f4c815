#![allow(dead_code)]

use std::path::PathBuf;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use stap_codesign::harness::load_scenario;
use stap_codesign::waveform::WaveformProblem;
use stap_codesign::ScenarioConfig;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub fn bundled_scenario_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios/stap_5x8x8.json")
}

pub fn bundled_scenario() -> ScenarioConfig {
    load_scenario(&bundled_scenario_path()).expect("bundled scenario loads")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn cnormal(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn random_vector(rng: &mut impl Rng, n: usize) -> CVector {
    CVector::from_fn(n, |_, _| cnormal(rng))
}

/// `X Xᴴ` with `X` of size `n × rank`.
pub fn random_psd(rng: &mut impl Rng, n: usize, rank: usize) -> CMatrix {
    let x = CMatrix::from_fn(n, rank, |_, _| cnormal(rng));
    &x * x.adjoint()
}

/// Random subproblem with `κ = 1` and a budget drawn uniformly from
/// `[κ²/‖y‖², hi]`; `y` is redrawn until that interval is nonempty.
pub fn random_instance(rng: &mut impl Rng, n: usize, rank: usize, hi: f64) -> WaveformProblem {
    let f0 = random_psd(rng, n, rank);
    let y = loop {
        let y = random_vector(rng, n);
        if 1.0 / y.norm_squared() < hi {
            break y;
        }
    };
    let lo = 1.0 / y.norm_squared();
    let power = lo + (hi - lo) * rng.random::<f64>();
    WaveformProblem::new(f0, y, 1.0, power).expect("valid instance")
}

pub fn quad(m: &CMatrix, x: &CVector) -> f64 {
    x.dotc(&(m * x)).re
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
