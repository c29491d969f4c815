//! Scenario description for the simulated STAP problem.
//!
//! The serde layout is the on-disk JSON schema. Every field has a default,
//! and the defaults together form the reference scenario: a 5-element ULA,
//! 8 pulses of 8 fast-time samples, one interferer and 25 clutter patches.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub dims: Dims,
    pub target: Target,
    pub kappa: f64,
    pub power: f64,
    pub noise: Noise,
    pub interferers: Vec<Interferer>,
    pub clutter: Clutter,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Dims {
    /// Sensors.
    #[serde(rename = "M")]
    pub sensors: usize,
    /// Fast-time samples per pulse (waveform length).
    #[serde(rename = "N")]
    pub samples: usize,
    /// Pulses.
    #[serde(rename = "L")]
    pub pulses: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Target {
    pub azimuth: f64,
    pub elevation: f64,
    /// Normalized Doppler, cycles per pulse.
    pub doppler: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Noise {
    /// Exponent of the Toeplitz correlation `exp(-decay |i - j|)`.
    pub decay: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Interferer {
    pub azimuth: f64,
    pub elevation: f64,
    /// Phase increment per fast/slow-time lag, radians.
    pub phase_rate: f64,
    pub power: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Clutter {
    pub patches: usize,
    pub elevation: f64,
    pub azimuth_span: [f64; 2],
    pub patch_power: f64,
    /// Clutter ridge slope; patch Doppler is `slope * sin(az) * cos(el) / 2`.
    pub doppler_slope: f64,
}

impl Default for Dims {
    fn default() -> Self {
        Self {
            sensors: 5,
            samples: 8,
            pulses: 8,
        }
    }
}

impl Default for Target {
    fn default() -> Self {
        Self {
            azimuth: 0.0,
            elevation: FRAC_PI_3,
            doppler: -0.1443,
        }
    }
}

impl Default for Noise {
    fn default() -> Self {
        Self { decay: 0.005 }
    }
}

impl Default for Interferer {
    fn default() -> Self {
        Self {
            azimuth: 0.3941,
            elevation: FRAC_PI_3,
            phase_rate: 0.02,
            power: 1.0,
        }
    }
}

impl Default for Clutter {
    fn default() -> Self {
        Self {
            patches: 25,
            elevation: 0.3,
            azimuth_span: [-FRAC_PI_2, FRAC_PI_2],
            patch_power: 1.0,
            doppler_slope: 1.0,
        }
    }
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            dims: Dims::default(),
            target: Target::default(),
            kappa: 1.0,
            power: 1.0,
            noise: Noise::default(),
            interferers: vec![Interferer::default()],
            clutter: Clutter::default(),
            seed: 0,
        }
    }
}

fn finite(field: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::validation(field, "must be finite"))
    }
}

fn nonnegative(field: &str, v: f64) -> Result<()> {
    finite(field, v)?;
    if v < 0.0 {
        return Err(Error::validation(field, format!("must be >= 0, got {v}")));
    }
    Ok(())
}

impl ScenarioConfig {
    /// Space-time dimension `M * N * L`.
    pub fn space_time_dim(&self) -> usize {
        self.dims.sensors * self.dims.samples * self.dims.pulses
    }

    pub fn validate(&self) -> Result<()> {
        for (field, v) in [
            ("dims.M", self.dims.sensors),
            ("dims.N", self.dims.samples),
            ("dims.L", self.dims.pulses),
            ("clutter.patches", self.clutter.patches),
        ] {
            if v == 0 {
                return Err(Error::validation(field, "must be >= 1"));
            }
        }
        finite("power", self.power)?;
        if self.power <= 0.0 {
            return Err(Error::validation(
                "power",
                format!("must be > 0, got {}", self.power),
            ));
        }
        finite("kappa", self.kappa)?;
        if self.kappa == 0.0 {
            return Err(Error::validation("kappa", "must be nonzero"));
        }
        finite("noise.decay", self.noise.decay)?;
        if self.noise.decay <= 0.0 {
            return Err(Error::validation("noise.decay", "must be > 0"));
        }
        finite("target.azimuth", self.target.azimuth)?;
        finite("target.elevation", self.target.elevation)?;
        finite("target.doppler", self.target.doppler)?;
        for i in &self.interferers {
            finite("interferers.azimuth", i.azimuth)?;
            finite("interferers.elevation", i.elevation)?;
            finite("interferers.phase_rate", i.phase_rate)?;
            nonnegative("interferers.power", i.power)?;
        }
        let [lo, hi] = self.clutter.azimuth_span;
        finite("clutter.azimuth_span", lo)?;
        finite("clutter.azimuth_span", hi)?;
        // A single patch may sit on a degenerate span.
        if lo > hi || (lo == hi && self.clutter.patches > 1) {
            return Err(Error::validation(
                "clutter.azimuth_span",
                format!("need lo < hi, got [{lo}, {hi}]"),
            ));
        }
        finite("clutter.elevation", self.clutter.elevation)?;
        finite("clutter.doppler_slope", self.clutter.doppler_slope)?;
        nonnegative("clutter.patch_power", self.clutter.patch_power)?;
        Ok(())
    }

    /// Parses and validates a JSON scenario document.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        ScenarioConfig::default().validate().unwrap();
        assert_eq!(ScenarioConfig::default().space_time_dim(), 320);
    }

    #[test]
    fn empty_object_gives_defaults() {
        assert_eq!(
            ScenarioConfig::from_json("{}").unwrap(),
            ScenarioConfig::default()
        );
    }

    #[test]
    fn empty_text_is_parse_error() {
        assert!(matches!(ScenarioConfig::from_json(""), Err(Error::Parse(_))));
    }

    #[test]
    fn unknown_field_is_parse_error() {
        assert!(matches!(
            ScenarioConfig::from_json(r#"{"powr": 2}"#),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn negative_power_names_field() {
        match ScenarioConfig::from_json(r#"{"power": -1}"#) {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "power"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn zero_dims_and_spans() {
        let mut cfg = ScenarioConfig::default();
        cfg.dims.samples = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = ScenarioConfig::default();
        cfg.clutter.azimuth_span = [0.0, 0.0];
        assert!(cfg.validate().is_err());
        cfg.clutter.patches = 1;
        cfg.validate().unwrap();
        let mut cfg = ScenarioConfig::default();
        cfg.kappa = 0.0;
        assert!(cfg.validate().is_err());
    }
}
