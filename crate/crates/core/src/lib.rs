//! Joint design of a space-time adaptive receive filter and a transmit
//! waveform for clutter suppression, by alternating minimization.
//!
//! The receive half-step is an MVDR filter ([`receiver`]); the waveform
//! half-step is a power-constrained quadratic program with four
//! interchangeable solvers ([`waveform`]). [`am`] drives the alternation and
//! [`harness`] runs seeded experiments and writes traces.

pub mod am;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod radar;
pub mod receiver;
pub mod scenario;
pub mod waveform;

pub use error::{Error, Result};
pub use scenario::ScenarioConfig;
