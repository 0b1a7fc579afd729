//! Pulse-Doppler radar simulation and automatic target recognition for
//! small-drone detection.
//!
//! The crate is organised as a processing chain:
//!
//! ```text
//! Scenario ──► echo_synth ──► dsp (range-Doppler, STFT) ──► detector
//!                                                            │
//!                 tracker (CWS / TAI) ◄── atr (features, classify)
//! ```
//!
//! `tradestudy` holds the radar-equation and latency calculators plus the
//! dwell-time sweep, and `export` writes the CSV / PGM / binary artifacts.

// `!(x > 0.0)` is used on purpose in validation so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod atr;
pub mod detector;
pub mod dsp;
pub mod echo_synth;
pub mod error;
pub mod export;
pub mod reference;
pub mod rng;
pub mod scattering;
pub mod scenario;
pub mod tracker;
pub mod tradestudy;

pub use error::{Error, Result};

pub use rustfft::num_complex::Complex64;

/// Propagation speed used throughout (m/s).
///
/// The rounded engineering value keeps c/2B = 12 m at 12.5 MHz.
pub const SPEED_OF_LIGHT: f64 = 3.0e8;

/// Boltzmann constant (J/K).
pub const BOLTZMANN: f64 = 1.380649e-23;
