//! Link-level simulator and closed-form toolkit for a BPSK link interfered by
//! a second, symbol-misaligned BPSK transmission.
//!
//! * [`model`]: channel, misalignment and timing-scheme types.
//! * [`analytics`]: effective interference power, eSINR and BER in closed form.
//! * [`simulation`]: symbol-level Monte Carlo engine.
//! * [`waveform`]: oversampled continuous-time reference used to validate the
//!   symbol-level model.
//! * [`experiments`]: parameter sweeps, CSV output, dB-gap measurement and the
//!   validation suite.

pub mod analytics;
pub mod error;
pub mod experiments;
pub mod model;
pub mod simulation;
pub mod waveform;

pub use error::{Error, Result};
pub use model::{BerEstimate, ChannelParams, Misalignment, SweepResult, TimingScheme};
