//! Noncoherent multiple-symbol differential detection for differential
//! space-time block-coded impulse-radio UWB.
//!
//! The crate simulates the full physical chain at waveform level and
//! implements four multiple-symbol detectors on the autocorrelation-receiver
//! samples, plus iterative detection-and-decoding with a rate-1/2
//! convolutional code:
//!
//! * [`stc`] — code book, bit mapping, differential encoding (exact integer
//!   arithmetic).
//! * [`waveform`] / [`channel`] — monocycle pulses, frame timing, stochastic
//!   dense-multipath channels, band-limited noise, burst synthesis.
//! * [`acr`] — autocorrelation-receiver sampling, sliding observation
//!   windows, energy estimation, the Gaussian window likelihood.
//! * [`trellis`] — the soft forward/backward detector (exact log-domain
//!   message passing over the `4^M`-state tuple trellis).
//! * [`glrt`] — exhaustive hard window detection and the one-symbol
//!   differential baseline.
//! * [`viterbi`] — reduced-memory hard and soft Viterbi detectors over the
//!   truncated metric.
//! * [`coding`] / [`idd`] — convolutional code (133, 171), random
//!   interleaving, soft-input soft-output decoding, and the iterative
//!   detector/decoder loop.
//! * [`sim`] — seeded Monte Carlo BER sweeps, baselines, complexity
//!   accounting and report emission; the `msdd` binary is a thin CLI over
//!   this module.
//!
//! Start with the `examples/` directory: each example is a runnable tour of
//! one capability.

pub mod acr;
pub mod channel;
pub mod coding;
pub mod error;
pub mod glrt;
pub mod idd;
pub mod ops;
pub mod rng;
pub mod sim;
pub mod stc;
pub mod trellis;
pub mod util;
pub mod viterbi;
pub mod waveform;

pub use error::Error;
