//! Inter-numerology interference (INI) analysis for two multiplexed CP-OFDM
//! numerologies sharing one band.
//!
//! The library has two independent routes to the same quantities and is built
//! around keeping them in agreement:
//!
//! * [`analytic`] — closed-form leakage kernels, per-(interferer, victim)
//!   interference matrices, SIR profiles and scalar averages, for both
//!   individual and common cyclic-prefix framing;
//! * [`simulate`] — a time-domain transmitter/receiver chain (built on
//!   [`waveform`]) driven either tone-by-tone, which reproduces every matrix
//!   entry deterministically, or as a seeded Monte-Carlo ensemble.
//!
//! [`experiments`] packages the standard scenario sweeps with CSV output, and
//! [`config`] parses the plain-text run configuration the CLI consumes.
//!
//! ```
//! use ini_lab::{analytic, simulate, CpMode, IniDirection, MultiplexPair};
//!
//! let pair = MultiplexPair { n_fft: 128, q: 4, ..MultiplexPair::default() }
//!     .validate()
//!     .unwrap();
//! let matrix = analytic::ini_matrix(&pair, IniDirection::WsnToNsn, CpMode::Common);
//! // every fourth narrow-numerology subcarrier receives exactly zero power
//! let totals = matrix.per_victim_totals();
//! assert!(totals.iter().step_by(4).all(|&t| t == 0.0));
//! // and the closed form matches the time-domain chain measurement
//! assert!(simulate::cross_validate(&pair, CpMode::Common) < 1e-9);
//! ```

pub mod analytic;
pub mod channel;
pub mod config;
pub mod error;
pub mod experiments;
pub mod numerology;
pub mod simulate;
pub mod waveform;

pub use analytic::{from_db, to_db, AverageMetrics, IniDirection, IniMatrix, SirProfile, Victim};
pub use error::{Error, Result};
pub use numerology::{CpMode, FrameGeometry, MultiplexPair, NumerologyPreset, ValidatedPair};
pub use rustfft::num_complex::Complex64;
