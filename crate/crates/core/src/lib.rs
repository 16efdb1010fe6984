//! Desk-scale simulator of a QKD protocol that carries key segments on
//! Fibonacci-valued orbital angular momentum (OAM) of entangled photon
//! pairs, together with the golden-angle spiral optics that motivate the
//! source.
//!
//! The crate is organized along the pipeline:
//!
//! * [`fibcode`] — Fibonacci arithmetic, the working alphabet, bit-block
//!   codecs and the two-bit classical exchange scheme.
//! * [`quantum`] — sparse kets over integer OAM labels: superposition,
//!   inner products, projective measurement, the alternating-sign test state.
//! * [`channel`] — pump sampling, down-conversion splitting, OAM sorting
//!   and probability-equalizing filters.
//! * [`parties`] — Alice/Bob/Eve behaviour: intercept-resend, the classical
//!   exchange, security and decoy checks, signed-mode sifting.
//! * [`spiral`] — Vogel spiral point sets, the analytic Fraunhofer far
//!   field and its Fourier-Hankel OAM spectrum.
//! * [`harness`] — seeded session orchestration, reports and attack sweeps.

pub mod channel;
pub mod error;
pub mod fibcode;
pub mod harness;
pub mod parties;
pub mod quantum;
pub mod spiral;

pub use error::{Error, Result};
pub use fibcode::{BitBlock, ExchangeScheme, FibAlphabet, FibSequence};
pub use harness::{run_session, SessionConfig, SessionReport};
pub use quantum::OamKet;
