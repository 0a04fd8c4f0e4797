//! Spin-path entangled single-neutron CHSH experiment under a tunable
//! geometric phase.
//!
//! The crate is organised bottom-up:
//!
//! - [`quantum`]: the entangled state over path ⊗ spin, subspace projectors,
//!   joint probabilities and correlation expectation values.
//! - [`geometric`]: generation of the geometric phase by two rf-flipper
//!   unitaries and the flipper resonance fields.
//! - [`chsh`]: S-functions, analytically adjusted Bell angles and numerical
//!   maximisation of the S-surface.
//! - [`experiment`]: Monte Carlo counting experiment (interferograms,
//!   beam-block runs, reference runs, Poisson statistics).
//! - [`analysis`]: sinusoid fitting, reference normalisation and the polar and
//!   azimuthal scan pipelines.
//! - [`io`]: CSV and `key = value` serialisation of the records above.
//!
//! Angles are radians throughout. The two-qubit basis is ordered
//! `(|I,↑⟩, |I,↓⟩, |II,↑⟩, |II,↓⟩)`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![forbid(unsafe_code)]

pub mod analysis;
pub mod angle;
pub mod chsh;
pub mod experiment;
pub mod geometric;
pub mod io;
pub mod optimize;
pub mod quantum;

mod error;

pub use error::{Error, Result};

/// Tsirelson bound 2√2, the quantum maximum of the CHSH combination.
pub const TSIRELSON: f64 = 2.0 * std::f64::consts::SQRT_2;

/// Bound of the CHSH combination for noncontextual hidden-variable theories.
pub const NONCONTEXTUAL_BOUND: f64 = 2.0;
