//! Massive-MIMO symbol detection with annealed Langevin dynamics.
//!
//! The crate is organized around the pieces of a detection experiment:
//!
//! - [`channel`]: Kronecker-correlated Rayleigh channels, the real-equivalent
//!   system and its SVD, noisy observations.
//! - [`constellation`]: normalized square QAM, rounding and SER.
//! - [`score`]: the spectral-domain posterior score used by the samplers.
//! - [`langevin`]: the annealed underdamped and overdamped detectors.
//! - [`baselines`]: zero-forcing and MMSE.
//! - [`harness`]: SNR sweeps, timing and CSV output.

pub mod baselines;
pub mod channel;
pub mod constellation;
pub mod error;
pub mod harness;
pub mod langevin;
mod linalg;
pub mod score;

pub use channel::{ChannelRealization, ComplexMatrix, Observation};
pub use constellation::Constellation;
pub use error::{Error, Result};
pub use langevin::{DetectionResult, LangevinConfig};
