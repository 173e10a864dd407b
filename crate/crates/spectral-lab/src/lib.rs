//! Statevector simulation and spectral analysis of reuploader-style
//! parameterised quantum circuits.
//!
//! The crate covers the full loop from circuit construction to trend
//! reporting:
//!
//! - [`simcore`]: dense statevector simulation of {RX, RY, RZ, CNOT}
//!   circuits with Pauli-Z observables.
//! - [`circuit`]: reuploader layouts, encoding scale families, entanglement
//!   generators, and seeded parameter initialization.
//! - [`gradients`]: parameter-shift gradients with a finite-difference
//!   oracle and an equivalent adjoint fast path.
//! - [`spectrum`]: accessible frequency sets and redundancy profiles,
//!   computed combinatorially with exact big-integer counts.
//! - [`fourier`]: coefficient extraction, per-frequency loss decomposition,
//!   coefficient gradients, and non-orthogonal loss assignment.
//! - [`theory`]: numeric verification of the gradient bounds, Gaussian
//!   absolute moments, small-angle Monte Carlo statistics, and the
//!   perturbation-robustness bound.
//! - [`experiments`]: sinusoidal regression targets, full-batch Adam
//!   training with spectral traces, perturbation reports, and the
//!   entanglement / initialization sweeps.
//! - [`cliio`]: run configuration files, result persistence, and SVG
//!   heatmap emission for the `spectral-lab` binary.

pub mod circuit;
pub mod cliio;
pub mod error;
pub mod experiments;
pub mod fourier;
pub mod gradients;
pub mod simcore;
pub mod spectrum;
pub mod stats;
pub mod theory;
pub(crate) mod util;

pub use error::{Error, Result};
