//! Simulation and analysis toolkit for long-range-dependent Gaussian processes
//! observed through nonlinear transforms and wavelet scalograms.
//!
//! The pipeline is: a spectral model with memory parameter `d` ([`spectral`]),
//! a Hermite-coefficient description of the nonlinearity ([`hermite`]),
//! exact-covariance path synthesis ([`synth`]), a dyadic wavelet filter bank
//! ([`wavelet`]), scalogram computation with analytic centering and its
//! chaos-group decomposition ([`scalogram`]), numeric evaluation of the limit
//! constants and reference samples of the limit laws ([`limits`]), a symbolic
//! regime classifier for the variance-scaling exponents ([`regime`]), and a
//! Monte Carlo harness tying them together ([`harness`]).

pub mod error;
pub mod hermite;
pub mod quad;
pub mod rational;
pub mod rng;
pub mod spectral;
pub mod stats;
pub mod synth;
pub mod wavelet;

pub use error::{CoreError, Result};
pub use hermite::{ExpansionStructure, GSpec, HermiteExpansion};
pub use spectral::{FStar, MemoryExponents, SpectralModel};
pub use synth::GaussianPath;
pub use wavelet::{LimitTransfer, WaveletFilterBank};
