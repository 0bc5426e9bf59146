//! Ternary excitation sequences with harmonic multiples of two and three
//! suppressed.
//!
//! The crate covers the whole workflow around such sequences:
//!
//! - [`seq`]: direct (DS) and randomized constrained (RCS) constructions,
//!   constraint checking and constraint-preserving swap moves.
//! - [`spectrum`]: exact DFT, harmonic classification, SFDR/THD and the
//!   closed-form power spectral densities of RCS under ideal and
//!   non-uniform DACs.
//! - [`dac`]: generation/acquisition chain models (non-uniform DAC levels,
//!   DDS memory stretching, zero-order hold, RC filtering, jitter, noise,
//!   quantization, coherent averaging).
//! - [`optimizer`]: random restarts followed by swap-based hill climbing.
//! - [`verify`]: Monte Carlo versus closed-form cross checks and the
//!   datasets behind the reference figures.
//! - [`io`]: CSV/JSON/WAV formats and run manifests used by the CLI.

pub mod dac;
pub mod error;
pub mod io;
pub mod optimizer;
pub mod rng;
pub mod seq;
pub mod spectrum;
pub mod verify;

pub use error::{Error, Result};

/// Version string embedded in every generated file.
pub const TOOL_VERSION: &str = concat!("ternseq ", env!("CARGO_PKG_VERSION"));
