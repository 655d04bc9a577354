//! Leading-order analysis of wave-trace singularities on lens spaces and
//! flat manifolds.
//!
//! The crate classifies closed geodesics, computes their Morse indices and
//! Duistermaat–Guillemin densities, and decides exactly (in a cyclotomic
//! field) whether the leading terms of the wave trace at each length cancel.
//! The [`oracle`] module re-derives the same quantities numerically.

pub mod error;
pub mod exactnum;
pub mod flat;
pub mod lens;
pub mod morse;
pub mod oracle;
pub mod wavetrace;

pub use error::{Error, Result};
