//! Harsanyi interaction analysis for black-box value functions over masked inputs.
//!
//! A value function `v` maps every subset `S` of `n` input variables (the
//! variables kept unmasked) to a scalar model output. This crate computes the
//! exact Harsanyi interaction table `I(S) = sum_{T ⊆ S} (-1)^{|S|-|T|} v(T)`,
//! reconstructs `v` from it, extracts the salient interactions, and runs the
//! sparsity, matching, transferability and error-attribution analyses on top.
//!
//! Module map:
//!
//! - [`lattice`]: player sets, subset masks, dense value/interaction tables.
//! - [`transform`]: fast and brute-force Möbius inversion, zeta reconstruction.
//! - [`oracle`]: the value-function abstraction, planted models, the external
//!   wire protocol, and exhaustive evaluation.
//! - [`analysis`]: salient extraction, curves, concept vectors, attribution.
//! - [`io`]: table files and curve/report emission.

pub mod analysis;
pub mod error;
pub mod io;
pub mod lattice;
pub mod oracle;
pub mod transform;

pub use error::{Error, Result};
pub use lattice::{
    complement, subsets_of, InteractionTable, PlayerSet, SalientEntry, SalientSet, SubsetMask,
    ValueTable, N_MAX,
};
