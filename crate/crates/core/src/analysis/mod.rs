//! Analyses on top of an exact interaction table: salient concepts, sparsity
//! and matching curves, cross-input transferability, and error attribution.

mod attribution;
mod matching;
mod salient;
mod transfer;

pub use attribution::{attribute_error, AttributionEntry, AttributionReport, TargetInfo};
pub use matching::{
    matching_curve, windowed_rmse, MatchingCurve, MatchingRecord, Sample, DEFAULT_HALF_WINDOW,
    EXHAUSTIVE_MAX_N,
};
pub use salient::{extract_salient, strength_curve, STANDARD_SALIENT_COUNTS};
pub use transfer::{
    build_concept_vector, jaccard_similarity, ConceptVector, SharedPlayers, MAX_SHARED_PLAYERS,
    TRANSFER_SALIENT_COUNTS,
};
