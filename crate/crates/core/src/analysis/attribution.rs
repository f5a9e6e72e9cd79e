use serde::{Deserialize, Serialize};

use super::extract_salient;
use crate::error::{Error, Result};
use crate::lattice::{InteractionTable, PlayerSet, SubsetMask};

/// The output being explained, e.g. a wrongly generated word and its score `v(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetInfo {
    pub word: String,
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributionEntry {
    pub mask: SubsetMask,
    pub labels: Vec<String>,
    pub effect: f64,
}

/// Salient concepts pushing the output up, strongest first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributionReport {
    pub target: Option<TargetInfo>,
    pub salient_count: usize,
    pub entries: Vec<AttributionEntry>,
}

impl AttributionReport {
    pub fn with_target(mut self, target: TargetInfo) -> Self {
        self.target = Some(target);
        self
    }
}

/// Salient interactions with strictly positive effect, descending (ties by ascending mask).
pub fn attribute_error(
    interactions: &InteractionTable,
    m: usize,
    players: &PlayerSet,
) -> Result<AttributionReport> {
    if players.len() != interactions.n() {
        return Err(Error::ArityMismatch {
            expected: interactions.n(),
            found: players.len(),
        });
    }
    let salient = extract_salient(interactions, m)?;
    // salient order already sorts positives by effect descending, ties by mask
    let entries = salient
        .entries()
        .iter()
        .filter(|e| e.effect > 0.0)
        .map(|e| AttributionEntry {
            mask: e.mask,
            labels: players
                .labels_of(e.mask)
                .into_iter()
                .map(String::from)
                .collect(),
            effect: e.effect,
        })
        .collect();
    Ok(AttributionReport {
        target: None,
        salient_count: m,
        entries,
    })
}
