use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{SalientSet, SubsetMask};

/// Salient-set sizes compared across inputs.
pub const TRANSFER_SALIENT_COUNTS: [usize; 6] = [5, 10, 15, 20, 25, 30];

/// Limit on shared players; a concept vector has `2 * 2^k` coordinates.
pub const MAX_SHARED_PLAYERS: usize = 20;

/// Injective map from one input's players onto shared-word slots `0..k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SharedPlayers {
    n: usize,
    /// `slot_of[player]`
    slot_of: Vec<Option<usize>>,
    slots: usize,
}

impl SharedPlayers {
    /// `players[t]` is the player occupying shared slot `t`.
    pub fn new(n: usize, players: &[usize]) -> Result<Self> {
        if players.len() > MAX_SHARED_PLAYERS {
            return Err(Error::invalid(format!(
                "{} shared players exceed the limit of {MAX_SHARED_PLAYERS}",
                players.len()
            )));
        }
        let mut slot_of = vec![None; n];
        for (slot, &p) in players.iter().enumerate() {
            let cell = slot_of.get_mut(p).ok_or_else(|| {
                Error::invalid(format!("shared player {p} out of range for n = {n}"))
            })?;
            if cell.replace(slot).is_some() {
                return Err(Error::invalid(format!(
                    "mapping is not injective: player {p} appears twice"
                )));
            }
        }
        Ok(Self {
            n,
            slot_of,
            slots: players.len(),
        })
    }

    /// Both sides of a pairing `[(a, b)]` between the players of two inputs.
    pub fn from_pairs(pairs: &[(usize, usize)], n_a: usize, n_b: usize) -> Result<(Self, Self)> {
        let a: Vec<usize> = pairs.iter().map(|p| p.0).collect();
        let b: Vec<usize> = pairs.iter().map(|p| p.1).collect();
        Ok((Self::new(n_a, &a)?, Self::new(n_b, &b)?))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of shared slots.
    pub fn len(&self) -> usize {
        self.slots
    }

    pub fn is_empty(&self) -> bool {
        self.slots == 0
    }

    /// The mask re-indexed onto shared slots, or `None` if it touches a non-shared player.
    pub fn translate(&self, mask: SubsetMask) -> Option<usize> {
        mask.players().try_fold(0usize, |acc, p| {
            self.slot_of
                .get(p)
                .copied()
                .flatten()
                .map(|slot| acc | (1 << slot))
        })
    }
}

/// Nonnegative split of salient effects over subsets of the shared players.
///
/// Coordinates are indexed by shared-subset mask; `pos` holds `max(I, 0)`,
/// `neg` holds `-min(I, 0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConceptVector {
    pub shared: usize,
    pub pos: Vec<f64>,
    pub neg: Vec<f64>,
}

impl ConceptVector {
    /// `2d` with `d = 2^shared`.
    pub fn dim(&self) -> usize {
        self.pos.len() + self.neg.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coords().all(|x| x == 0.0)
    }

    /// `pos` followed by `neg`.
    pub fn coords(&self) -> impl Iterator<Item = f64> + '_ {
        self.pos.iter().chain(&self.neg).copied()
    }
}

/// Places each salient effect whose mask lies within the shared players.
/// Entries touching non-shared players have no coordinate and are dropped.
pub fn build_concept_vector(salient: &SalientSet, shared: &SharedPlayers) -> Result<ConceptVector> {
    if salient.source_n() != shared.n() {
        return Err(Error::ArityMismatch {
            expected: salient.source_n(),
            found: shared.n(),
        });
    }
    let d = 1usize << shared.len();
    let mut pos = vec![0.0; d];
    let mut neg = vec![0.0; d];
    for e in salient.entries() {
        if let Some(slot) = shared.translate(e.mask) {
            if e.effect > 0.0 {
                pos[slot] = e.effect;
            } else if e.effect < 0.0 {
                neg[slot] = -e.effect;
            }
        }
    }
    Ok(ConceptVector {
        shared: shared.len(),
        pos,
        neg,
    })
}

/// `‖min(a, b)‖₁ / ‖max(a, b)‖₁` over the concatenated coordinates.
pub fn jaccard_similarity(a: &ConceptVector, b: &ConceptVector) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    let (lo, hi) = a
        .coords()
        .zip(b.coords())
        .fold((0.0, 0.0), |(lo, hi), (x, y)| {
            (lo + x.min(y), hi + x.max(y))
        });
    if hi == 0.0 {
        return Err(Error::UndefinedSimilarity);
    }
    Ok(lo / hi)
}
