use crate::error::{Error, Result};
use crate::lattice::{salient_order, InteractionTable, SalientEntry, SalientSet, SubsetMask};

/// Salient-set sizes swept by the sparsity and matching analyses.
pub const STANDARD_SALIENT_COUNTS: [usize; 4] = [50, 100, 150, 200];

/// The `m` interactions with the largest `|I(S)|`, ties broken by ascending mask.
pub fn extract_salient(interactions: &InteractionTable, m: usize) -> Result<SalientSet> {
    let size = interactions.len();
    if m == 0 || m > size {
        return Err(Error::invalid(format!(
            "salient count {m} outside 1..={size}"
        )));
    }
    let mut entries: Vec<SalientEntry> = interactions
        .iter()
        .map(|(mask, effect)| SalientEntry { mask, effect })
        .collect();
    if m < size {
        entries.select_nth_unstable_by(m - 1, salient_order);
        entries.truncate(m);
    }
    entries.sort_unstable_by(salient_order);
    Ok(SalientSet::from_sorted(interactions.n(), entries))
}

/// All `|I(S)|`, descending, paired with their masks (ties by ascending mask).
pub fn strength_curve(interactions: &InteractionTable) -> Vec<(SubsetMask, f64)> {
    let mut entries: Vec<SalientEntry> = interactions
        .iter()
        .map(|(mask, effect)| SalientEntry { mask, effect })
        .collect();
    entries.sort_unstable_by(salient_order);
    entries
        .into_iter()
        .map(|e| (e.mask, e.effect.abs()))
        .collect()
}
