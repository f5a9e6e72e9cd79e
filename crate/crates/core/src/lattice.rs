//! Players, subset masks and dense tables over the subset lattice.
//!
//! Every table is a dense array of `2^n` doubles indexed by the mask integer:
//! bit `i` of the index is set iff player `i` is kept (unmasked).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported player count. A dense table at this size holds 2^24 doubles (128 MiB).
pub const N_MAX: usize = 24;

/// Ordered, position-identified input variables.
///
/// Labels may repeat: two occurrences of the same word are distinct players.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlayerSet {
    labels: Vec<String>,
}

impl PlayerSet {
    pub fn new(labels: Vec<String>) -> Result<Self> {
        Self::with_limit(labels, N_MAX)
    }

    /// Like [`PlayerSet::new`] with a tighter player limit. Limits above [`N_MAX`] are clamped.
    pub fn with_limit(labels: Vec<String>, max: usize) -> Result<Self> {
        let max = max.min(N_MAX);
        if labels.is_empty() {
            return Err(Error::NoPlayers);
        }
        if labels.len() > max {
            return Err(Error::TooManyPlayers {
                n: labels.len(),
                max,
            });
        }
        Ok(Self { labels })
    }

    /// Players labelled `x1..xn`.
    pub fn anonymous(n: usize) -> Result<Self> {
        Self::new((1..=n).map(|i| format!("x{i}")).collect())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, player: usize) -> Option<&str> {
        self.labels.get(player).map(String::as_str)
    }

    /// Labels of the kept players in `mask`, in player order.
    pub fn labels_of(&self, mask: SubsetMask) -> Vec<&str> {
        mask.players()
            .filter_map(|p| self.label(p))
            .collect::<Vec<_>>()
    }

    /// `{a, b}` rendering of a mask, `{}` for the empty set.
    pub fn render(&self, mask: SubsetMask) -> String {
        format!("{{{}}}", self.labels_of(mask).join(", "))
    }
}

/// An `n`-bit set of kept players.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct SubsetMask(u32);

impl SubsetMask {
    pub const EMPTY: SubsetMask = SubsetMask(0);

    /// Wraps raw bits without a range check.
    pub const fn from_bits(bits: u32) -> Self {
        SubsetMask(bits)
    }

    /// Wraps raw bits, checking `bits < 2^n`.
    pub fn new(bits: u64, n: usize) -> Result<Self> {
        if n > N_MAX {
            return Err(Error::TooManyPlayers { n, max: N_MAX });
        }
        if bits >> n != 0 {
            return Err(Error::MaskOutOfRange { mask: bits, n });
        }
        Ok(SubsetMask(bits as u32))
    }

    /// The mask keeping every player.
    pub fn full(n: usize) -> Self {
        debug_assert!(n <= N_MAX);
        SubsetMask(((1u64 << n) - 1) as u32)
    }

    pub fn from_players<I: IntoIterator<Item = usize>>(players: I, n: usize) -> Result<Self> {
        let mut bits = 0u64;
        for p in players {
            if p >= n {
                return Err(Error::invalid(format!(
                    "player index {p} out of range for n = {n}"
                )));
            }
            bits |= 1 << p;
        }
        Self::new(bits, n)
    }

    pub const fn bits(self) -> u32 {
        self.0
    }

    pub const fn index(self) -> usize {
        self.0 as usize
    }

    /// Number of kept players.
    pub const fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub const fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub const fn contains(self, player: usize) -> bool {
        player < 32 && self.0 & (1 << player) != 0
    }

    pub const fn is_subset_of(self, other: SubsetMask) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn fits(self, n: usize) -> bool {
        n >= 32 || self.0 >> n == 0
    }

    /// Kept player indices, ascending.
    pub fn players(self) -> impl Iterator<Item = usize> {
        let bits = self.0;
        (0..32).filter(move |i| bits & (1 << i) != 0)
    }
}

impl fmt::Display for SubsetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, p) in self.players().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "}}")
    }
}

/// Complement of `mask` within `n` bits (`N \ T`).
pub fn complement(mask: SubsetMask, n: usize) -> Result<SubsetMask> {
    let checked = SubsetMask::new(u64::from(mask.bits()), n)?;
    Ok(SubsetMask(checked.bits() ^ SubsetMask::full(n).bits()))
}

/// All submasks of `mask`, ascending by integer value, `∅` first and `mask` last.
pub fn subsets_of(mask: SubsetMask) -> Subsets {
    Subsets {
        mask: mask.bits(),
        next: Some(0),
    }
}

/// Iterator returned by [`subsets_of`].
#[derive(Debug, Clone)]
pub struct Subsets {
    mask: u32,
    next: Option<u32>,
}

impl Iterator for Subsets {
    type Item = SubsetMask;

    fn next(&mut self) -> Option<SubsetMask> {
        let cur = self.next?;
        // next submask in ascending order; wraps back to 0 after `mask`
        let succ = cur.wrapping_sub(self.mask) & self.mask;
        self.next = (succ != 0).then_some(succ);
        Some(SubsetMask(cur))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        match self.next {
            None => (0, Some(0)),
            Some(_) => {
                let total = 1usize << self.mask.count_ones();
                (1, Some(total))
            }
        }
    }
}

fn lattice_size(n: usize) -> Result<usize> {
    if n > N_MAX {
        return Err(Error::TooManyPlayers { n, max: N_MAX });
    }
    Ok(1usize << n)
}

fn validate_dense(n: usize, data: &[f64]) -> Result<()> {
    let expected = lattice_size(n)?;
    if data.len() != expected {
        return Err(Error::IncompleteTable {
            n,
            expected,
            found: data.len(),
        });
    }
    if let Some(i) = data.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite { mask: i as u64 });
    }
    Ok(())
}

macro_rules! dense_table {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Debug, Clone, PartialEq)]
        pub struct $name {
            n: usize,
            data: Box<[f64]>,
        }

        impl $name {
            /// Builds a table from `2^n` finite entries indexed by mask.
            pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
                validate_dense(n, &data)?;
                Ok(Self { n, data: data.into_boxed_slice() })
            }

            /// Builds a table by evaluating `f` at every mask in index order.
            pub fn from_fn(n: usize, mut f: impl FnMut(SubsetMask) -> f64) -> Result<Self> {
                let size = lattice_size(n)?;
                let data = (0..size).map(|i| f(SubsetMask::from_bits(i as u32))).collect();
                Self::new(n, data)
            }

            /// Builds a table from `(mask, value)` pairs that must cover every mask exactly once.
            pub fn from_entries<I>(n: usize, entries: I) -> Result<Self>
            where
                I: IntoIterator<Item = (u64, f64)>,
            {
                let size = lattice_size(n)?;
                let mut data = vec![f64::NAN; size];
                let mut seen = vec![false; size];
                let mut found = 0usize;
                for (mask, value) in entries {
                    let m = SubsetMask::new(mask, n)?;
                    if std::mem::replace(&mut seen[m.index()], true) {
                        return Err(Error::DuplicateMask { mask });
                    }
                    if !value.is_finite() {
                        return Err(Error::NonFinite { mask });
                    }
                    data[m.index()] = value;
                    found += 1;
                }
                if found != size {
                    return Err(Error::IncompleteTable { n, expected: size, found });
                }
                Self::new(n, data)
            }

            pub(crate) fn from_raw(n: usize, data: Vec<f64>) -> Self {
                debug_assert_eq!(data.len(), 1 << n);
                Self { n, data: data.into_boxed_slice() }
            }

            /// Player count.
            pub fn n(&self) -> usize {
                self.n
            }

            /// Number of entries, `2^n`.
            pub fn len(&self) -> usize {
                self.data.len()
            }

            /// Always false: a table has at least the empty-mask entry.
            pub fn is_empty(&self) -> bool {
                self.data.is_empty()
            }

            /// Entry at `mask`. Panics if the mask does not fit in `n` bits.
            pub fn get(&self, mask: SubsetMask) -> f64 {
                self.data[mask.index()]
            }

            pub fn try_get(&self, mask: SubsetMask) -> Result<f64> {
                self.data
                    .get(mask.index())
                    .copied()
                    .ok_or(Error::MaskOutOfRange { mask: u64::from(mask.bits()), n: self.n })
            }

            pub fn as_slice(&self) -> &[f64] {
                &self.data
            }

            pub fn to_vec(&self) -> Vec<f64> {
                self.data.to_vec()
            }

            /// `(mask, entry)` pairs in mask order.
            pub fn iter(&self) -> impl Iterator<Item = (SubsetMask, f64)> + '_ {
                self.data
                    .iter()
                    .enumerate()
                    .map(|(i, &x)| (SubsetMask::from_bits(i as u32), x))
            }
        }
    };
}

dense_table!(
    /// Model outputs `v(x_S)` for every subset mask.
    ValueTable
);

dense_table!(
    /// Harsanyi interaction effects `I(S)` for every subset mask.
    InteractionTable
);

/// One salient interaction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SalientEntry {
    pub mask: SubsetMask,
    pub effect: f64,
}

/// Top interactions by absolute effect, sorted by `|effect|` descending with
/// ties broken by ascending mask.
#[derive(Debug, Clone, PartialEq)]
pub struct SalientSet {
    source_n: usize,
    entries: Vec<SalientEntry>,
}

/// Salient ordering: larger `|effect|` first, then smaller mask.
pub(crate) fn salient_order(a: &SalientEntry, b: &SalientEntry) -> std::cmp::Ordering {
    b.effect
        .abs()
        .total_cmp(&a.effect.abs())
        .then(a.mask.cmp(&b.mask))
}

impl SalientSet {
    /// Builds a salient set from arbitrary entries, sorting them into canonical order.
    pub fn new(source_n: usize, mut entries: Vec<SalientEntry>) -> Result<Self> {
        let size = lattice_size(source_n)?;
        if entries.len() > size {
            return Err(Error::invalid(format!(
                "{} salient entries exceed the lattice size {size}",
                entries.len()
            )));
        }
        for e in &entries {
            if !e.mask.fits(source_n) {
                return Err(Error::MaskOutOfRange {
                    mask: u64::from(e.mask.bits()),
                    n: source_n,
                });
            }
            if !e.effect.is_finite() {
                return Err(Error::NonFinite {
                    mask: u64::from(e.mask.bits()),
                });
            }
        }
        entries.sort_by(salient_order);
        if let Some(w) = entries.windows(2).find(|w| w[0].mask == w[1].mask) {
            return Err(Error::DuplicateMask {
                mask: u64::from(w[0].mask.bits()),
            });
        }
        Ok(Self { source_n, entries })
    }

    /// The given masks with their effects read from `table`.
    pub fn from_masks(
        table: &InteractionTable,
        masks: impl IntoIterator<Item = SubsetMask>,
    ) -> Result<Self> {
        let entries = masks
            .into_iter()
            .map(|mask| {
                table
                    .try_get(mask)
                    .map(|effect| SalientEntry { mask, effect })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(table.n(), entries)
    }

    pub(crate) fn from_sorted(source_n: usize, entries: Vec<SalientEntry>) -> Self {
        debug_assert!(entries
            .windows(2)
            .all(|w| salient_order(&w[0], &w[1]).is_lt()));
        Self { source_n, entries }
    }

    pub fn source_n(&self) -> usize {
        self.source_n
    }

    pub fn entries(&self) -> &[SalientEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn masks(&self) -> impl Iterator<Item = SubsetMask> + '_ {
        self.entries.iter().map(|e| e.mask)
    }

    pub fn contains(&self, mask: SubsetMask) -> bool {
        self.entries.iter().any(|e| e.mask == mask)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(bits: u32) -> SubsetMask {
        SubsetMask::from_bits(bits)
    }

    #[test]
    fn complement_examples() {
        assert_eq!(complement(m(0b000), 3).unwrap(), m(0b111));
        assert_eq!(complement(m(0b111), 3).unwrap(), m(0b000));
        assert_eq!(complement(m(0b101), 3).unwrap(), m(0b010));
    }

    #[test]
    fn complement_rejects_out_of_range() {
        assert!(matches!(
            complement(m(0b1000), 3),
            Err(Error::MaskOutOfRange { mask: 8, n: 3 })
        ));
    }

    #[test]
    fn subsets_examples() {
        let v: Vec<_> = subsets_of(m(0)).collect();
        assert_eq!(v, vec![m(0)]);
        let v: Vec<_> = subsets_of(m(0b11)).collect();
        assert_eq!(v, vec![m(0), m(1), m(2), m(3)]);
        let v: Vec<_> = subsets_of(m(0b101)).collect();
        assert_eq!(v, vec![m(0b000), m(0b001), m(0b100), m(0b101)]);
    }

    #[test]
    fn player_set_limits() {
        assert!(matches!(PlayerSet::new(vec![]), Err(Error::NoPlayers)));
        let labels: Vec<String> = (0..25).map(|i| i.to_string()).collect();
        assert!(matches!(
            PlayerSet::new(labels),
            Err(Error::TooManyPlayers { n: 25, max: 24 })
        ));
        let labels: Vec<String> = (0..5).map(|i| i.to_string()).collect();
        assert!(PlayerSet::with_limit(labels, 4).is_err());
        let dup = PlayerSet::new(vec!["of".into(), "the".into(), "of".into()]).unwrap();
        assert_eq!(dup.len(), 3);
        assert_eq!(dup.render(m(0b101)), "{of, of}");
        assert_eq!(dup.render(m(0)), "{}");
    }

    #[test]
    fn tables_reject_incomplete_and_nonfinite() {
        assert!(matches!(
            ValueTable::new(2, vec![0.0; 3]),
            Err(Error::IncompleteTable {
                expected: 4,
                found: 3,
                ..
            })
        ));
        assert!(matches!(
            InteractionTable::new(1, vec![0.0, f64::NAN]),
            Err(Error::NonFinite { mask: 1 })
        ));
        assert!(matches!(
            ValueTable::from_entries(2, vec![(0, 1.0), (1, 1.0), (1, 2.0), (3, 0.0)]),
            Err(Error::DuplicateMask { mask: 1 })
        ));
        assert!(matches!(
            ValueTable::from_entries(2, vec![(0, 1.0), (1, 1.0), (3, 0.0)]),
            Err(Error::IncompleteTable { found: 3, .. })
        ));
        assert!(ValueTable::new(25, vec![]).is_err());
        let t = ValueTable::from_entries(1, vec![(1, 2.0), (0, 1.0)]).unwrap();
        assert_eq!(t.as_slice(), &[1.0, 2.0]);
        assert_eq!(ValueTable::new(0, vec![3.0]).unwrap().len(), 1);
    }

    #[test]
    fn salient_set_sorts_and_rejects_duplicates() {
        let s = SalientSet::new(
            2,
            vec![
                SalientEntry {
                    mask: m(3),
                    effect: 2.0,
                },
                SalientEntry {
                    mask: m(1),
                    effect: 1.0,
                },
                SalientEntry {
                    mask: m(2),
                    effect: -2.0,
                },
            ],
        )
        .unwrap();
        let masks: Vec<_> = s.masks().collect();
        assert_eq!(masks, vec![m(2), m(3), m(1)]);
        let dup = SalientSet::new(
            2,
            vec![
                SalientEntry {
                    mask: m(1),
                    effect: 1.0,
                },
                SalientEntry {
                    mask: m(1),
                    effect: 1.0,
                },
            ],
        );
        assert!(matches!(dup, Err(Error::DuplicateMask { mask: 1 })));
    }

    proptest! {
        #[test]
        fn subsets_are_exactly_the_submasks(bits in 0u32..(1 << 12)) {
            let mask = m(bits);
            let subs: Vec<_> = subsets_of(mask).collect();
            prop_assert_eq!(subs.len(), 1usize << bits.count_ones());
            prop_assert!(subs.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(subs.iter().all(|s| s.is_subset_of(mask)));
            let brute = (0..(1u32 << 12)).filter(|t| t & !bits == 0).count();
            prop_assert_eq!(brute, subs.len());
        }

        #[test]
        fn complement_is_an_involution(n in 0usize..=N_MAX, raw in any::<u32>()) {
            let mask = m(raw & SubsetMask::full(n).bits());
            let c = complement(mask, n).unwrap();
            prop_assert_eq!(complement(c, n).unwrap(), mask);
            prop_assert_eq!(c.bits() & mask.bits(), 0);
        }
    }
}
