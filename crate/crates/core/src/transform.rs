//! Exact conversions between value tables and Harsanyi interaction tables.
//!
//! The fast transforms sweep one bit position at a time over the dense table,
//! `n * 2^(n-1)` additions in total. The reference form evaluates the signed
//! subset sum literally and is kept as an independent check.

use crate::error::{Error, Result};
use crate::lattice::{subsets_of, InteractionTable, SalientSet, SubsetMask, ValueTable};

/// Largest `n` accepted by [`mobius_inverse_reference`] (3^16 ≈ 4.3e7 terms).
pub const REFERENCE_MAX_N: usize = 16;

fn layered(data: &mut [f64], n: usize, combine: impl Fn(&mut f64, f64)) {
    for bit in 0..n {
        let half = 1usize << bit;
        for block in data.chunks_exact_mut(half << 1) {
            let (without, with) = block.split_at_mut(half);
            for (hi, &lo) in with.iter_mut().zip(without.iter()) {
                combine(hi, lo);
            }
        }
    }
}

/// Harsanyi interactions `I(S) = Σ_{T⊆S} (-1)^{|S|-|T|} v(T)` via the signed subset-sum transform.
pub fn mobius_inverse(values: &ValueTable) -> InteractionTable {
    let n = values.n();
    let mut data = values.to_vec();
    layered(&mut data, n, |hi, lo| *hi -= lo);
    InteractionTable::from_raw(n, data)
}

/// Literal double loop over `S` and `T ⊆ S`. Refuses `n > REFERENCE_MAX_N`.
pub fn mobius_inverse_reference(values: &ValueTable) -> Result<InteractionTable> {
    let n = values.n();
    if n > REFERENCE_MAX_N {
        return Err(Error::ReferenceTooLarge {
            n,
            max: REFERENCE_MAX_N,
        });
    }
    let data = (0..values.len())
        .map(|s| {
            let s = SubsetMask::from_bits(s as u32);
            subsets_of(s)
                .map(|t| {
                    let v = values.get(t);
                    if (s.len() - t.len()).is_multiple_of(2) {
                        v
                    } else {
                        -v
                    }
                })
                .sum()
        })
        .collect();
    InteractionTable::new(n, data)
}

/// Reconstruction `v(S) = Σ_{T⊆S} I(T)` via the unsigned subset-sum transform.
pub fn zeta_transform(interactions: &InteractionTable) -> ValueTable {
    let n = interactions.n();
    let mut data = interactions.to_vec();
    layered(&mut data, n, |hi, lo| *hi += lo);
    ValueTable::from_raw(n, data)
}

/// Truncated reconstruction at one mask: the sum of salient effects triggered by `query`.
pub fn partial_sum(
    interactions: &InteractionTable,
    salient: &SalientSet,
    query: SubsetMask,
) -> Result<f64> {
    check_salient(interactions, salient)?;
    if !query.fits(interactions.n()) {
        return Err(Error::MaskOutOfRange {
            mask: u64::from(query.bits()),
            n: interactions.n(),
        });
    }
    Ok(salient
        .entries()
        .iter()
        .filter(|e| e.mask.is_subset_of(query))
        .map(|e| e.effect)
        .sum())
}

/// Interaction table holding only the salient effects, zero elsewhere.
pub fn restrict_to_salient(
    interactions: &InteractionTable,
    salient: &SalientSet,
) -> Result<InteractionTable> {
    check_salient(interactions, salient)?;
    let mut data = vec![0.0; interactions.len()];
    for e in salient.entries() {
        data[e.mask.index()] = e.effect;
    }
    InteractionTable::new(interactions.n(), data)
}

/// Truncated reconstruction at every mask at once, `zeta(restrict_to_salient(..))`.
pub fn approximate_all(
    interactions: &InteractionTable,
    salient: &SalientSet,
) -> Result<ValueTable> {
    Ok(zeta_transform(&restrict_to_salient(interactions, salient)?))
}

fn check_salient(interactions: &InteractionTable, salient: &SalientSet) -> Result<()> {
    if salient.source_n() != interactions.n() {
        return Err(Error::ArityMismatch {
            expected: interactions.n(),
            found: salient.source_n(),
        });
    }
    Ok(())
}

/// Largest `|a - b| / max(1, |b|)` over all masks, with the mask where it occurs.
///
/// The first mask wins on ties. Errors on arity mismatch.
pub fn max_relative_deviation(actual: &[f64], expected: &[f64]) -> Result<(f64, SubsetMask)> {
    max_deviation_by(actual, expected, |a, b| (a - b).abs() / b.abs().max(1.0))
}

/// Largest `|a - b|` over all masks, with the mask where it occurs.
pub fn max_absolute_deviation(actual: &[f64], expected: &[f64]) -> Result<(f64, SubsetMask)> {
    max_deviation_by(actual, expected, |a, b| (a - b).abs())
}

fn max_deviation_by(
    actual: &[f64],
    expected: &[f64],
    dev: impl Fn(f64, f64) -> f64,
) -> Result<(f64, SubsetMask)> {
    if actual.len() != expected.len() {
        return Err(Error::DimensionMismatch {
            left: actual.len(),
            right: expected.len(),
        });
    }
    let mut worst = (0.0, SubsetMask::EMPTY);
    for (i, (&a, &b)) in actual.iter().zip(expected).enumerate() {
        let d = dev(a, b);
        if d > worst.0 {
            worst = (d, SubsetMask::from_bits(i as u32));
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::SalientEntry;
    use proptest::prelude::*;

    fn vt(n: usize, v: &[f64]) -> ValueTable {
        ValueTable::new(n, v.to_vec()).unwrap()
    }

    fn it(n: usize, v: &[f64]) -> InteractionTable {
        InteractionTable::new(n, v.to_vec()).unwrap()
    }

    fn m(bits: u32) -> SubsetMask {
        SubsetMask::from_bits(bits)
    }

    #[test]
    fn constant_function_has_only_the_empty_interaction() {
        let v = vt(3, &[2.5; 8]);
        let i = mobius_inverse(&v);
        assert_eq!(i.get(m(0)), 2.5);
        assert!(i.as_slice()[1..].iter().all(|&x| x == 0.0));
        assert_eq!(mobius_inverse_reference(&v).unwrap(), i);
    }

    #[test]
    fn two_player_examples() {
        let i = mobius_inverse(&vt(2, &[0.0, 1.0, 2.0, 5.0]));
        assert_eq!(i.as_slice(), &[0.0, 1.0, 2.0, 2.0]);
        let and = mobius_inverse(&vt(2, &[0.0, 0.0, 0.0, 1.0]));
        assert_eq!(and.as_slice(), &[0.0, 0.0, 0.0, 1.0]);
        assert_eq!(
            mobius_inverse_reference(&vt(2, &[0.0, 1.0, 2.0, 5.0]))
                .unwrap()
                .as_slice(),
            &[0.0, 1.0, 2.0, 2.0]
        );
    }

    #[test]
    fn zeta_examples() {
        let mut c = vec![0.0; 8];
        c[0] = -1.5;
        let v = zeta_transform(&it(3, &c));
        assert!(v.as_slice().iter().all(|&x| x == -1.5));
        let v = zeta_transform(&it(2, &[0.0, 1.0, 2.0, 2.0]));
        assert_eq!(v.as_slice(), &[0.0, 1.0, 2.0, 5.0]);
    }

    #[test]
    fn reference_refuses_large_n() {
        let v = ValueTable::new(17, vec![0.0; 1 << 17]).unwrap();
        assert!(matches!(
            mobius_inverse_reference(&v),
            Err(Error::ReferenceTooLarge { n: 17, max: 16 })
        ));
    }

    #[test]
    fn partial_sum_examples() {
        let i = it(2, &[0.0, 1.0, 2.0, 2.0]);
        let all = SalientSet::from_masks(&i, (0..4).map(m)).unwrap();
        let v = zeta_transform(&i);
        for s in 0..4 {
            assert_eq!(partial_sum(&i, &all, m(s)).unwrap(), v.get(m(s)));
        }
        let none = SalientSet::new(2, vec![]).unwrap();
        for s in 0..4 {
            assert_eq!(partial_sum(&i, &none, m(s)).unwrap(), 0.0);
        }
        let two = SalientSet::from_masks(&i, [m(0b01), m(0b11)]).unwrap();
        assert_eq!(partial_sum(&i, &two, m(0b11)).unwrap(), 3.0);
    }

    #[test]
    fn partial_sum_rejects_arity_mismatch() {
        let i = it(2, &[0.0, 1.0, 2.0, 2.0]);
        let other = SalientSet::new(
            3,
            vec![SalientEntry {
                mask: m(4),
                effect: 1.0,
            }],
        )
        .unwrap();
        assert!(matches!(
            partial_sum(&i, &other, m(1)),
            Err(Error::ArityMismatch {
                expected: 2,
                found: 3
            })
        ));
        let ok = SalientSet::new(2, vec![]).unwrap();
        assert!(matches!(
            partial_sum(&i, &ok, m(4)),
            Err(Error::MaskOutOfRange { .. })
        ));
    }

    #[test]
    fn adding_an_entry_changes_only_supersets() {
        let i = it(3, &[0.5, 1.0, -2.0, 0.25, 3.0, 0.0, -1.0, 4.0]);
        let base = SalientSet::from_masks(&i, [m(0b001), m(0b110)]).unwrap();
        let more = SalientSet::from_masks(&i, [m(0b001), m(0b110), m(0b100)]).unwrap();
        for s in 0..8 {
            let q = m(s);
            let a = partial_sum(&i, &base, q).unwrap();
            let b = partial_sum(&i, &more, q).unwrap();
            if m(0b100).is_subset_of(q) {
                assert_eq!(b - a, 3.0);
            } else {
                assert_eq!(a, b);
            }
        }
    }

    fn table_strategy(max_n: usize) -> impl Strategy<Value = ValueTable> {
        (0..=max_n).prop_flat_map(|n| {
            prop::collection::vec(-1.0e3..1.0e3f64, 1 << n)
                .prop_map(move |v| ValueTable::new(n, v).unwrap())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn reference_matches_fast_at_n8(v in prop::collection::vec(-1.0e3..1.0e3f64, 256)) {
            let v = ValueTable::new(8, v).unwrap();
            let fast = mobius_inverse(&v);
            let slow = mobius_inverse_reference(&v).unwrap();
            let (dev, _) = max_absolute_deviation(fast.as_slice(), slow.as_slice()).unwrap();
            prop_assert!(dev < 1e-9, "deviation {dev}");
        }

        #[test]
        fn round_trip_is_identity(v in table_strategy(12)) {
            let back = zeta_transform(&mobius_inverse(&v));
            let (dev, _) = max_relative_deviation(back.as_slice(), v.as_slice()).unwrap();
            prop_assert!(dev < 1e-9, "deviation {dev}");
        }

        #[test]
        fn empty_interaction_equals_empty_value(v in table_strategy(10)) {
            prop_assert_eq!(mobius_inverse(&v).get(SubsetMask::EMPTY), v.get(SubsetMask::EMPTY));
        }

        #[test]
        fn planted_support_is_recovered(
            n in 1usize..=10,
            seeds in prop::collection::vec((any::<u32>(), 0.1..5.0f64), 0..12),
        ) {
            let size = 1u32 << n;
            let mut truth = vec![0.0; size as usize];
            for (raw, e) in seeds {
                truth[(raw % size) as usize] = e;
            }
            let truth = InteractionTable::new(n, truth).unwrap();
            let rec = mobius_inverse(&zeta_transform(&truth));
            for (mask, x) in rec.iter() {
                let t = truth.get(mask);
                if t == 0.0 {
                    prop_assert!(x.abs() < 1e-9);
                } else {
                    prop_assert!((x - t).abs() < 1e-9);
                }
            }
        }
    }
}
