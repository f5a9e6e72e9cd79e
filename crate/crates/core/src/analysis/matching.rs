use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::extract_salient;
use crate::error::{Error, Result};
use crate::lattice::{InteractionTable, SubsetMask, ValueTable};
use crate::transform::{approximate_all, partial_sum};

/// Half-width of the RMSE window: 51 neighbouring samples.
pub const DEFAULT_HALF_WINDOW: usize = 25;

/// Largest `n` for which [`Sample::All`] is accepted.
pub const EXHAUSTIVE_MAX_N: usize = 20;

/// Which masks a matching curve is evaluated on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sample {
    All,
    /// This many distinct masks drawn uniformly without replacement.
    Count(usize),
}

/// RMSE over a window clamped at the series ends:
/// `out[i] = sqrt(mean(errors[j]^2 for j in [i - t, i + t]))`.
pub fn windowed_rmse(errors: &[f64], half_window: usize) -> Result<Vec<f64>> {
    if errors.is_empty() {
        return Err(Error::invalid("windowed RMSE of an empty series"));
    }
    let last = errors.len() - 1;
    Ok((0..errors.len())
        .map(|i| {
            let window = &errors[i.saturating_sub(half_window)..=(i + half_window).min(last)];
            let sq: f64 = window.iter().map(|e| e * e).sum();
            (sq / window.len() as f64).sqrt()
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchingRecord {
    pub mask: SubsetMask,
    pub v_real: f64,
    pub v_approx: f64,
    /// `v_real - v_approx`
    pub error: f64,
    pub windowed_rmse: f64,
}

/// Real versus salient-only reconstructed outputs, sorted by real output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchingCurve {
    pub salient_count: usize,
    pub half_window: usize,
    pub records: Vec<MatchingRecord>,
}

impl MatchingCurve {
    pub fn mean_rmse(&self) -> f64 {
        self.records.iter().map(|r| r.windowed_rmse).sum::<f64>() / self.records.len() as f64
    }

    pub fn max_abs_error(&self) -> f64 {
        self.records
            .iter()
            .map(|r| r.error.abs())
            .fold(0.0, f64::max)
    }
}

/// Compares `values` against the reconstruction from the top-`m` interactions.
///
/// `seed` only matters for [`Sample::Count`].
pub fn matching_curve(
    values: &ValueTable,
    interactions: &InteractionTable,
    m: usize,
    half_window: usize,
    sample: Sample,
    seed: u64,
) -> Result<MatchingCurve> {
    let n = values.n();
    if interactions.n() != n {
        return Err(Error::ArityMismatch {
            expected: n,
            found: interactions.n(),
        });
    }
    let salient = extract_salient(interactions, m)?;

    let mut records: Vec<MatchingRecord> = match sample {
        Sample::All => {
            if n > EXHAUSTIVE_MAX_N {
                return Err(Error::invalid(format!(
                    "exhaustive matching refused for n = {n} (limit {EXHAUSTIVE_MAX_N}); sample instead"
                )));
            }
            let approx = approximate_all(interactions, &salient)?;
            values
                .iter()
                .zip(approx.as_slice())
                .map(|((mask, v_real), &v_approx)| record(mask, v_real, v_approx))
                .collect()
        }
        Sample::Count(k) => {
            if k == 0 || k > values.len() {
                return Err(Error::invalid(format!(
                    "sample size {k} outside 1..={}",
                    values.len()
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut picked = index::sample(&mut rng, values.len(), k).into_vec();
            picked.sort_unstable();
            picked
                .into_iter()
                .map(|i| {
                    let mask = SubsetMask::from_bits(i as u32);
                    partial_sum(interactions, &salient, mask)
                        .map(|v_approx| record(mask, values.get(mask), v_approx))
                })
                .collect::<Result<_>>()?
        }
    };

    records.sort_by(|a, b| a.v_real.total_cmp(&b.v_real).then(a.mask.cmp(&b.mask)));
    let errors: Vec<f64> = records.iter().map(|r| r.error).collect();
    for (r, rmse) in records.iter_mut().zip(windowed_rmse(&errors, half_window)?) {
        r.windowed_rmse = rmse;
    }
    Ok(MatchingCurve {
        salient_count: m,
        half_window,
        records,
    })
}

fn record(mask: SubsetMask, v_real: f64, v_approx: f64) -> MatchingRecord {
    MatchingRecord {
        mask,
        v_real,
        v_approx,
        error: v_real - v_approx,
        windowed_rmse: 0.0,
    }
}
