use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::Duration;

use thiserror::Error;

use super::{Oracle, OracleError};
use crate::lattice::{SubsetMask, ValueTable, N_MAX};

/// Knobs for [`evaluate_all`].
#[derive(Debug, Clone, PartialEq)]
pub struct EvalOptions {
    /// Worker threads issuing queries.
    pub parallelism: usize,
    /// Masks handed to [`Oracle::query_batch`] at once (requests in flight per worker).
    pub batch_size: usize,
    /// Extra attempts per failed mask.
    pub retries: u32,
    /// Delay before the first retry; doubles on each further attempt.
    pub backoff: Duration,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            parallelism: 1,
            batch_size: 256,
            retries: 3,
            backoff: Duration::from_millis(10),
        }
    }
}

impl EvalOptions {
    pub fn with_parallelism(mut self, parallelism: usize) -> Self {
        self.parallelism = parallelism;
        self
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("oracle failed at mask {mask} after {attempts} attempts ({completed} queries completed): {source}")]
    Failed {
        mask: SubsetMask,
        attempts: u32,
        completed: usize,
        #[source]
        source: OracleError,
    },

    #[error("invalid evaluation options: {0}")]
    InvalidOptions(String),
}

impl EvalError {
    pub fn oracle_error(&self) -> Option<&OracleError> {
        match self {
            EvalError::Failed { source, .. } => Some(source),
            EvalError::InvalidOptions(_) => None,
        }
    }
}

struct Failure {
    mask: SubsetMask,
    attempts: u32,
    source: OracleError,
}

fn finite(mask: SubsetMask, r: Result<f64, OracleError>) -> Result<f64, OracleError> {
    match r {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(v) => Err(OracleError::Malformed(format!(
            "non-finite value {v} at mask {}",
            mask.bits()
        ))),
        Err(e) => Err(e),
    }
}

fn retry(
    oracle: &dyn Oracle,
    mask: SubsetMask,
    first: OracleError,
    opts: &EvalOptions,
) -> Result<f64, Failure> {
    let mut last = first;
    let mut delay = opts.backoff;
    for _ in 0..opts.retries {
        if !delay.is_zero() {
            thread::sleep(delay);
        }
        match finite(mask, oracle.query(mask)) {
            Ok(v) => return Ok(v),
            Err(e) => last = e,
        }
        delay = delay.saturating_mul(2);
    }
    Err(Failure {
        mask,
        attempts: opts.retries + 1,
        source: last,
    })
}

fn run_chunk(
    oracle: &dyn Oracle,
    start: usize,
    out: &mut [f64],
    opts: &EvalOptions,
    completed: &AtomicUsize,
) -> Result<(), Failure> {
    let masks: Vec<SubsetMask> = (start..start + out.len())
        .map(|i| SubsetMask::from_bits(i as u32))
        .collect();
    let answers = oracle.query_batch(&masks);
    if answers.len() != masks.len() {
        return Err(Failure {
            mask: masks[answers.len().min(masks.len() - 1)],
            attempts: 1,
            source: OracleError::Protocol(format!(
                "batch of {} masks returned {} answers",
                masks.len(),
                answers.len()
            )),
        });
    }
    for ((slot, &mask), answer) in out.iter_mut().zip(&masks).zip(answers) {
        *slot = match finite(mask, answer) {
            Ok(v) => v,
            Err(e) => retry(oracle, mask, e, opts)?,
        };
        completed.fetch_add(1, Ordering::Relaxed);
    }
    Ok(())
}

/// Queries every mask exactly once and assembles the dense value table.
///
/// Results are placed by mask index, so the table does not depend on the
/// order in which concurrent queries complete. Failed queries are retried
/// with exponential backoff; a mask that keeps failing aborts the sweep.
pub fn evaluate_all(oracle: &dyn Oracle, opts: &EvalOptions) -> Result<ValueTable, EvalError> {
    let n = oracle.n();
    if n > N_MAX {
        return Err(EvalError::InvalidOptions(format!(
            "oracle declares n = {n}, limit is {N_MAX}"
        )));
    }
    if opts.parallelism == 0 || opts.batch_size == 0 {
        return Err(EvalError::InvalidOptions(
            "parallelism and batch size must be at least 1".into(),
        ));
    }
    let size = 1usize << n;
    let mut data = vec![0.0; size];
    let completed = AtomicUsize::new(0);

    let chunks: Vec<(usize, &mut [f64])> = data
        .chunks_mut(opts.batch_size)
        .enumerate()
        .map(|(i, c)| (i * opts.batch_size, c))
        .collect();
    let workers = opts.parallelism.min(chunks.len());

    let failure = if workers <= 1 {
        chunks
            .into_iter()
            .find_map(|(start, out)| run_chunk(oracle, start, out, opts, &completed).err())
    } else {
        let queue = Mutex::new(chunks.into_iter());
        let abort = AtomicBool::new(false);
        let first_failure: Mutex<Option<Failure>> = Mutex::new(None);
        thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    if abort.load(Ordering::Relaxed) {
                        break;
                    }
                    let next = queue.lock().unwrap_or_else(|e| e.into_inner()).next();
                    let Some((start, out)) = next else { break };
                    if let Err(f) = run_chunk(oracle, start, out, opts, &completed) {
                        abort.store(true, Ordering::Relaxed);
                        let mut slot = first_failure.lock().unwrap_or_else(|e| e.into_inner());
                        // keep the lowest failing mask so reports are stable
                        if slot.as_ref().is_none_or(|g| f.mask < g.mask) {
                            *slot = Some(f);
                        }
                        break;
                    }
                });
            }
        });
        first_failure
            .into_inner()
            .unwrap_or_else(|e| e.into_inner())
    };

    if let Some(f) = failure {
        return Err(EvalError::Failed {
            mask: f.mask,
            attempts: f.attempts,
            completed: completed.load(Ordering::Relaxed),
            source: f.source,
        });
    }
    Ok(ValueTable::new(n, data).expect("all entries were checked finite"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{make_planted, FnOracle, TableOracle};
    use crate::transform::{mobius_inverse, zeta_transform};
    use std::sync::atomic::AtomicU32;

    fn fast() -> EvalOptions {
        EvalOptions {
            backoff: Duration::ZERO,
            batch_size: 7,
            ..EvalOptions::default()
        }
    }

    #[test]
    fn zero_player_oracle_gives_single_entry() {
        let o = FnOracle::new(0, |_| Ok(4.5));
        let t = evaluate_all(&o, &fast()).unwrap();
        assert_eq!(t.as_slice(), &[4.5]);
    }

    #[test]
    fn planted_model_evaluates_to_zeta_of_ground_truth() {
        let (model, truth) = make_planted(3, 3, 11, 0.0).unwrap();
        let t = evaluate_all(&model, &fast()).unwrap();
        assert_eq!(t, zeta_transform(&truth));
    }

    #[test]
    fn parallel_and_sequential_agree() {
        let (model, _) = make_planted(12, 25, 5, 0.02).unwrap();
        let seq = evaluate_all(&model, &fast()).unwrap();
        for p in [2, 3, 8] {
            let par = evaluate_all(&model, &fast().with_parallelism(p)).unwrap();
            assert_eq!(seq.as_slice(), par.as_slice());
        }
        let table = TableOracle::new(seq.clone());
        let par = evaluate_all(&table, &fast().with_parallelism(4)).unwrap();
        assert_eq!(seq, par);
    }

    #[test]
    fn persistent_failure_names_the_mask() {
        let o = FnOracle::new(4, |m| {
            if m.bits() == 5 {
                Err(OracleError::Transport("connection reset".into()))
            } else {
                Ok(m.bits() as f64)
            }
        });
        for p in [1, 3] {
            let err = evaluate_all(&o, &fast().with_parallelism(p)).unwrap_err();
            match err {
                EvalError::Failed {
                    mask,
                    attempts,
                    completed,
                    ref source,
                } => {
                    assert_eq!(mask, SubsetMask::from_bits(5));
                    assert_eq!(attempts, 4);
                    assert!(completed < 16);
                    assert!(source.is_transport());
                }
                other => panic!("unexpected {other:?}"),
            }
        }
    }

    #[test]
    fn transient_failure_is_retried() {
        let calls = AtomicU32::new(0);
        let o = FnOracle::new(3, |m| {
            if m.bits() == 6 && calls.fetch_add(1, Ordering::SeqCst) < 2 {
                Err(OracleError::Timeout { id: 0, after_ms: 1 })
            } else {
                Ok(f64::from(m.bits()))
            }
        });
        let t = evaluate_all(&o, &fast()).unwrap();
        assert_eq!(t.get(SubsetMask::from_bits(6)), 6.0);
        assert_eq!(calls.load(Ordering::SeqCst), 3);
    }

    #[test]
    fn non_finite_values_are_rejected() {
        let o = FnOracle::new(2, |m| Ok(if m.bits() == 2 { f64::NAN } else { 1.0 }));
        let err = evaluate_all(&o, &fast()).unwrap_err();
        assert!(matches!(
            err,
            EvalError::Failed {
                source: OracleError::Malformed(_),
                ..
            }
        ));
    }

    #[test]
    fn planted_recovery_through_evaluation() {
        let (model, truth) = make_planted(14, 20, 3, 0.0).unwrap();
        let v = evaluate_all(&model, &EvalOptions::default().with_parallelism(4)).unwrap();
        let rec = mobius_inverse(&v);
        let nonzero = rec.iter().filter(|(_, x)| x.abs() > 1e-9).count();
        assert_eq!(nonzero, 20);
        for (mask, x) in rec.iter() {
            assert!((x - truth.get(mask)).abs() < 1e-9);
        }
    }

    #[test]
    fn invalid_options_are_refused() {
        let o = FnOracle::new(1, |_| Ok(0.0));
        let opts = EvalOptions {
            parallelism: 0,
            ..EvalOptions::default()
        };
        assert!(matches!(
            evaluate_all(&o, &opts),
            Err(EvalError::InvalidOptions(_))
        ));
    }
}
