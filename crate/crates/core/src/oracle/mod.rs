//! Value-function sources.
//!
//! An [`Oracle`] answers `v(x_T)` for any subset mask `T`. How the players
//! outside `T` are masked is the source's own convention; nothing in this
//! crate constructs masked inputs.

mod eval;
mod external;
mod planted;

use thiserror::Error;

pub use eval::{evaluate_all, EvalError, EvalOptions};
pub use external::{
    serve, Endpoint, ExternalConfig, ExternalOracle, Handshake, Request, Response, PROTOCOL_VERSION,
};
pub use planted::{
    make_planted, PlantedConfig, PlantedModel, DEFAULT_EFFECT_CEILING, DEFAULT_EFFECT_FLOOR,
};

use crate::error::{Error, Result};
use crate::lattice::{PlayerSet, SubsetMask, ValueTable};

/// Clamp applied to probabilities before taking log-odds.
pub const LOG_ODDS_EPS: f64 = 1e-12;

/// `ln(p / (1 - p))` with `p` clamped to `[ε, 1 - ε]`.
pub fn log_odds(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("probability {p} outside [0, 1]")));
    }
    let p = p.clamp(LOG_ODDS_EPS, 1.0 - LOG_ODDS_EPS);
    Ok((p / (1.0 - p)).ln())
}

/// Failure of a single oracle query.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum OracleError {
    #[error("transport failure: {0}")]
    Transport(String),

    #[error("request {id} timed out after {after_ms} ms")]
    Timeout { id: u64, after_ms: u64 },

    #[error("protocol violation: {0}")]
    Protocol(String),

    #[error("malformed response: {0}")]
    Malformed(String),

    #[error("handshake declared n = {found}, expected n = {expected}")]
    HandshakeMismatch { expected: usize, found: usize },

    #[error("host rejected request {id}: {message}")]
    Host { id: u64, message: String },

    #[error("mask {mask} out of range for n = {n}")]
    MaskOutOfRange { mask: u32, n: usize },

    #[error("{0}")]
    Source(String),
}

impl OracleError {
    /// Transport-level failures: the byte stream broke or stalled.
    pub fn is_transport(&self) -> bool {
        matches!(
            self,
            OracleError::Transport(_) | OracleError::Timeout { .. }
        )
    }

    /// Protocol-level failures: the peer answered, but not per the protocol.
    pub fn is_protocol(&self) -> bool {
        matches!(
            self,
            OracleError::Protocol(_)
                | OracleError::Malformed(_)
                | OracleError::HandshakeMismatch { .. }
                | OracleError::Host { .. }
        )
    }
}

/// A black-box value function over subset masks.
///
/// Implementations must be deterministic (identical mask, identical value)
/// and must tolerate concurrent queries.
pub trait Oracle: Send + Sync {
    /// Player count.
    fn n(&self) -> usize;

    /// Player labels, when the source knows them.
    fn labels(&self) -> Option<&[String]> {
        None
    }

    fn query(&self, mask: SubsetMask) -> Result<f64, OracleError>;

    /// Answers several masks. Sources with request pipelining override this.
    fn query_batch(&self, masks: &[SubsetMask]) -> Vec<Result<f64, OracleError>> {
        masks.iter().map(|&m| self.query(m)).collect()
    }
}

fn check_mask(mask: SubsetMask, n: usize) -> Result<(), OracleError> {
    if mask.fits(n) {
        Ok(())
    } else {
        Err(OracleError::MaskOutOfRange {
            mask: mask.bits(),
            n,
        })
    }
}

/// Oracle backed by a preloaded value table.
#[derive(Debug, Clone)]
pub struct TableOracle {
    table: ValueTable,
    labels: Option<Vec<String>>,
}

impl TableOracle {
    pub fn new(table: ValueTable) -> Self {
        Self {
            table,
            labels: None,
        }
    }

    pub fn with_players(table: ValueTable, players: &PlayerSet) -> Result<Self> {
        if players.len() != table.n() {
            return Err(Error::ArityMismatch {
                expected: table.n(),
                found: players.len(),
            });
        }
        Ok(Self {
            table,
            labels: Some(players.labels().to_vec()),
        })
    }

    pub fn table(&self) -> &ValueTable {
        &self.table
    }
}

impl Oracle for TableOracle {
    fn n(&self) -> usize {
        self.table.n()
    }

    fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    fn query(&self, mask: SubsetMask) -> Result<f64, OracleError> {
        check_mask(mask, self.table.n())?;
        Ok(self.table.get(mask))
    }
}

/// Oracle backed by a closure. Mostly useful in tests.
pub struct FnOracle<F> {
    n: usize,
    f: F,
}

impl<F> FnOracle<F>
where
    F: Fn(SubsetMask) -> Result<f64, OracleError> + Send + Sync,
{
    pub fn new(n: usize, f: F) -> Self {
        Self { n, f }
    }
}

impl<F> Oracle for FnOracle<F>
where
    F: Fn(SubsetMask) -> Result<f64, OracleError> + Send + Sync,
{
    fn n(&self) -> usize {
        self.n
    }

    fn query(&self, mask: SubsetMask) -> Result<f64, OracleError> {
        check_mask(mask, self.n)?;
        (self.f)(mask)
    }
}
