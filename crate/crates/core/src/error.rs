//! Error types shared across the library.

use thiserror::Error;

/// Errors raised by solver, metric, and GA operations.
///
/// Data-quality problems in input files are reported through
/// [`crate::io::FileError`] instead; network invariant breaches are
/// reported as [`crate::network::Violation`] values, not errors.
#[derive(Debug, Error)]
pub enum Error {
    /// A phase value outside {1, 2, 3}.
    #[error("invalid phase value {0}: must be 1, 2 or 3")]
    InvalidPhase(u8),

    /// An assignment does not cover the network's movable customers.
    #[error("assignment does not match network: {0}")]
    InvalidAssignment(String),

    /// Two gene vectors of different lengths were combined.
    #[error("gene vectors have different lengths ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },

    /// A snapshot is missing the load of a customer present in the network.
    #[error("snapshot has no load entry for customer {0}")]
    MissingLoad(String),

    /// Imbalance of a dead feeder (all three phase currents zero).
    #[error("mean phase current is zero")]
    ZeroMeanCurrent,

    /// An aggregate over an empty per-snapshot series.
    #[error("empty snapshot series")]
    EmptySeries,

    /// Objective weights that cannot form a convex combination.
    #[error("invalid objective weights: {0}")]
    InvalidWeights(String),

    /// GA configuration that violates its own invariants.
    #[error("invalid GA configuration: {0}")]
    InvalidConfig(String),

    /// The GA has nothing to optimize.
    #[error("network has no movable customers")]
    NoMovableCustomers,

    /// A per-snapshot error with the snapshot index attached.
    #[error("snapshot {index}: {source}")]
    Snapshot {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at_snapshot(self, index: usize) -> Error {
        Error::Snapshot {
            index,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
