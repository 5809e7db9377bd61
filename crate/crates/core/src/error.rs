use thiserror::Error;

use crate::Point;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("lattice of rank {rank} in dimension {dim} is not of finite index")]
    RankDeficient { rank: usize, dim: usize },

    #[error("too large: {0}")]
    TooLarge(String),

    #[error("tile must be non-empty")]
    EmptyTile,

    #[error("tuple is not independent (witness {witness:?})")]
    NotIndependent { witness: Vec<Point> },

    #[error("expected a tuple of length {expected}, found {found}")]
    WrongArity { expected: usize, found: usize },

    #[error("function takes non-integer values")]
    NonIntegerValues,

    #[error("precondition not verified: {0}")]
    PreconditionUnverified(String),

    #[error("not a co-tile: {0}")]
    NotACotile(String),

    #[error("the tuple does not have property (*)")]
    PropertyStarRequired,

    #[error("subset of Z/{p}Z must be non-empty and proper")]
    EmptyOrFull { p: u64 },

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("translation {0:?} is not in the lattice")]
    OutOfLattice(Point),

    #[error("the tile {{0}} has no brother tiles")]
    TrivialTile,

    #[error("the tile does not tile with the given co-tile")]
    NotATiling,

    #[error("stabilizer of the co-tile is not of finite index")]
    RankDeficientStabilizer,

    #[error("verification failed: {0}")]
    VerificationFailed(String),

    #[error("input is not a joint co-tile: {0}")]
    InputNotCotile(String),

    #[error("input contract violation: {0}")]
    InputContractViolation(String),

    #[error("no cycle found in the block graph")]
    NoCycle,

    #[error("pieces do not partition Z^d: {0}")]
    NotAPartition(String),

    #[error("no common stabilizer of rank {needed}: intersection has rank {rank}")]
    NoCommonStabilizer { needed: usize, rank: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("malformed JSON: {0}")]
    Malformed(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
