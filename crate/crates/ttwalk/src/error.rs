use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("rank mismatch: {0} vs {1}")]
    RankMismatch(usize, usize),
    #[error("invalid rank {0}")]
    InvalidRank(usize),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("search budget of {0} exhausted")]
    SearchExhausted(usize),
    #[error("cap {0} reached before stabilization")]
    CapExceeded(usize),
    #[error("no convergence, best estimate {0}")]
    NoConvergence(f64),
    #[error("fold contradiction: {0}")]
    FoldContradiction(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_rank(a: usize, b: usize) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::RankMismatch(a, b))
    }
}
