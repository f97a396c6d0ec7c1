use thiserror::Error;

/// Errors raised when constructing models or evaluating quantities outside
/// their domain.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// A parameter lies outside its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A loss vector that cannot occur in the block it is evaluated against.
    #[error("invalid loss vector: {0}")]
    InvalidLossVector(String),

    /// Q(0) = 1: every block decodes cleanly, so conditional burst lengths
    /// are undefined.
    #[error("no losses possible (Q(0) = 1)")]
    NoLossesPossible,

    /// Q(0) = 0: no all-receipt block ever delimits a pattern and the
    /// multiblock series diverges.
    #[error("series diverges (Q(0) = 0)")]
    DivergentSeries,

    /// Inputs exceed the documented feasibility limit of an exhaustive or
    /// memory-bound routine.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// The sample contained no lossy blocks, so a conditional mean is
    /// undefined.
    #[error("no lossy blocks in sample")]
    NoLossySamples,
}

pub type Result<T> = core::result::Result<T, Error>;
