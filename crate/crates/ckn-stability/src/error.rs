use thiserror::Error;

/// Error type shared by all toolkit operations.
#[derive(Debug, Clone, Error)]
pub enum CknError {
    /// Inputs are non-finite or outside the documented domain.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Parameters fit none of the supported inequality regimes.
    #[error("unsupported parameter regime: {0}")]
    UnsupportedRegime(String),

    /// A minimizer-family operation was called with params of another regime.
    #[error("regime mismatch: {0}")]
    RegimeMismatch(String),

    /// Refinement/subdivision budget exhausted without meeting the tolerance.
    #[error("quadrature or iteration did not converge: {0}")]
    NonConvergence(String),

    /// Successive quadrature refinements diverge: non-integrable endpoint.
    #[error("singular endpoint detected: {0}")]
    SingularEndpoint(String),

    /// Minimization bracket is empty or invalid.
    #[error("invalid bracket: {0}")]
    InvalidBracket(String),

    /// A norm in a denominator is zero up to tolerance.
    #[error("zero denominator: {0}")]
    ZeroDenominator(String),

    /// A second-order functional was applied to a function without `d2u`.
    #[error("missing second radial derivative")]
    MissingSecondDerivative,

    /// Sampled profile grids are too short, non-increasing or non-positive.
    #[error("bad samples: {0}")]
    BadSamples(String),

    /// An optimizer argmin is pinned to the edge of its search box.
    #[error("search hit the box boundary: {0}")]
    BoundaryHit(String),
}

pub type Result<T> = std::result::Result<T, CknError>;
