use thiserror::Error;

/// Errors produced by the circuit, steady-state and entropy routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("determinant {det:e} too close to zero to normalize")]
    NormalizationSingular { det: f64 },

    #[error("round contains no layers")]
    EmptyRound,

    #[error("map is a multiple of the identity; every point is fixed")]
    DegenerateMap,

    #[error("z coefficient diverges: sin(2t) = 0 at t = {t}")]
    DivergentZ { t: f64 },

    #[error("critical coupling diverges at x = 0")]
    DivergesAtZero,

    #[error("momentum {k} is not critical")]
    NotCritical { k: f64 },

    #[error("amplitude is not antisymmetric under k -> -k (deviation {deviation:e})")]
    AsymmetryViolation { deviation: f64 },

    #[error("need coefficients up to |j| = {needed}, have {available}")]
    CoefficientRangeTooSmall { needed: usize, available: usize },

    #[error("correlation matrix is not antisymmetric (deviation {deviation:e})")]
    NotAntisymmetric { deviation: f64 },

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    SpectralFailure { sweeps: usize, off_norm: f64 },

    #[error("least-squares fit is degenerate: {0}")]
    DegenerateFit(String),

    #[error("fit range too narrow: max/min of (lambda_c - lambda) is {ratio}, need >= 10")]
    InsufficientRange { ratio: f64 },

    #[error("state norm {norm:e} underflowed")]
    NormUnderflow { norm: f64 },

    #[error("post-selected ancilla amplitude vanished")]
    ZeroPostSelection,

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
