//! Error type shared by every module of the crate.

use thiserror::Error;

use crate::group::ModeIndex;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong while building operators, solving modes, or
/// checking solvability conditions.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Invalid caller-supplied data (shape mismatches, bad frequencies, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The coupling coefficient alpha must be nonzero.
    #[error("alpha must be nonzero")]
    ZeroAlpha,

    /// A profile required to be nonnegative dipped below zero.
    #[error("profile is negative at t = {t}: value {value}")]
    NotNonnegative { t: f64, value: f64 },

    /// A profile required to be not identically zero has all coefficients zero.
    #[error("profile is identically zero")]
    IdenticallyZero,

    /// rho = sqrt((a - i delta)^2 + |alpha|^2) vanished, so the 2x2 coupling
    /// matrix is not diagonalizable and the closed-form solver does not apply.
    #[error("degenerate mode algebra: rho = 0 at a = {a}, delta = {delta}, |alpha| = {alpha_abs}")]
    DegenerateRho { a: f64, delta: f64, alpha_abs: f64 },

    /// One or more boundary denominators fell below the resonance tolerance.
    /// `modes` is empty when the failure was detected outside a field solve.
    #[error("resonant mode(s): |D1| = {d1_abs:.3e}, |D2| = {d2_abs:.3e}")]
    ResonantMode {
        modes: Vec<ModeIndex>,
        d1_abs: f64,
        d2_abs: f64,
    },

    /// The shooting oracle found the periodicity system singular.
    #[error("singular monodromy: |det(I - Phi(2pi))| = {det_abs:.3e}")]
    SingularMonodromy { det_abs: f64 },

    /// A mode's conjugate partner is missing from a truncated field.
    #[error("truncation is not conjugation-closed: missing partner of {mode}")]
    TruncationAsymmetry { mode: ModeIndex },

    /// The two components of a paired field are not conjugates of each other.
    #[error("paired field inconsistent at {mode}: deviation {deviation:.3e}")]
    PairingInconsistent { mode: ModeIndex, deviation: f64 },

    /// A mode index does not belong to the group model it was used with.
    #[error("inadmissible mode: {0}")]
    InadmissibleMode(String),

    /// The lambda-zero classifier was called with some lambda_j != 0.
    #[error("classifier requires lambda = 0 on every factor")]
    LambdaNotZero,

    /// |alpha| = |delta| sits outside the classifier's hypotheses.
    #[error("hypothesis violation: |alpha| = |delta| = {value}")]
    HypothesisViolation { value: f64 },

    /// Quadrature or reconstruction produced a non-finite value.
    #[error("quadrature failure: {0}")]
    QuadratureFailure(String),
}

impl Error {
    /// Stable machine-readable label, used by the CLI for exit-code mapping.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid-input",
            Error::ZeroAlpha => "zero-alpha",
            Error::NotNonnegative { .. } => "not-nonnegative",
            Error::IdenticallyZero => "identically-zero",
            Error::DegenerateRho { .. } => "degenerate-rho",
            Error::ResonantMode { .. } => "resonant-mode",
            Error::SingularMonodromy { .. } => "singular-monodromy",
            Error::TruncationAsymmetry { .. } => "truncation-asymmetry",
            Error::PairingInconsistent { .. } => "pairing-inconsistent",
            Error::InadmissibleMode(_) => "inadmissible-mode",
            Error::LambdaNotZero => "lambda-not-zero",
            Error::HypothesisViolation { .. } => "hypothesis-violation",
            Error::QuadratureFailure(_) => "quadrature-failure",
        }
    }
}
