//! Error type shared by every module in the crate.

use crate::pattern::PatternTag;

/// Everything that can go wrong outside of ordinary "no certificate found"
/// outcomes, which are modelled with `Option`.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A closed-form bound was evaluated at a point outside its hypotheses.
    /// The reason string names the violated hypothesis; audit reports turn
    /// this into a not-applicable entry rather than a failure.
    #[error("bound not applicable: {0}")]
    NotApplicable(String),

    /// A parameter or input that must be finite was NaN or infinite.
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    /// A per-instance loss exponent crossed the overflow guard. The offending
    /// exponent is carried so a caller can report how far past the guard the
    /// iterate landed.
    #[error("loss exponent {exponent} exceeds the overflow guard")]
    Diverged { exponent: f64 },

    /// A precondition on an argument failed (non-positive step size, empty
    /// range, malformed window, and so on).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// `closed_form_step` was asked to apply one regime's update to a point
    /// that classifies as a different regime.
    #[error("pattern mismatch: requested {requested}, point classifies as {actual}")]
    PatternMismatch {
        requested: PatternTag,
        actual: PatternTag,
    },

    /// No closed-form update exists for the degenerate pattern.
    #[error("degenerate activation pattern has no closed-form update")]
    DegeneratePattern,

    /// A direction was requested for the zero vector.
    #[error("zero vector has no direction")]
    ZeroVector,

    /// A fit window selected no recorded steps.
    #[error("window selects no recorded steps")]
    EmptyWindow,

    /// A certificate violated its own sign constraints.
    #[error("invalid certificate: {0}")]
    InvalidCertificate(String),

    /// A statistical comparison was asked to run on too small a sample.
    #[error("need at least {needed} samples, got {got}")]
    NotEnoughSamples { needed: usize, got: usize },

    /// A trajectory took an edge outside the allowed phase graph after the
    /// point was classified.
    #[error("disallowed transition {from} -> {to} at step {t}")]
    DisallowedTransition {
        t: u64,
        from: PatternTag,
        to: PatternTag,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
