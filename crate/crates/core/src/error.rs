use num_bigint::BigInt;
use thiserror::Error;

use crate::correl::CorrelationResult;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A construction parameter violated a documented invariant.
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// Primality is a precondition for the algebraic spacer family.
    #[error("{p} is not prime (divisible by {factor})")]
    NotPrime { p: u64, factor: u64 },

    #[error("prime {p} exceeds the supported bound 2^31")]
    PrimeTooLarge { p: u64 },

    #[error("stage {stage} out of range (schedule has {max} cutting stages)")]
    StageOutOfRange { stage: usize, max: usize },

    #[error("tower {tower} out of range (schedule has {max} towers)")]
    TowerOutOfRange { tower: usize, max: usize },

    /// Raised by operations that need per-stage algebraic parameters
    /// (bulk spacer height, generator) that the schedule does not carry.
    #[error("stage {stage} is not an algebraic stage")]
    NotAlgebraic { stage: usize },

    #[error("level {level} outside [0, {height}] in tower {tower}")]
    LevelOutOfRange {
        tower: usize,
        level: BigInt,
        height: BigInt,
    },

    #[error("level sets live at different stages ({a} vs {b})")]
    StageMismatch { a: usize, b: usize },

    /// Memory guard: expanding to the requested stage would materialize more
    /// positions than the configured cap.
    #[error("expansion needs {needed} positions, exceeding the cap of {cap}")]
    PositionCapExceeded { needed: u128, cap: usize },

    #[error("shift {m} exceeds the working tower height {height}")]
    ShiftTooLarge { m: BigInt, height: BigInt },

    /// No tower is tall enough to host the requested shift.
    #[error("shift {m} out of range for this schedule (stage {stage} sets)")]
    ShiftOutOfRange { m: BigInt, stage: usize },

    /// The requested tolerance could not be met before the schedule ran out
    /// of cutting stages; the best bracket obtained is attached.
    #[error(
        "unresolved mass {unresolved} above tolerance {tolerance} with no deeper stage available",
        unresolved = best.upper.clone() - best.lower.clone(),
    )]
    ToleranceUnreachable {
        tolerance: num_rational::BigRational,
        best: Box<CorrelationResult>,
    },

    /// No cut count within the cap certifies the growth-rate threshold.
    #[error(
        "decay stage {stage}: no cut count r <= {cap} reaches the threshold (best height attained: {attained})"
    )]
    DecayCapExceeded {
        stage: usize,
        cap: u64,
        attained: BigInt,
    },

    /// A certified comparison stayed inconclusive at the maximum precision.
    #[error("directed-rounding comparison inconclusive at maximum precision ({context})")]
    Inconclusive { context: String },

    #[error("malformed schedule: {0}")]
    Json(#[from] serde_json::Error),
}
