//! Election tallying for plurality, approval, and the beta(k) family that
//! interpolates between them, with exact rational arithmetic throughout.
//!
//! A beta(k) ballot gives `k` points to the voter's first choice, 1 point to
//! every other approved candidate, and 0 to the rest. At `k = 1` the tally is
//! approval voting; as `k` grows past the number of voters it behaves like
//! plurality. The [`kanalysis`] module computes, for every candidate, the
//! exact set of weights `k ∈ [1, ∞)` at which that candidate wins, by taking
//! the upper envelope of the per-candidate score lines.

pub mod ballots;
pub mod cli;
pub mod criteria;
#[cfg(test)]
pub(crate) mod fixtures;
pub mod kanalysis;
pub mod rational;
pub mod simulate;
pub mod tally;

pub use ballots::{
    compose_beta, honest_ballots, parse_election, parse_profile, validate_regime_approval,
    validate_regime_plurality, BallotFormat, BallotPair, BetaEntry, BetaMatrix, CandidateSet,
    Election, PreferenceProfile,
};
pub use cli::{execute, Cli, CommandOutput, RunManifest};
pub use criteria::{
    check_monotonicity, check_pareto, check_unanimous, dictatorship_probe, pareto_winners,
    run_monotonicity, unanimous_winner, unanimous_winner_of_matrix, verdict_to_json, Criterion,
    CriterionVerdict, DictatorshipReport, MonotonicityPlan, MonotonicityRun, Perturbation,
    ProbeOutcome, Witness,
};
pub use kanalysis::{
    approval_regime_bound, check_chain, plurality_regime_bound, potential_winners, upper_envelope,
    winning_interval, KInterval, KIntervalSet, PotentialWinnerReport,
};
pub use rational::Rational;
pub use simulate::{
    derive_seed, random_profile, run_agreement, search_counterexample, search_to_json,
    AgreementStats, Counterexample, KAgreement, KExpr, SearchTarget, SimConfig,
};
pub use tally::{beta_score, score, score_lines, select_winner, winners, BaseRule, ScoreKind,
    ScoreLine, ScoreVector, WinnerSet};

/// Library-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("no candidates declared")]
    NoCandidates,
    #[error("duplicate candidate id '{id}'")]
    DuplicateCandidate { id: String },
    #[error("election has no ballots")]
    NoBallots,
    #[error("line {line}: unknown candidate id '{id}'")]
    UnknownCandidate { line: usize, id: String },
    #[error("line {line}: expected exactly one first choice")]
    BadFirstChoice { line: usize },
    #[error("line {line}: first choice '{id}' is not in the approval set")]
    InconsistentBallot { line: usize, id: String },
    #[error("first choice must be one of the approved candidates")]
    FirstChoiceNotApproved,
    #[error("candidate index {index} out of range for {count} candidates")]
    CandidateOutOfRange { index: usize, count: usize },
    #[error("empty ballot file")]
    EmptyFile,
    #[error("malformed ballot file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid rational '{text}'")]
    InvalidRational { text: String },
    #[error("weight k must be at least 1, got {k}")]
    WeightBelowOne { k: Rational },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: String, right: String },
    #[error("invalid beta matrix: {reason}")]
    InvalidBetaMatrix { reason: String },
    #[error("invalid preference profile: {reason}")]
    InvalidProfile { reason: String },
    #[error("non-dictatorship probe requires at least 3 voters, got {n}")]
    InsufficientVoters { n: usize },
    #[error("non-dictatorship probe requires at least 2 candidates, got {c}")]
    InsufficientCandidates { c: usize },
    #[error("invalid simulation config: {reason}")]
    InvalidConfig { reason: String },
    #[error("invalid k expression '{text}'")]
    InvalidKExpr { text: String },
}
