//! Score computation for plurality, approval, and beta(k), plus winner
//! extraction and seeded tie-breaking.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BTreeMap;

use crate::ballots::Election;
use crate::rational::Rational;
use crate::Error;

/// The two fixed-weight rules; beta(k) is handled by [`beta_score`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseRule {
    Plurality,
    Approval,
}

/// Which rule produced a score vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScoreKind {
    Plurality,
    Approval,
    Beta(Rational),
}

impl ScoreKind {
    pub fn name(&self) -> &'static str {
        match self {
            ScoreKind::Plurality => "plurality",
            ScoreKind::Approval => "approval",
            ScoreKind::Beta(_) => "beta",
        }
    }
}

/// Per-candidate scores under one rule, in roster order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScoreVector {
    values: Vec<Rational>,
    kind: ScoreKind,
}

impl ScoreVector {
    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn value(&self, candidate: usize) -> &Rational {
        &self.values[candidate]
    }

    pub fn kind(&self) -> &ScoreKind {
        &self.kind
    }

    pub fn candidate_count(&self) -> usize {
        self.values.len()
    }
}

/// Plurality scores count first choices; approval scores count approvals.
pub fn score(election: &Election, rule: BaseRule) -> ScoreVector {
    let c = election.candidate_count();
    let mut values = vec![Rational::zero(); c];
    for ballot in election.ballots() {
        match rule {
            BaseRule::Plurality => values[ballot.first_choice()] += &Rational::one(),
            BaseRule::Approval => {
                for j in ballot.approvals() {
                    values[j] += &Rational::one();
                }
            }
        }
    }
    ScoreVector {
        values,
        kind: match rule {
            BaseRule::Plurality => ScoreKind::Plurality,
            BaseRule::Approval => ScoreKind::Approval,
        },
    }
}

/// Beta scores: each candidate earns their approval count plus `(k-1)` times
/// their first-choice count. Requires `k ≥ 1`.
pub fn beta_score(election: &Election, k: &Rational) -> Result<ScoreVector, Error> {
    if *k < Rational::one() {
        return Err(Error::WeightBelowOne { k: k.clone() });
    }
    let shift = k - &Rational::one();
    let approval = score(election, BaseRule::Approval);
    let plurality = score(election, BaseRule::Plurality);
    let values = approval
        .values
        .iter()
        .zip(&plurality.values)
        .map(|(a, p)| a + &(&shift * p))
        .collect();
    Ok(ScoreVector {
        values,
        kind: ScoreKind::Beta(k.clone()),
    })
}

/// A candidate's beta score as an affine function of the weight:
/// `value_at_one + (k - 1) · slope`, where `value_at_one` is the approval
/// count and `slope` the first-choice count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScoreLine {
    pub candidate: usize,
    pub value_at_one: Rational,
    pub slope: Rational,
}

impl ScoreLine {
    pub fn eval(&self, k: &Rational) -> Rational {
        &self.value_at_one + &(&(k - &Rational::one()) * &self.slope)
    }
}

/// One score line per candidate, in roster order.
pub fn score_lines(election: &Election) -> Vec<ScoreLine> {
    let approval = score(election, BaseRule::Approval);
    let plurality = score(election, BaseRule::Plurality);
    approval
        .values
        .iter()
        .zip(&plurality.values)
        .enumerate()
        .map(|(candidate, (a, p))| ScoreLine {
            candidate,
            value_at_one: a.clone(),
            slope: p.clone(),
        })
        .collect()
}

/// All candidates sharing the maximal score. Never empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WinnerSet {
    indices: Vec<usize>,
    score_value: Rational,
}

impl WinnerSet {
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn contains(&self, candidate: usize) -> bool {
        self.indices.binary_search(&candidate).is_ok()
    }

    pub fn score_value(&self) -> &Rational {
        &self.score_value
    }

    pub fn is_tie(&self) -> bool {
        self.indices.len() > 1
    }

    pub fn is_subset_of(&self, other: &WinnerSet) -> bool {
        self.indices.iter().all(|&j| other.contains(j))
    }
}

/// Extracts the set of maximal-score candidates.
pub fn winners(scores: &ScoreVector) -> WinnerSet {
    let best = scores
        .values
        .iter()
        .max()
        .expect("score vectors are never empty")
        .clone();
    let indices = scores
        .values
        .iter()
        .enumerate()
        .filter(|(_, v)| **v == best)
        .map(|(j, _)| j)
        .collect();
    WinnerSet {
        indices,
        score_value: best,
    }
}

/// Winner sets from the same scores compare equal; convenience for tests and
/// the simulator.
pub fn winners_from_values(values: &[Rational], kind: ScoreKind) -> WinnerSet {
    winners(&ScoreVector {
        values: values.to_vec(),
        kind,
    })
}

/// Breaks a tie uniformly at random, deterministically per seed. A singleton
/// set returns its only member whatever the seed.
pub fn select_winner(set: &WinnerSet, seed: u64) -> usize {
    if set.indices.len() == 1 {
        return set.indices[0];
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    set.indices[rng.gen_range(0..set.indices.len())]
}

/// Rendered JSON payload of a tally: exact rational scores keyed by
/// candidate id, winners in roster order, and decimal convenience fields.
/// The exact fields are authoritative.
#[derive(Debug, Serialize)]
pub struct ScoreReport {
    pub rule: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<Rational>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_decimal: Option<f64>,
    pub scores: BTreeMap<String, Rational>,
    pub scores_decimal: BTreeMap<String, f64>,
    pub winners: Vec<String>,
}

impl ScoreReport {
    pub fn new(election: &Election, scores: &ScoreVector) -> Self {
        let winner_set = winners(scores);
        let ids = election.candidates();
        let exact: BTreeMap<String, Rational> = scores
            .values()
            .iter()
            .enumerate()
            .map(|(j, v)| (ids.id(j).to_string(), v.clone()))
            .collect();
        let decimal = exact
            .iter()
            .map(|(id, v)| (id.clone(), v.to_f64()))
            .collect();
        let k = match scores.kind() {
            ScoreKind::Beta(k) => Some(k.clone()),
            _ => None,
        };
        ScoreReport {
            rule: scores.kind().name().to_string(),
            k_decimal: k.as_ref().map(Rational::to_f64),
            k,
            scores: exact,
            scores_decimal: decimal,
            winners: winner_set
                .indices()
                .iter()
                .map(|&j| ids.id(j).to_string())
                .collect(),
        }
    }
}
