//! Axiom checks for the beta family: non-dictatorship, monotonicity,
//! unanimous winner, and Pareto efficiency.
//!
//! Every check returns a [`CriterionVerdict`]; a falsified verdict always
//! carries a witness with enough data (election, weight, offending candidate
//! or perturbation) to replay the violation independently.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BTreeSet;

use crate::ballots::{
    compose_beta, election_to_json, honest_ballots, profile_to_json, BallotPair, BetaEntry,
    CandidateSet, Election, PreferenceProfile,
};
use crate::rational::Rational;
use crate::tally::{beta_score, winners, winners_from_values, ScoreKind, WinnerSet};
use crate::Error;

/// The four checked criteria.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    NonDictatorship,
    Monotonicity,
    UnanimousWinner,
    Pareto,
}

impl Criterion {
    pub fn name(self) -> &'static str {
        match self {
            Criterion::NonDictatorship => "non_dictatorship",
            Criterion::Monotonicity => "monotonicity",
            Criterion::UnanimousWinner => "unanimous_winner",
            Criterion::Pareto => "pareto",
        }
    }
}

/// A single-entry change to a beta matrix: the named voter's entry for the
/// named candidate moves one step up or down the `0 → 1 → k` ladder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Perturbation {
    pub voter: usize,
    pub candidate: usize,
    pub from: BetaEntry,
    pub to: BetaEntry,
}

/// Counterexample bundle: everything needed to replay a violation.
#[derive(Debug, Clone)]
pub struct Witness {
    pub election: Election,
    pub k: Rational,
    pub candidate: Option<usize>,
    pub perturbation: Option<Perturbation>,
    pub profile: Option<PreferenceProfile>,
}

/// Outcome of one criterion check.
#[derive(Debug, Clone)]
pub struct CriterionVerdict {
    pub criterion: Criterion,
    pub holds: bool,
    pub witness: Option<Witness>,
}

impl CriterionVerdict {
    fn holds(criterion: Criterion) -> Self {
        CriterionVerdict {
            criterion,
            holds: true,
            witness: None,
        }
    }

    fn falsified(criterion: Criterion, witness: Witness) -> Self {
        CriterionVerdict {
            criterion,
            holds: false,
            witness: Some(witness),
        }
    }
}

fn entry_label(entry: BetaEntry) -> &'static str {
    match entry {
        BetaEntry::Zero => "0",
        BetaEntry::One => "1",
        BetaEntry::Weighted => "k",
    }
}

/// Renders a verdict to the JSON shape emitted by the CLI. The embedded
/// election (and profile, for checks that start from one) use the ballot and
/// profile file formats, so a witness can be fed straight back in.
pub fn verdict_to_json(verdict: &CriterionVerdict) -> serde_json::Value {
    let mut root = serde_json::Map::new();
    root.insert(
        "criterion".into(),
        serde_json::Value::String(verdict.criterion.name().into()),
    );
    root.insert("holds".into(), serde_json::Value::Bool(verdict.holds));
    if let Some(witness) = &verdict.witness {
        let mut w = serde_json::Map::new();
        w.insert("election".into(), election_to_json(&witness.election));
        w.insert(
            "k".into(),
            serde_json::Value::String(witness.k.to_string()),
        );
        w.insert(
            "k_decimal".into(),
            serde_json::json!(witness.k.to_f64()),
        );
        if let Some(candidate) = witness.candidate {
            w.insert(
                "candidate".into(),
                serde_json::Value::String(
                    witness.election.candidates().id(candidate).to_string(),
                ),
            );
        }
        if let Some(p) = &witness.perturbation {
            w.insert(
                "perturbation".into(),
                serde_json::json!({
                    "voter": p.voter,
                    "candidate": witness.election.candidates().id(p.candidate),
                    "from": entry_label(p.from),
                    "to": entry_label(p.to),
                }),
            );
        }
        if let Some(profile) = &witness.profile {
            w.insert(
                "profile".into(),
                profile_to_json(witness.election.candidates(), profile),
            );
        }
        root.insert("witness".into(), serde_json::Value::Object(w));
    }
    serde_json::Value::Object(root)
}

/// The candidate placed first by every voter, if any. With a weight above 1
/// that candidate's entry is strictly maximal in every row of the beta
/// matrix.
pub fn unanimous_winner(election: &Election) -> Option<usize> {
    let first = election.ballots()[0].first_choice();
    election
        .ballots()
        .iter()
        .all(|b| b.first_choice() == first)
        .then_some(first)
}

/// The candidate whose entry attains the row maximum in every row of the
/// matrix, comparing numeric values at the matrix's weight. At `k = 1`
/// several candidates can qualify; the lowest index is returned.
pub fn unanimous_winner_of_matrix(matrix: &crate::ballots::BetaMatrix) -> Option<usize> {
    let rows = matrix.voter_count();
    let row_max: Vec<Rational> = (0..rows)
        .map(|i| {
            (0..matrix.candidate_count())
                .map(|j| matrix.value(i, j))
                .max()
                .unwrap()
        })
        .collect();
    (0..matrix.candidate_count())
        .find(|&j| (0..rows).all(|i| matrix.value(i, j) == row_max[i]))
}

/// Verdict form of the unanimous-winner criterion at one weight: vacuously
/// true when no candidate is placed first by everyone, otherwise true iff
/// that candidate is among the beta winners.
pub fn check_unanimous(election: &Election, k: &Rational) -> Result<CriterionVerdict, Error> {
    let Some(candidate) = unanimous_winner(election) else {
        return Ok(CriterionVerdict::holds(Criterion::UnanimousWinner));
    };
    let winner_set = winners(&beta_score(election, k)?);
    if winner_set.contains(candidate) {
        Ok(CriterionVerdict::holds(Criterion::UnanimousWinner))
    } else {
        Ok(CriterionVerdict::falsified(
            Criterion::UnanimousWinner,
            Witness {
                election: election.clone(),
                k: k.clone(),
                candidate: Some(candidate),
                perturbation: None,
                profile: None,
            },
        ))
    }
}

/// How a monotonicity run picks its perturbations.
#[derive(Debug, Clone, Copy)]
pub enum MonotonicityPlan {
    /// Apply every admissible single-entry raise and drop once.
    Exhaustive,
    /// Sample `trials` perturbations uniformly from the admissible ones.
    Random { trials: u64, seed: u64 },
}

/// Verdict plus the number of perturbations actually replayed.
#[derive(Debug, Clone)]
pub struct MonotonicityRun {
    pub verdict: CriterionVerdict,
    pub cases: u64,
}

/// Monotonicity fuzz: raise a single matrix entry of a winner (`0→1` or
/// `1→k`) and require the winner to stay a winner; drop a single entry of a
/// loser (`k→1` or `1→0`) and require the loser to stay out. Each case
/// re-tallies the perturbed matrix from scratch.
pub fn run_monotonicity(
    election: &Election,
    k: &Rational,
    plan: MonotonicityPlan,
) -> Result<MonotonicityRun, Error> {
    let matrix = compose_beta(election, k)?;
    let base_values: Vec<Vec<Rational>> = (0..matrix.voter_count())
        .map(|i| {
            (0..matrix.candidate_count())
                .map(|j| matrix.value(i, j))
                .collect()
        })
        .collect();
    let base_winners = winners_from_values(&matrix.column_sums(), ScoreKind::Beta(k.clone()));

    // Admissible single-entry moves: raises target winners, drops target
    // losers, always one step along 0 → 1 → k.
    let mut catalog: Vec<Perturbation> = Vec::new();
    for i in 0..matrix.voter_count() {
        for j in 0..matrix.candidate_count() {
            let entry = matrix.entry(i, j);
            if base_winners.contains(j) {
                let raise = match entry {
                    BetaEntry::Zero => Some(BetaEntry::One),
                    BetaEntry::One => Some(BetaEntry::Weighted),
                    BetaEntry::Weighted => None,
                };
                if let Some(to) = raise {
                    catalog.push(Perturbation {
                        voter: i,
                        candidate: j,
                        from: entry,
                        to,
                    });
                }
            } else {
                let drop = match entry {
                    BetaEntry::Weighted => Some(BetaEntry::One),
                    BetaEntry::One => Some(BetaEntry::Zero),
                    BetaEntry::Zero => None,
                };
                if let Some(to) = drop {
                    catalog.push(Perturbation {
                        voter: i,
                        candidate: j,
                        from: entry,
                        to,
                    });
                }
            }
        }
    }

    let replay = |p: &Perturbation| -> bool {
        let mut values = base_values.clone();
        values[p.voter][p.candidate] = p.to.value(k);
        let mut sums = vec![Rational::zero(); matrix.candidate_count()];
        for row in &values {
            for (j, v) in row.iter().enumerate() {
                sums[j] += v;
            }
        }
        let new_winners = winners_from_values(&sums, ScoreKind::Beta(k.clone()));
        if base_winners.contains(p.candidate) {
            new_winners.contains(p.candidate)
        } else {
            !new_winners.contains(p.candidate)
        }
    };

    let mut cases = 0u64;
    let mut witness = None;
    match plan {
        MonotonicityPlan::Exhaustive => {
            for p in &catalog {
                cases += 1;
                if !replay(p) {
                    witness = Some(p.clone());
                    break;
                }
            }
        }
        MonotonicityPlan::Random { trials, seed } => {
            if !catalog.is_empty() {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                for _ in 0..trials {
                    let p = &catalog[rng.gen_range(0..catalog.len())];
                    cases += 1;
                    if !replay(p) {
                        witness = Some(p.clone());
                        break;
                    }
                }
            }
        }
    }

    let verdict = match witness {
        None => CriterionVerdict::holds(Criterion::Monotonicity),
        Some(p) => CriterionVerdict::falsified(
            Criterion::Monotonicity,
            Witness {
                election: election.clone(),
                k: k.clone(),
                candidate: Some(p.candidate),
                perturbation: Some(p),
                profile: None,
            },
        ),
    };
    Ok(MonotonicityRun { verdict, cases })
}

/// Monotonicity check: exhaustive when the matrix has at most 20 cells,
/// otherwise `trials` random perturbations under the given seed.
pub fn check_monotonicity(
    election: &Election,
    k: &Rational,
    trials: u64,
    seed: u64,
) -> Result<CriterionVerdict, Error> {
    let cells = election.voter_count() * election.candidate_count();
    let plan = if cells <= 20 {
        MonotonicityPlan::Exhaustive
    } else {
        MonotonicityPlan::Random { trials, seed }
    };
    Ok(run_monotonicity(election, k, plan)?.verdict)
}

/// Pareto-efficient candidates of a profile: those not unanimously beaten.
/// `w` is in the set iff for every rival `l` some voter ranks `w` above `l`.
pub fn pareto_winners(profile: &PreferenceProfile) -> BTreeSet<usize> {
    let c = profile.candidate_count();
    (0..c)
        .filter(|&w| {
            (0..c).all(|l| {
                l == w || (0..profile.voter_count()).any(|i| profile.prefers(i, w, l))
            })
        })
        .collect()
}

/// Pareto check for honest ballots at one weight: every beta winner must be
/// Pareto-efficient. For `k > c - 1` the check also requires each winner to
/// carry at least one first-choice vote (which is what forces efficiency in
/// that regime); both sub-claims are verified, not assumed.
pub fn check_pareto(
    profile: &PreferenceProfile,
    candidates: &CandidateSet,
    k: &Rational,
) -> Result<CriterionVerdict, Error> {
    let election = honest_ballots(profile, candidates)?;
    let winner_set = winners(&beta_score(&election, k)?);
    let pareto = pareto_winners(profile);
    let above_bound =
        *k > Rational::from_usize(election.candidate_count()) - Rational::one();

    let mut offender = winner_set
        .indices()
        .iter()
        .find(|j| !pareto.contains(j))
        .copied();
    if offender.is_none() && above_bound {
        offender = winner_set
            .indices()
            .iter()
            .find(|&&j| {
                !election
                    .ballots()
                    .iter()
                    .any(|b| b.first_choice() == j)
            })
            .copied();
    }

    Ok(match offender {
        None => CriterionVerdict::holds(Criterion::Pareto),
        Some(candidate) => CriterionVerdict::falsified(
            Criterion::Pareto,
            Witness {
                election,
                k: k.clone(),
                candidate: Some(candidate),
                perturbation: None,
                profile: Some(profile.clone()),
            },
        ),
    })
}

/// Per-voter, per-weight outcome of the dictatorship probe.
#[derive(Debug, Clone, Serialize)]
pub struct ProbeOutcome {
    pub voter: usize,
    pub favorite: usize,
    pub k: Rational,
    pub defeated: bool,
}

/// Probe verdict plus the per-weight outcome table.
#[derive(Debug, Clone)]
pub struct DictatorshipReport {
    pub verdict: CriterionVerdict,
    pub outcomes: Vec<ProbeOutcome>,
}

/// Non-dictatorship probe. For each voter, builds the adversarial election
/// in which that voter weights their favorite while everyone else weights a
/// common rival and gives the favorite nothing, then records whether the
/// favorite loses at each sampled weight. With at least three voters the
/// rival out-scores the favorite at every `k ≥ 1`, so no voter's preference
/// can force the outcome; the report keeps the per-weight outcomes rather
/// than a single aggregate claim.
pub fn dictatorship_probe(
    candidate_count: usize,
    voter_count: usize,
    favorite_of: impl Fn(usize) -> usize,
) -> Result<DictatorshipReport, Error> {
    if voter_count < 3 {
        return Err(Error::InsufficientVoters { n: voter_count });
    }
    if candidate_count < 2 {
        return Err(Error::InsufficientCandidates { c: candidate_count });
    }

    let mut k_samples = vec![
        Rational::one(),
        Rational::new(3, 2),
        Rational::integer(2),
        Rational::from_usize(candidate_count),
        Rational::from_usize(voter_count),
        Rational::from_usize(voter_count) + Rational::one(),
    ];
    if candidate_count >= 2 {
        k_samples.push(Rational::from_usize(candidate_count - 1).max(Rational::one()));
    }
    k_samples.sort();
    k_samples.dedup();

    let roster = CandidateSet::default_ids(candidate_count)?;
    let mut outcomes = Vec::new();
    let mut witness: Option<Witness> = None;
    for voter in 0..voter_count {
        let favorite = favorite_of(voter);
        if favorite >= candidate_count {
            return Err(Error::CandidateOutOfRange {
                index: favorite,
                count: candidate_count,
            });
        }
        let rival = (favorite + 1) % candidate_count;
        let ballots = (0..voter_count)
            .map(|v| {
                if v == voter {
                    BallotPair::new(favorite, [favorite])
                } else {
                    BallotPair::new(rival, [rival])
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        let election = Election::new(roster.clone(), ballots)?;
        for k in &k_samples {
            let defeated = !winners(&beta_score(&election, k)?).contains(favorite);
            outcomes.push(ProbeOutcome {
                voter,
                favorite,
                k: k.clone(),
                defeated,
            });
            if !defeated && witness.is_none() {
                witness = Some(Witness {
                    election: election.clone(),
                    k: k.clone(),
                    candidate: Some(favorite),
                    perturbation: None,
                    profile: None,
                });
            }
        }
    }

    let verdict = match witness {
        None => CriterionVerdict::holds(Criterion::NonDictatorship),
        Some(w) => CriterionVerdict::falsified(Criterion::NonDictatorship, w),
    };
    Ok(DictatorshipReport { verdict, outcomes })
}

/// Re-checks a Pareto witness from scratch; used by tests and the simulator
/// to confirm that emitted witnesses actually falsify.
pub fn pareto_witness_replays(witness: &Witness) -> bool {
    let Some(profile) = &witness.profile else {
        return false;
    };
    let Some(candidate) = witness.candidate else {
        return false;
    };
    let Ok(scores) = beta_score(&witness.election, &witness.k) else {
        return false;
    };
    let winner_set: WinnerSet = winners(&scores);
    winner_set.contains(candidate) && !pareto_winners(profile).contains(&candidate)
}
