//! Monte Carlo harness: random profile generation, rule-agreement
//! statistics across a grid of weights, and counterexample search with a
//! greedy shrinker.
//!
//! Determinism contract: every sample draws its own generator from
//! [`derive_seed`], and statistics merge through commutative integer adds,
//! so serial and parallel runs of the same config agree bit for bit.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::ballots::{honest_ballots, CandidateSet, Election, PreferenceProfile};
use crate::criteria::{pareto_winners, Witness};
use crate::kanalysis::potential_winners;
use crate::rational::Rational;
use crate::tally::{beta_score, score, winners, BaseRule, WinnerSet};
use crate::Error;

/// Splits one master seed into independent per-sample seeds using the
/// splitmix64 finalizer, so samples can run in any order or in parallel
/// without sharing generator state.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn profile_from_rng(n: usize, c: usize, rng: &mut ChaCha8Rng) -> PreferenceProfile {
    let mut rankings = Vec::with_capacity(n);
    let mut cutoffs = Vec::with_capacity(n);
    for _ in 0..n {
        let mut ranking: Vec<usize> = (0..c).collect();
        ranking.shuffle(rng);
        rankings.push(ranking);
        cutoffs.push(rng.gen_range(1..=c));
    }
    PreferenceProfile::new(c, rankings, cutoffs)
        .expect("shuffled permutations with cutoffs in 1..=c are always valid")
}

/// Uniform random profile: each voter gets an independently shuffled
/// ranking and a cutoff uniform on `[1, c]`. Deterministic per seed.
pub fn random_profile(n: usize, c: usize, seed: u64) -> Result<PreferenceProfile, Error> {
    if n < 1 {
        return Err(Error::InsufficientVoters { n });
    }
    if c < 1 {
        return Err(Error::InsufficientCandidates { c });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(profile_from_rng(n, c, &mut rng))
}

/// A weight-grid entry: either a literal rational or an expression resolved
/// per sample from that sample's voter count `n` and candidate count `c`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KExpr {
    Literal(Rational),
    N,
    NPlusOne,
    OnePlusInvTwoN,
    C,
    CMinusOne,
}

impl KExpr {
    /// Evaluates the entry for a sample with `n` voters and `c` candidates.
    /// Errors when the resolved weight falls below 1.
    pub fn resolve(&self, n: usize, c: usize) -> Result<Rational, Error> {
        let k = match self {
            KExpr::Literal(r) => r.clone(),
            KExpr::N => Rational::from_usize(n),
            KExpr::NPlusOne => Rational::from_usize(n) + Rational::one(),
            KExpr::OnePlusInvTwoN => {
                Rational::one() + Rational::one() / Rational::from_usize(2 * n)
            }
            KExpr::C => Rational::from_usize(c),
            KExpr::CMinusOne => Rational::from_usize(c) - Rational::one(),
        };
        if k < Rational::one() {
            return Err(Error::WeightBelowOne { k });
        }
        Ok(k)
    }
}

impl fmt::Display for KExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KExpr::Literal(r) => write!(f, "{r}"),
            KExpr::N => write!(f, "n"),
            KExpr::NPlusOne => write!(f, "n+1"),
            KExpr::OnePlusInvTwoN => write!(f, "1+1/(2n)"),
            KExpr::C => write!(f, "c"),
            KExpr::CMinusOne => write!(f, "c-1"),
        }
    }
}

impl FromStr for KExpr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let compact: String = s.chars().filter(|ch| !ch.is_whitespace()).collect();
        match compact.as_str() {
            "n" => Ok(KExpr::N),
            "n+1" => Ok(KExpr::NPlusOne),
            "1+1/(2n)" => Ok(KExpr::OnePlusInvTwoN),
            "c" => Ok(KExpr::C),
            "c-1" => Ok(KExpr::CMinusOne),
            _ => compact
                .parse::<Rational>()
                .map(KExpr::Literal)
                .map_err(|_| Error::InvalidKExpr { text: s.to_string() }),
        }
    }
}

impl Serialize for KExpr {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for KExpr {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Simulation configuration, loaded from a JSON file. `n_range` and
/// `c_range` are inclusive. The seed is a mandatory part of the contract —
/// [`SimConfig::validate`] rejects configs without one so every run is
/// reproducible.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_range: (usize, usize),
    pub c_range: (usize, usize),
    pub samples: u64,
    pub k_grid: Vec<KExpr>,
    pub seed: Option<u64>,
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), Error> {
        let bad = |reason: String| Err(Error::InvalidConfig { reason });
        if self.n_range.0 < 1 || self.n_range.0 > self.n_range.1 {
            return bad(format!(
                "n_range [{}, {}] must satisfy 1 <= lo <= hi",
                self.n_range.0, self.n_range.1
            ));
        }
        if self.c_range.0 < 1 || self.c_range.0 > self.c_range.1 {
            return bad(format!(
                "c_range [{}, {}] must satisfy 1 <= lo <= hi",
                self.c_range.0, self.c_range.1
            ));
        }
        if self.samples < 1 {
            return bad("samples must be at least 1".into());
        }
        if self.k_grid.is_empty() {
            return bad("k_grid must not be empty".into());
        }
        // Every grid expression is non-decreasing in n and c except
        // 1+1/(2n), which stays above 1 for all n, so checking the range
        // minima proves all per-sample weights are >= 1.
        for expr in &self.k_grid {
            expr.resolve(self.n_range.0, self.c_range.0)?;
        }
        if self.seed.is_none() {
            return bad("seed is required: runs must be reproducible".into());
        }
        Ok(())
    }

    /// Parses and validates a config file.
    pub fn from_json(bytes: &[u8]) -> Result<SimConfig, Error> {
        let config: SimConfig = serde_json::from_slice(bytes)?;
        config.validate()?;
        Ok(config)
    }
}

/// Per-expression agreement counters, all out of `AgreementStats::samples`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KAgreement {
    pub expr: KExpr,
    pub beta_subset_plurality: u64,
    pub beta_equals_plurality: u64,
    pub beta_subset_approval: u64,
    pub beta_equals_approval: u64,
    pub ties: u64,
}

/// Aggregated simulation output: agreement fractions per grid entry plus
/// the mean potential-winner-set size across samples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgreementStats {
    pub samples: u64,
    pub potential_winner_total: u64,
    pub per_k: Vec<KAgreement>,
}

fn fraction(count: u64, samples: u64) -> Rational {
    Rational::from_usize(count as usize) / Rational::from_usize(samples as usize)
}

impl AgreementStats {
    pub fn mean_potential_winners(&self) -> Rational {
        fraction(self.potential_winner_total, self.samples)
    }

    /// JSON payload: exact rational fractions with decimal convenience
    /// siblings; the exact fields are authoritative.
    pub fn to_json(&self) -> serde_json::Value {
        let per_k: Vec<serde_json::Value> = self
            .per_k
            .iter()
            .map(|row| {
                let field = |count: u64| {
                    let f = fraction(count, self.samples);
                    (f.to_string(), f.to_f64())
                };
                let (sp, sp_d) = field(row.beta_subset_plurality);
                let (ep, ep_d) = field(row.beta_equals_plurality);
                let (sa, sa_d) = field(row.beta_subset_approval);
                let (ea, ea_d) = field(row.beta_equals_approval);
                let (tie, tie_d) = field(row.ties);
                serde_json::json!({
                    "k_expr": row.expr.to_string(),
                    "beta_subset_plurality": sp,
                    "beta_subset_plurality_decimal": sp_d,
                    "beta_equals_plurality": ep,
                    "beta_equals_plurality_decimal": ep_d,
                    "beta_subset_approval": sa,
                    "beta_subset_approval_decimal": sa_d,
                    "beta_equals_approval": ea,
                    "beta_equals_approval_decimal": ea_d,
                    "tie_fraction": tie,
                    "tie_fraction_decimal": tie_d,
                })
            })
            .collect();
        let mean = self.mean_potential_winners();
        serde_json::json!({
            "samples": self.samples,
            "mean_potential_winners": mean.to_string(),
            "mean_potential_winners_decimal": mean.to_f64(),
            "per_k": per_k,
        })
    }

    /// Plot-ready TSV: a header line, then one row per grid expression.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from(
            "k_expr\tbeta_subset_plurality\tbeta_equals_plurality\tbeta_subset_approval\tbeta_equals_approval\ttie_fraction\n",
        );
        for row in &self.per_k {
            let cell = |count: u64| fraction(count, self.samples).to_f64().to_string();
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\n",
                row.expr,
                cell(row.beta_subset_plurality),
                cell(row.beta_equals_plurality),
                cell(row.beta_subset_approval),
                cell(row.beta_equals_approval),
                cell(row.ties),
            ));
        }
        out
    }
}

#[derive(Clone)]
struct Accum {
    potential: u64,
    rows: Vec<[u64; 5]>,
}

impl Accum {
    fn zero(width: usize) -> Self {
        Accum {
            potential: 0,
            rows: vec![[0; 5]; width],
        }
    }

    fn merge(mut self, other: Accum) -> Accum {
        self.potential += other.potential;
        for (a, b) in self.rows.iter_mut().zip(other.rows) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        self
    }
}

fn draw_sample(config: &SimConfig, index: u64) -> (usize, usize, PreferenceProfile) {
    let master = config.seed.expect("config validated before sampling");
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(master, index));
    let n = rng.gen_range(config.n_range.0..=config.n_range.1);
    let c = rng.gen_range(config.c_range.0..=config.c_range.1);
    let profile = profile_from_rng(n, c, &mut rng);
    (n, c, profile)
}

fn sample_agreement(config: &SimConfig, index: u64) -> Result<Accum, Error> {
    let (n, c, profile) = draw_sample(config, index);
    let election = honest_ballots(&profile, &CandidateSet::default_ids(c)?)?;
    let plurality = winners(&score(&election, BaseRule::Plurality));
    let approval = winners(&score(&election, BaseRule::Approval));

    let mut acc = Accum::zero(config.k_grid.len());
    acc.potential = potential_winners(&election).members().len() as u64;
    for (slot, expr) in config.k_grid.iter().enumerate() {
        let k = expr.resolve(n, c)?;
        let beta = winners(&beta_score(&election, &k)?);
        let row = &mut acc.rows[slot];
        row[0] += u64::from(beta.is_subset_of(&plurality));
        row[1] += u64::from(beta.indices() == plurality.indices());
        row[2] += u64::from(beta.is_subset_of(&approval));
        row[3] += u64::from(beta.indices() == approval.indices());
        row[4] += u64::from(beta.indices().len() > 1);
    }
    Ok(acc)
}

/// Runs the agreement study over `config.samples` random elections. Samples
/// run in parallel; the counter merge is commutative, so the output is
/// bit-identical for any thread count.
pub fn run_agreement(config: &SimConfig) -> Result<AgreementStats, Error> {
    config.validate()?;
    let width = config.k_grid.len();
    let acc = (0..config.samples)
        .into_par_iter()
        .map(|i| sample_agreement(config, i))
        .try_reduce(|| Accum::zero(width), |a, b| Ok(a.merge(b)))?;
    let per_k = config
        .k_grid
        .iter()
        .zip(&acc.rows)
        .map(|(expr, row)| KAgreement {
            expr: expr.clone(),
            beta_subset_plurality: row[0],
            beta_equals_plurality: row[1],
            beta_subset_approval: row[2],
            beta_equals_approval: row[3],
            ties: row[4],
        })
        .collect();
    Ok(AgreementStats {
        samples: config.samples,
        potential_winner_total: acc.potential,
        per_k,
    })
}

/// What the counterexample search hunts for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchTarget {
    /// Approval (k = 1) elects a candidate some rival beats unanimously.
    ApprovalNonPareto,
    /// Some grid weight elects a non-Pareto candidate; with every grid
    /// entry at or above `c`, this finds nothing.
    BetaNonParetoBelowBound,
    /// Plurality and approval winners are all Pareto-efficient, yet some
    /// grid weight above 1 elects a non-Pareto candidate. Reported
    /// empirically, never asserted.
    ConjectureProbe,
}

impl SearchTarget {
    pub fn name(self) -> &'static str {
        match self {
            SearchTarget::ApprovalNonPareto => "approval_non_pareto",
            SearchTarget::BetaNonParetoBelowBound => "beta_non_pareto_below_bound",
            SearchTarget::ConjectureProbe => "conjecture_probe",
        }
    }
}

impl FromStr for SearchTarget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "approval_non_pareto" => Ok(SearchTarget::ApprovalNonPareto),
            "beta_non_pareto_below_bound" => Ok(SearchTarget::BetaNonParetoBelowBound),
            "conjecture_probe" => Ok(SearchTarget::ConjectureProbe),
            _ => Err(Error::InvalidConfig {
                reason: format!("unknown search target {s:?}"),
            }),
        }
    }
}

/// A found-and-shrunk violation, with everything needed to replay it.
#[derive(Debug, Clone)]
pub struct Counterexample {
    pub profile: PreferenceProfile,
    pub election: Election,
    pub k: Rational,
    pub candidate: usize,
    pub samples_tried: u64,
}

impl Counterexample {
    /// Repackages the counterexample as a criteria-module witness so it can
    /// be re-verified by that module's independent predicates.
    pub fn to_witness(&self) -> Witness {
        Witness {
            election: self.election.clone(),
            k: self.k.clone(),
            candidate: Some(self.candidate),
            perturbation: None,
            profile: Some(self.profile.clone()),
        }
    }
}

/// First Pareto offender among the beta winners at `k`, if any.
fn pareto_offender(
    election: &Election,
    profile: &PreferenceProfile,
    k: &Rational,
) -> Result<Option<usize>, Error> {
    let winner_set: WinnerSet = winners(&beta_score(election, k)?);
    let pareto = pareto_winners(profile);
    Ok(winner_set
        .indices()
        .iter()
        .find(|j| !pareto.contains(j))
        .copied())
}

/// Evaluates the target predicate on one profile, returning the offending
/// weight and candidate on a hit.
fn falsifies(
    target: SearchTarget,
    profile: &PreferenceProfile,
    k_grid: &[KExpr],
) -> Result<Option<(Rational, usize)>, Error> {
    let c = profile.candidate_count();
    let n = profile.voter_count();
    let election = honest_ballots(profile, &CandidateSet::default_ids(c)?)?;
    match target {
        SearchTarget::ApprovalNonPareto => {
            let one = Rational::one();
            Ok(pareto_offender(&election, profile, &one)?.map(|j| (one, j)))
        }
        SearchTarget::BetaNonParetoBelowBound => {
            for expr in k_grid {
                let k = expr.resolve(n, c)?;
                if let Some(j) = pareto_offender(&election, profile, &k)? {
                    return Ok(Some((k, j)));
                }
            }
            Ok(None)
        }
        SearchTarget::ConjectureProbe => {
            let pareto = pareto_winners(profile);
            let all_pareto = |set: &WinnerSet| set.indices().iter().all(|j| pareto.contains(j));
            if !all_pareto(&winners(&score(&election, BaseRule::Plurality)))
                || !all_pareto(&winners(&score(&election, BaseRule::Approval)))
            {
                return Ok(None);
            }
            for expr in k_grid {
                let k = expr.resolve(n, c)?;
                if k <= Rational::one() {
                    continue;
                }
                if let Some(j) = pareto_offender(&election, profile, &k)? {
                    return Ok(Some((k, j)));
                }
            }
            Ok(None)
        }
    }
}

fn without_voter(profile: &PreferenceProfile, voter: usize) -> Option<PreferenceProfile> {
    if profile.voter_count() <= 1 {
        return None;
    }
    let mut rankings = Vec::new();
    let mut cutoffs = Vec::new();
    for i in 0..profile.voter_count() {
        if i != voter {
            rankings.push(profile.ranking(i).to_vec());
            cutoffs.push(profile.cutoff(i));
        }
    }
    PreferenceProfile::new(profile.candidate_count(), rankings, cutoffs).ok()
}

fn without_candidate(profile: &PreferenceProfile, candidate: usize) -> Option<PreferenceProfile> {
    let c = profile.candidate_count();
    if c <= 2 {
        return None;
    }
    let mut rankings = Vec::new();
    let mut cutoffs = Vec::new();
    for i in 0..profile.voter_count() {
        let old = profile.ranking(i);
        let position = old.iter().position(|&x| x == candidate).unwrap();
        let ranking: Vec<usize> = old
            .iter()
            .filter(|&&x| x != candidate)
            .map(|&x| if x > candidate { x - 1 } else { x })
            .collect();
        let t = profile.cutoff(i);
        let t = if position < t { t.saturating_sub(1) } else { t };
        cutoffs.push(t.clamp(1, c - 1));
        rankings.push(ranking);
    }
    PreferenceProfile::new(c - 1, rankings, cutoffs).ok()
}

/// Greedy shrink: delete voters while the violation survives, then delete
/// candidates, repeating until neither pass makes progress. Every accepted
/// step re-verifies the predicate, so the result still falsifies.
fn shrink(
    target: SearchTarget,
    mut profile: PreferenceProfile,
    k_grid: &[KExpr],
) -> Result<PreferenceProfile, Error> {
    loop {
        let mut changed = false;
        'voters: loop {
            for i in 0..profile.voter_count() {
                if let Some(smaller) = without_voter(&profile, i) {
                    if falsifies(target, &smaller, k_grid)?.is_some() {
                        profile = smaller;
                        changed = true;
                        continue 'voters;
                    }
                }
            }
            break;
        }
        'candidates: loop {
            for j in 0..profile.candidate_count() {
                if let Some(smaller) = without_candidate(&profile, j) {
                    if falsifies(target, &smaller, k_grid)?.is_some() {
                        profile = smaller;
                        changed = true;
                        continue 'candidates;
                    }
                }
            }
            break;
        }
        if !changed {
            return Ok(profile);
        }
    }
}

/// Random search for a violation of the target predicate, up to
/// `config.samples` attempts. A hit is greedily shrunk — voters first, then
/// candidates — and returned with the number of samples tried; `None` means
/// the budget ran out.
pub fn search_counterexample(
    target: SearchTarget,
    config: &SimConfig,
) -> Result<Option<Counterexample>, Error> {
    config.validate()?;
    for index in 0..config.samples {
        let (_, _, profile) = draw_sample(config, index);
        if falsifies(target, &profile, &config.k_grid)?.is_some() {
            let profile = shrink(target, profile, &config.k_grid)?;
            let (k, candidate) = falsifies(target, &profile, &config.k_grid)?
                .expect("shrink preserves falsification");
            let election =
                honest_ballots(&profile, &CandidateSet::default_ids(profile.candidate_count())?)?;
            return Ok(Some(Counterexample {
                profile,
                election,
                k,
                candidate,
                samples_tried: index + 1,
            }));
        }
    }
    Ok(None)
}

/// JSON payload for a search run, embedding the replayable counterexample
/// when one was found.
pub fn search_to_json(
    target: SearchTarget,
    config: &SimConfig,
    outcome: &Option<Counterexample>,
) -> serde_json::Value {
    let mut root = serde_json::Map::new();
    root.insert(
        "target".into(),
        serde_json::Value::String(target.name().into()),
    );
    root.insert("found".into(), serde_json::Value::Bool(outcome.is_some()));
    root.insert(
        "samples_tried".into(),
        serde_json::json!(outcome
            .as_ref()
            .map(|cx| cx.samples_tried)
            .unwrap_or(config.samples)),
    );
    if let Some(cx) = outcome {
        root.insert(
            "counterexample".into(),
            serde_json::json!({
                "profile": crate::ballots::profile_to_json(cx.election.candidates(), &cx.profile),
                "election": crate::ballots::election_to_json(&cx.election),
                "k": cx.k.to_string(),
                "k_decimal": cx.k.to_f64(),
                "candidate": cx.election.candidates().id(cx.candidate),
            }),
        );
    }
    serde_json::Value::Object(root)
}
