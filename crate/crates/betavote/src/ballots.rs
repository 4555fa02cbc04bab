//! Candidate rosters, ballots, elections, preference profiles, and the
//! composition of an election into a beta(k) score matrix.
//!
//! Two ingestion formats are supported. CSV: a `#candidates:A,B,C` header
//! line followed by one `first;approved1,approved2` row per voter. JSON:
//! `{"candidates":[...],"ballots":[{"first":"A","approve":["A","B"]}]}`.
//! Preference profiles (full rankings plus an approval cutoff per voter) are
//! JSON only. The `docs/formats.md` file in the repository root pins both
//! formats byte for byte.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

use crate::rational::Rational;
use crate::Error;

/// Ordered candidate roster. Column `j` of every matrix and score vector
/// refers to `ids()[j]`; all reports list candidates in roster order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateSet {
    ids: Vec<String>,
}

impl CandidateSet {
    pub fn new(ids: Vec<String>) -> Result<Self, Error> {
        if ids.is_empty() {
            return Err(Error::NoCandidates);
        }
        let mut seen = BTreeSet::new();
        for id in &ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::DuplicateCandidate { id: id.clone() });
            }
        }
        Ok(CandidateSet { ids })
    }

    /// Roster `A`, `B`, …, `Z`, `AA`, `AB`, … with `count` entries, used by
    /// the simulator where candidate names carry no meaning.
    pub fn default_ids(count: usize) -> Result<Self, Error> {
        fn letters(mut j: usize) -> String {
            let mut out = Vec::new();
            loop {
                out.push(b'A' + (j % 26) as u8);
                j /= 26;
                if j == 0 {
                    break;
                }
                j -= 1;
            }
            out.reverse();
            String::from_utf8(out).unwrap()
        }
        CandidateSet::new((0..count).map(letters).collect())
    }

    pub fn count(&self) -> usize {
        self.ids.len()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, index: usize) -> &str {
        &self.ids[index]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }
}

/// One voter's ballot: a single first choice plus the approval set, which by
/// construction always contains the first choice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BallotPair {
    first_choice: usize,
    approvals: BTreeSet<usize>,
}

impl BallotPair {
    pub fn new(first_choice: usize, approvals: impl IntoIterator<Item = usize>) -> Result<Self, Error> {
        let approvals: BTreeSet<usize> = approvals.into_iter().collect();
        if !approvals.contains(&first_choice) {
            return Err(Error::FirstChoiceNotApproved);
        }
        Ok(BallotPair {
            first_choice,
            approvals,
        })
    }

    pub fn first_choice(&self) -> usize {
        self.first_choice
    }

    pub fn approves(&self, candidate: usize) -> bool {
        self.approvals.contains(&candidate)
    }

    pub fn approvals(&self) -> impl Iterator<Item = usize> + '_ {
        self.approvals.iter().copied()
    }

    pub fn approval_count(&self) -> usize {
        self.approvals.len()
    }
}

/// A consistent election: a roster plus one ballot per voter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Election {
    candidates: CandidateSet,
    ballots: Vec<BallotPair>,
}

impl Election {
    pub fn new(candidates: CandidateSet, ballots: Vec<BallotPair>) -> Result<Self, Error> {
        if ballots.is_empty() {
            return Err(Error::NoBallots);
        }
        let count = candidates.count();
        for ballot in &ballots {
            let out_of_range = ballot
                .approvals()
                .find(|&j| j >= count)
                .or(if ballot.first_choice() >= count {
                    Some(ballot.first_choice())
                } else {
                    None
                });
            if let Some(index) = out_of_range {
                return Err(Error::CandidateOutOfRange { index, count });
            }
        }
        Ok(Election {
            candidates,
            ballots,
        })
    }

    /// Number of voters.
    pub fn voter_count(&self) -> usize {
        self.ballots.len()
    }

    /// Number of candidates.
    pub fn candidate_count(&self) -> usize {
        self.candidates.count()
    }

    pub fn candidates(&self) -> &CandidateSet {
        &self.candidates
    }

    pub fn ballots(&self) -> &[BallotPair] {
        &self.ballots
    }

    /// Plurality matrix rows: `true` exactly at each voter's first choice.
    pub fn plurality_rows(&self) -> Vec<Vec<bool>> {
        self.ballots
            .iter()
            .map(|b| {
                (0..self.candidate_count())
                    .map(|j| b.first_choice() == j)
                    .collect()
            })
            .collect()
    }

    /// Approval matrix rows: `true` at each approved candidate.
    pub fn approval_rows(&self) -> Vec<Vec<bool>> {
        self.ballots
            .iter()
            .map(|b| (0..self.candidate_count()).map(|j| b.approves(j)).collect())
            .collect()
    }
}

/// One cell of a beta(k) matrix. The weighted entry is kept symbolic so the
/// matrix still knows which cell carries the first-choice weight when `k = 1`
/// makes its numeric value collide with an ordinary approval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BetaEntry {
    Zero,
    One,
    Weighted,
}

impl BetaEntry {
    pub fn value(self, k: &Rational) -> Rational {
        match self {
            BetaEntry::Zero => Rational::zero(),
            BetaEntry::One => Rational::one(),
            BetaEntry::Weighted => k.clone(),
        }
    }
}

/// An `n × c` grid of beta(k) votes: every row has exactly one weighted
/// entry, and the remaining entries are 0 or 1.
///
/// Matrices usually come from [`compose_beta`], but the constructor accepts
/// any well-formed grid so that hand-written vote matrices (for instance the
/// two tie-breaking fixtures under `tests/golden/`) can be expressed without
/// first inventing ballots for them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BetaMatrix {
    entries: Vec<Vec<BetaEntry>>,
    k: Rational,
}

impl BetaMatrix {
    pub fn new(entries: Vec<Vec<BetaEntry>>, k: Rational) -> Result<Self, Error> {
        if k < Rational::one() {
            return Err(Error::WeightBelowOne { k });
        }
        if entries.is_empty() || entries[0].is_empty() {
            return Err(Error::InvalidBetaMatrix {
                reason: "matrix must have at least one row and one column".into(),
            });
        }
        let width = entries[0].len();
        for (i, row) in entries.iter().enumerate() {
            if row.len() != width {
                return Err(Error::InvalidBetaMatrix {
                    reason: format!("row {i} has {} entries, expected {width}", row.len()),
                });
            }
            let weighted = row.iter().filter(|&&e| e == BetaEntry::Weighted).count();
            if weighted != 1 {
                return Err(Error::InvalidBetaMatrix {
                    reason: format!("row {i} has {weighted} weighted entries, expected exactly 1"),
                });
            }
        }
        Ok(BetaMatrix { entries, k })
    }

    pub fn voter_count(&self) -> usize {
        self.entries.len()
    }

    pub fn candidate_count(&self) -> usize {
        self.entries[0].len()
    }

    pub fn k(&self) -> &Rational {
        &self.k
    }

    pub fn entry(&self, voter: usize, candidate: usize) -> BetaEntry {
        self.entries[voter][candidate]
    }

    pub fn value(&self, voter: usize, candidate: usize) -> Rational {
        self.entries[voter][candidate].value(&self.k)
    }

    /// Per-candidate column sums — the beta scores of this matrix.
    pub fn column_sums(&self) -> Vec<Rational> {
        let mut sums = vec![Rational::zero(); self.candidate_count()];
        for row in &self.entries {
            for (j, entry) in row.iter().enumerate() {
                sums[j] += &entry.value(&self.k);
            }
        }
        sums
    }

    /// Recovers the plurality matrix: `true` at each weighted entry.
    pub fn plurality_part(&self) -> Vec<Vec<bool>> {
        self.entries
            .iter()
            .map(|row| row.iter().map(|&e| e == BetaEntry::Weighted).collect())
            .collect()
    }

    /// Recovers the approval matrix: `true` at each nonzero entry.
    pub fn approval_part(&self) -> Vec<Vec<bool>> {
        self.entries
            .iter()
            .map(|row| row.iter().map(|&e| e != BetaEntry::Zero).collect())
            .collect()
    }
}

/// Builds the beta(k) matrix of an election: each voter's row holds the
/// weight at the first choice, 1 at every other approved candidate, 0
/// elsewhere. Requires `k ≥ 1`.
pub fn compose_beta(election: &Election, k: &Rational) -> Result<BetaMatrix, Error> {
    if *k < Rational::one() {
        return Err(Error::WeightBelowOne { k: k.clone() });
    }
    let c = election.candidate_count();
    let entries = election
        .ballots()
        .iter()
        .map(|ballot| {
            (0..c)
                .map(|j| {
                    if ballot.first_choice() == j {
                        BetaEntry::Weighted
                    } else if ballot.approves(j) {
                        BetaEntry::One
                    } else {
                        BetaEntry::Zero
                    }
                })
                .collect()
        })
        .collect();
    BetaMatrix::new(entries, k.clone())
}

fn check_rows_shape(
    matrix: &BetaMatrix,
    rows: &[Vec<bool>],
    name: &str,
) -> Result<(), Error> {
    let same = rows.len() == matrix.voter_count()
        && rows.iter().all(|r| r.len() == matrix.candidate_count());
    if same {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            left: format!("{}x{} beta matrix", matrix.voter_count(), matrix.candidate_count()),
            right: format!("{} matrix with {} rows", name, rows.len()),
        })
    }
}

/// True iff the matrix's weighted entries coincide exactly with the 1-entries
/// of the given plurality matrix. Holds for every matrix built by
/// [`compose_beta`]; fails for hand-written grids that put weight somewhere a
/// plurality ballot has none.
pub fn validate_regime_plurality(
    matrix: &BetaMatrix,
    plurality: &[Vec<bool>],
) -> Result<bool, Error> {
    check_rows_shape(matrix, plurality, "plurality")?;
    let ok = plurality.iter().enumerate().all(|(i, row)| {
        row.iter()
            .enumerate()
            .all(|(j, &one)| one == (matrix.entry(i, j) == BetaEntry::Weighted))
    });
    Ok(ok)
}

/// True iff the matrix's nonzero entries coincide exactly with the 1-entries
/// of the given approval matrix.
pub fn validate_regime_approval(
    matrix: &BetaMatrix,
    approval: &[Vec<bool>],
) -> Result<bool, Error> {
    check_rows_shape(matrix, approval, "approval")?;
    let ok = approval.iter().enumerate().all(|(i, row)| {
        row.iter()
            .enumerate()
            .all(|(j, &one)| one == (matrix.entry(i, j) != BetaEntry::Zero))
    });
    Ok(ok)
}

/// Full preference data for a set of voters: a strict ranking of all
/// candidates per voter, plus a cutoff `t` with `1 ≤ t ≤ c` saying how many
/// top candidates that voter approves when voting honestly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreferenceProfile {
    candidate_count: usize,
    rankings: Vec<Vec<usize>>,
    cutoffs: Vec<usize>,
}

impl PreferenceProfile {
    pub fn new(
        candidate_count: usize,
        rankings: Vec<Vec<usize>>,
        cutoffs: Vec<usize>,
    ) -> Result<Self, Error> {
        if candidate_count == 0 {
            return Err(Error::InvalidProfile {
                reason: "profile needs at least one candidate".into(),
            });
        }
        if rankings.is_empty() {
            return Err(Error::InvalidProfile {
                reason: "profile needs at least one voter".into(),
            });
        }
        if rankings.len() != cutoffs.len() {
            return Err(Error::InvalidProfile {
                reason: format!(
                    "{} rankings but {} cutoffs",
                    rankings.len(),
                    cutoffs.len()
                ),
            });
        }
        for (i, ranking) in rankings.iter().enumerate() {
            let mut seen = vec![false; candidate_count];
            if ranking.len() != candidate_count {
                return Err(Error::InvalidProfile {
                    reason: format!("voter {i}: ranking must list all {candidate_count} candidates"),
                });
            }
            for &j in ranking {
                if j >= candidate_count || seen[j] {
                    return Err(Error::InvalidProfile {
                        reason: format!("voter {i}: ranking is not a permutation"),
                    });
                }
                seen[j] = true;
            }
        }
        for (i, &t) in cutoffs.iter().enumerate() {
            if t < 1 || t > candidate_count {
                return Err(Error::InvalidProfile {
                    reason: format!("voter {i}: cutoff {t} outside 1..={candidate_count}"),
                });
            }
        }
        Ok(PreferenceProfile {
            candidate_count,
            rankings,
            cutoffs,
        })
    }

    pub fn voter_count(&self) -> usize {
        self.rankings.len()
    }

    pub fn candidate_count(&self) -> usize {
        self.candidate_count
    }

    pub fn ranking(&self, voter: usize) -> &[usize] {
        &self.rankings[voter]
    }

    pub fn cutoff(&self, voter: usize) -> usize {
        self.cutoffs[voter]
    }

    /// True iff `voter` ranks candidate `a` strictly above candidate `b`.
    pub fn prefers(&self, voter: usize, a: usize, b: usize) -> bool {
        let pos = |x| self.rankings[voter].iter().position(|&y| y == x).unwrap();
        pos(a) < pos(b)
    }
}

/// Derives the honest ballots of a profile: each voter's first choice is
/// their top-ranked candidate and they approve exactly their top `t`
/// candidates, so first choices are always approved.
pub fn honest_ballots(
    profile: &PreferenceProfile,
    candidates: &CandidateSet,
) -> Result<Election, Error> {
    if candidates.count() != profile.candidate_count() {
        return Err(Error::DimensionMismatch {
            left: format!("{}-candidate profile", profile.candidate_count()),
            right: format!("{}-candidate roster", candidates.count()),
        });
    }
    let ballots = (0..profile.voter_count())
        .map(|i| {
            let ranking = profile.ranking(i);
            BallotPair::new(ranking[0], ranking[..profile.cutoff(i)].iter().copied())
        })
        .collect::<Result<Vec<_>, _>>()?;
    Election::new(candidates.clone(), ballots)
}

/// Supported ballot file encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BallotFormat {
    Csv,
    Json,
}

#[derive(Serialize, Deserialize)]
struct BallotFileJson {
    candidates: Vec<String>,
    ballots: Vec<BallotJson>,
}

#[derive(Serialize, Deserialize)]
struct BallotJson {
    first: String,
    approve: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct ProfileFileJson {
    candidates: Vec<String>,
    profile: Vec<ProfileRowJson>,
}

#[derive(Serialize, Deserialize)]
struct ProfileRowJson {
    ranking: Vec<String>,
    approve_top: usize,
}

/// Parses a ballot file in the given format.
pub fn parse_election(bytes: &[u8], format: BallotFormat) -> Result<Election, Error> {
    match format {
        BallotFormat::Csv => parse_election_csv(bytes),
        BallotFormat::Json => parse_election_json(bytes),
    }
}

fn text_of(bytes: &[u8]) -> Result<&str, Error> {
    std::str::from_utf8(bytes).map_err(|_| Error::EmptyFile)
}

fn parse_election_csv(bytes: &[u8]) -> Result<Election, Error> {
    let text = text_of(bytes)?;
    let mut lines = text.lines().enumerate();
    let header = loop {
        match lines.next() {
            None => return Err(Error::EmptyFile),
            Some((_, line)) if line.trim().is_empty() => continue,
            Some((number, line)) => break (number + 1, line.trim()),
        }
    };
    let roster_text = header
        .1
        .strip_prefix("#candidates:")
        .ok_or(Error::EmptyFile)?;
    let candidates = CandidateSet::new(
        roster_text
            .split(',')
            .map(|id| id.trim().to_string())
            .collect(),
    )?;

    let mut ballots = Vec::new();
    for (number, raw) in lines {
        let line = raw.trim();
        let line_no = number + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (first_text, approve_text) = line
            .split_once(';')
            .ok_or(Error::BadFirstChoice { line: line_no })?;
        let first_text = first_text.trim();
        if first_text.is_empty() || first_text.contains(',') {
            return Err(Error::BadFirstChoice { line: line_no });
        }
        let first = candidates
            .index_of(first_text)
            .ok_or_else(|| Error::UnknownCandidate {
                line: line_no,
                id: first_text.to_string(),
            })?;
        let mut approvals = BTreeSet::new();
        for id in approve_text.split(',') {
            let id = id.trim();
            if id.is_empty() {
                continue;
            }
            let j = candidates
                .index_of(id)
                .ok_or_else(|| Error::UnknownCandidate {
                    line: line_no,
                    id: id.to_string(),
                })?;
            approvals.insert(j);
        }
        if !approvals.contains(&first) {
            return Err(Error::InconsistentBallot {
                line: line_no,
                id: first_text.to_string(),
            });
        }
        ballots.push(BallotPair::new(first, approvals)?);
    }
    if ballots.is_empty() {
        return Err(Error::EmptyFile);
    }
    Election::new(candidates, ballots)
}

fn parse_election_json(bytes: &[u8]) -> Result<Election, Error> {
    let file: BallotFileJson = serde_json::from_slice(bytes)?;
    let candidates = CandidateSet::new(file.candidates)?;
    if file.ballots.is_empty() {
        return Err(Error::EmptyFile);
    }
    let mut ballots = Vec::new();
    for (row, ballot) in file.ballots.iter().enumerate() {
        let line_no = row + 1;
        let first = candidates
            .index_of(&ballot.first)
            .ok_or_else(|| Error::UnknownCandidate {
                line: line_no,
                id: ballot.first.clone(),
            })?;
        let mut approvals = BTreeSet::new();
        for id in &ballot.approve {
            let j = candidates
                .index_of(id)
                .ok_or_else(|| Error::UnknownCandidate {
                    line: line_no,
                    id: id.clone(),
                })?;
            approvals.insert(j);
        }
        if !approvals.contains(&first) {
            return Err(Error::InconsistentBallot {
                line: line_no,
                id: ballot.first.clone(),
            });
        }
        ballots.push(BallotPair::new(first, approvals)?);
    }
    Election::new(candidates, ballots)
}

/// Renders an election back to the ballot-JSON document shape, used to embed
/// replayable witnesses inside verdict reports.
pub fn election_to_json(election: &Election) -> serde_json::Value {
    let file = BallotFileJson {
        candidates: election.candidates().ids().to_vec(),
        ballots: election
            .ballots()
            .iter()
            .map(|b| BallotJson {
                first: election.candidates().id(b.first_choice()).to_string(),
                approve: b
                    .approvals()
                    .map(|j| election.candidates().id(j).to_string())
                    .collect(),
            })
            .collect(),
    };
    serde_json::to_value(file).expect("ballot json is always serializable")
}

/// Parses a preference-profile file (JSON only).
pub fn parse_profile(bytes: &[u8]) -> Result<(CandidateSet, PreferenceProfile), Error> {
    let file: ProfileFileJson = serde_json::from_slice(bytes)?;
    let candidates = CandidateSet::new(file.candidates)?;
    let mut rankings = Vec::new();
    let mut cutoffs = Vec::new();
    for (row, entry) in file.profile.iter().enumerate() {
        let ranking = entry
            .ranking
            .iter()
            .map(|id| {
                candidates.index_of(id).ok_or_else(|| Error::UnknownCandidate {
                    line: row + 1,
                    id: id.clone(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        rankings.push(ranking);
        cutoffs.push(entry.approve_top);
    }
    let profile = PreferenceProfile::new(candidates.count(), rankings, cutoffs)?;
    Ok((candidates, profile))
}

/// Renders a profile to the profile-JSON document shape.
pub fn profile_to_json(candidates: &CandidateSet, profile: &PreferenceProfile) -> serde_json::Value {
    let file = ProfileFileJson {
        candidates: candidates.ids().to_vec(),
        profile: (0..profile.voter_count())
            .map(|i| ProfileRowJson {
                ranking: profile
                    .ranking(i)
                    .iter()
                    .map(|&j| candidates.id(j).to_string())
                    .collect(),
                approve_top: profile.cutoff(i),
            })
            .collect(),
    };
    serde_json::to_value(file).expect("profile json is always serializable")
}
