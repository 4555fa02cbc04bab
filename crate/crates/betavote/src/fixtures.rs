//! Hand-checked sample elections shared by the unit tests. Each constructor
//! documents the facts the tests rely on; the CSV twins live under
//! `tests/golden/`.

use crate::ballots::{BallotPair, CandidateSet, Election, PreferenceProfile};

fn build(ids: &[&str], rows: &[(usize, &[usize])]) -> Election {
    let candidates = CandidateSet::new(ids.iter().map(|s| s.to_string()).collect()).unwrap();
    let ballots = rows
        .iter()
        .map(|&(first, approve)| BallotPair::new(first, approve.iter().copied()).unwrap())
        .collect();
    Election::new(candidates, ballots).unwrap()
}

/// Six voters, three candidates. First-choice counts (1, 2, 3) climb while
/// approval counts (6, 5, 3) fall. Score lines at k=1 are (6, 5, 3) with
/// slopes (1, 2, 3); A wins on [1,2], B on [2,3], C on [3,∞).
pub fn ladder3() -> Election {
    build(
        &["A", "B", "C"],
        &[
            (0, &[0, 1]),
            (1, &[0, 1]),
            (1, &[0, 1]),
            (2, &[0, 1, 2]),
            (2, &[0, 1, 2]),
            (2, &[0, 2]),
        ],
    )
}

/// Same first-choice counts (1, 2, 3) but approval counts (6, 4, 3): the
/// middle candidate's line never reaches the top, so only A and C win, with
/// the handover at k = 5/2.
pub fn ladder3_skip() -> Election {
    build(
        &["A", "B", "C"],
        &[
            (0, &[0, 1]),
            (1, &[0, 1]),
            (1, &[0, 1]),
            (2, &[0, 1, 2]),
            (2, &[0, 2]),
            (2, &[0, 2]),
        ],
    )
}

/// Approval counts (6, 5, 4) against first-choice counts (1, 2, 3): all
/// three score lines pass through one point at k=2, so the middle candidate
/// wins at exactly that single weight.
pub fn triple_cross() -> Election {
    build(
        &["A", "B", "C"],
        &[
            (0, &[0, 1, 2]),
            (1, &[0, 1]),
            (1, &[0, 1]),
            (2, &[0, 1, 2]),
            (2, &[0, 1, 2]),
            (2, &[0, 2]),
        ],
    )
}

/// Two voters, opposite first choices; voter 1 also approves B. Plurality
/// ties (1, 1) but approval is (1, 2), so any weight above the voter count
/// breaks the plurality tie toward B.
pub fn tie2_plurality() -> Election {
    build(&["A", "B"], &[(0, &[0, 1]), (1, &[1])])
}

/// Two voters who both put A first and approve both candidates. Approval
/// ties (2, 2) but first choices are (2, 0), so any weight above 1 breaks
/// the approval tie toward A.
pub fn tie2_approval() -> Election {
    build(&["A", "B"], &[(0, &[0, 1]), (0, &[0, 1])])
}

/// Five voters, two candidates: first choices (3, 2), approvals (3, 5).
/// The crossover sits at k = 1 + (5-3)/(3-2) = 3.
pub fn two_cross() -> Election {
    build(
        &["A", "B"],
        &[
            (0, &[0, 1]),
            (0, &[0, 1]),
            (0, &[0, 1]),
            (1, &[1]),
            (1, &[1]),
        ],
    )
}

/// The profile behind `tie2_approval`: both voters rank A above B and
/// approve both. B ties under approval yet every voter prefers A.
pub fn shared_ranking_profile() -> (CandidateSet, PreferenceProfile) {
    let roster = CandidateSet::new(vec!["A".into(), "B".into()]).unwrap();
    let profile =
        PreferenceProfile::new(2, vec![vec![0, 1], vec![0, 1]], vec![2, 2]).unwrap();
    (roster, profile)
}
