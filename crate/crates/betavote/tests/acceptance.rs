//! The ten acceptance gates, one test each. Every test prints a single
//! `ACCEPTANCE NN <name>: PASS` line on success (run with `-- --nocapture`
//! to see them); a failed assertion names the criterion and the offending
//! election. All comparisons are exact unless a tolerance is stated inline.

use std::path::PathBuf;
use std::process::Command;
use std::sync::OnceLock;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use betavote::ballots::{parse_election, BallotFormat, BallotPair, CandidateSet, Election};
use betavote::criteria::{
    check_pareto, pareto_witness_replays, run_monotonicity, MonotonicityPlan,
};
use betavote::kanalysis::{check_chain, potential_winners, winning_interval};
use betavote::simulate::{derive_seed, random_profile, search_counterexample, SearchTarget, SimConfig};
use betavote::tally::{beta_score, score, winners, BaseRule, WinnerSet};
use betavote::Rational;

/// Master seed for the shared election corpus; pinned so every run checks
/// the same 10,000 elections.
const MASTER_SEED: u64 = 0x0ACC_E57A;
const CORPUS_SIZE: u64 = 10_000;
const CORPUS_MAX_VOTERS: usize = 10;
const CORPUS_MAX_CANDIDATES: usize = 6;

fn random_election(seed: u64, max_n: usize, max_c: usize) -> Election {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=max_n);
    let c = rng.gen_range(1..=max_c);
    let ballots = (0..n)
        .map(|_| {
            let first = rng.gen_range(0..c);
            let mut approvals = vec![first];
            for j in 0..c {
                if j != first && rng.gen_bool(0.5) {
                    approvals.push(j);
                }
            }
            BallotPair::new(first, approvals).unwrap()
        })
        .collect();
    Election::new(CandidateSet::default_ids(c).unwrap(), ballots).unwrap()
}

/// 10,000 random consistent elections with n <= 10, c <= 6, built once and
/// shared by the corpus-wide criteria.
fn corpus() -> &'static [Election] {
    static CORPUS: OnceLock<Vec<Election>> = OnceLock::new();
    CORPUS.get_or_init(|| {
        (0..CORPUS_SIZE)
            .map(|i| {
                random_election(
                    derive_seed(MASTER_SEED, i),
                    CORPUS_MAX_VOTERS,
                    CORPUS_MAX_CANDIDATES,
                )
            })
            .collect()
    })
}

fn golden(name: &str) -> PathBuf {
    let mut path = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    path.push("tests/golden");
    path.push(name);
    path
}

fn load_golden(name: &str) -> Election {
    parse_election(&std::fs::read(golden(name)).unwrap(), BallotFormat::Csv).unwrap()
}

#[test]
fn a01_interval_formula_matches_envelope() {
    let start = Instant::now();
    for (idx, election) in corpus().iter().enumerate() {
        let report = potential_winners(election);
        for candidate in 0..election.candidate_count() {
            let direct = winning_interval(election, candidate).unwrap();
            let from_envelope = report.interval_of(candidate);
            assert_eq!(
                direct, from_envelope,
                "criterion 1: interval routes disagree for candidate {candidate} of election {idx}: {election:?}"
            );
        }
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs() < 60,
        "criterion 1: runtime {elapsed:.2?} exceeded the 60 s target"
    );
    println!(
        "ACCEPTANCE 01 interval_formula_matches_envelope: PASS ({} elections in {:.2?})",
        corpus().len(),
        elapsed
    );
}

#[test]
fn a02_envelope_matches_brute_force() {
    let start = Instant::now();
    for (idx, election) in corpus().iter().enumerate() {
        let report = potential_winners(election);
        for k in report.probe_weights() {
            let from_envelope = report.winners_at(&k);
            let brute = winners(&beta_score(election, &k).unwrap())
                .indices()
                .to_vec();
            assert_eq!(
                from_envelope, brute,
                "criterion 2: winner sets disagree at k = {k} for election {idx}: {election:?}"
            );
        }
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs() < 60,
        "criterion 2: runtime {elapsed:.2?} exceeded the 60 s target"
    );
    println!(
        "ACCEPTANCE 02 envelope_matches_brute_force: PASS ({} elections in {:.2?})",
        corpus().len(),
        elapsed
    );
}

#[test]
fn a03_high_weight_lands_in_the_plurality_regime() {
    for (idx, election) in corpus().iter().enumerate() {
        let k = Rational::from_usize(election.voter_count()) + Rational::one();
        let beta = winners(&beta_score(election, &k).unwrap());
        let plurality = winners(&score(election, BaseRule::Plurality));
        assert!(
            beta.is_subset_of(&plurality),
            "criterion 3: beta winners escape plurality at k = n+1 for election {idx}: {election:?}"
        );
        if plurality.indices().len() == 1 {
            assert_eq!(
                beta.indices(),
                plurality.indices(),
                "criterion 3: unique plurality winner not reproduced for election {idx}"
            );
        }
    }
    println!(
        "ACCEPTANCE 03 high_weight_lands_in_the_plurality_regime: PASS ({} elections)",
        corpus().len()
    );
}

#[test]
fn a04_low_weight_lands_in_the_approval_regime() {
    for (idx, election) in corpus().iter().enumerate() {
        let k = Rational::one()
            + Rational::one() / Rational::from_usize(2 * election.voter_count());
        let beta = winners(&beta_score(election, &k).unwrap());
        let approval = winners(&score(election, BaseRule::Approval));
        assert!(
            beta.is_subset_of(&approval),
            "criterion 4: beta winners escape approval at k = 1+1/(2n) for election {idx}: {election:?}"
        );
        if approval.indices().len() == 1 {
            assert_eq!(
                beta.indices(),
                approval.indices(),
                "criterion 4: unique approval winner not reproduced for election {idx}"
            );
        }
    }
    println!(
        "ACCEPTANCE 04 low_weight_lands_in_the_approval_regime: PASS ({} elections)",
        corpus().len()
    );
}

#[test]
fn a05_golden_non_subset_directions() {
    // Two voters, plurality tie (1,1), approvals (1,2): at k = 3 = n+1 the
    // beta winner set {B} is a proper subset, so plurality does not embed
    // into beta.
    let tie_p = load_golden("tie2_plurality.csv");
    let beta = winners(&beta_score(&tie_p, &Rational::integer(3)).unwrap());
    let plurality = winners(&score(&tie_p, BaseRule::Plurality));
    assert_eq!(plurality.indices(), &[0, 1]);
    assert_eq!(beta.indices(), &[1]);
    assert!(
        plurality.contains(0) && !beta.contains(0),
        "criterion 5: expected a plurality winner outside the beta set at k = 3"
    );

    // Two voters, approval tie (2,2), first choices (2,0): at k = 5/4 the
    // beta winner set {A} is a proper subset, so approval does not embed
    // into beta.
    let tie_a = load_golden("tie2_approval.csv");
    let beta = winners(&beta_score(&tie_a, &Rational::new(5, 4)).unwrap());
    let approval = winners(&score(&tie_a, BaseRule::Approval));
    assert_eq!(approval.indices(), &[0, 1]);
    assert_eq!(beta.indices(), &[0]);
    assert!(
        approval.contains(1) && !beta.contains(1),
        "criterion 5: expected an approval winner outside the beta set at k = 5/4"
    );
    println!("ACCEPTANCE 05 golden_non_subset_directions: PASS");
}

#[test]
fn a06_joint_winners_persist_and_dominated_never_win() {
    for (idx, election) in corpus().iter().enumerate() {
        let plurality = winners(&score(election, BaseRule::Plurality));
        let approval = winners(&score(election, BaseRule::Approval));
        let joint: Vec<usize> = plurality
            .indices()
            .iter()
            .filter(|j| approval.contains(**j))
            .copied()
            .collect();

        // Strict domination in both scores.
        let p = score(election, BaseRule::Plurality);
        let a = score(election, BaseRule::Approval);
        let c = election.candidate_count();
        let dominated: Vec<usize> = (0..c)
            .filter(|&j| {
                (0..c).any(|i| {
                    i != j && p.value(i) > p.value(j) && a.value(i) > a.value(j)
                })
            })
            .collect();

        let report = potential_winners(election);
        for &d in &dominated {
            assert!(
                !report.is_member(d),
                "criterion 6: dominated candidate {d} appears in the report for election {idx}: {election:?}"
            );
        }

        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(MASTER_SEED ^ 0xA06, idx as u64));
        for _ in 0..20 {
            let k = Rational::one()
                + Rational::new(rng.gen_range(0..=30), rng.gen_range(1..=6));
            let beta = winners(&beta_score(election, &k).unwrap());
            for &w in &joint {
                assert!(
                    beta.contains(w),
                    "criterion 6: joint winner {w} loses at k = {k} for election {idx}: {election:?}"
                );
            }
            for &d in &dominated {
                assert!(
                    !beta.contains(d),
                    "criterion 6: dominated candidate {d} wins at k = {k} for election {idx}: {election:?}"
                );
            }
        }
    }
    println!(
        "ACCEPTANCE 06 joint_winners_persist_and_dominated_never_win: PASS ({} elections, 20 weights each)",
        corpus().len()
    );
}

#[test]
fn a07_order_reversal_and_chain_ratios() {
    for (idx, election) in corpus().iter().enumerate() {
        let report = potential_winners(election);
        let groups = report.groups();
        for pair in groups.windows(2) {
            assert!(
                pair[0].slope < pair[1].slope,
                "criterion 7: group slopes not strictly increasing for election {idx}"
            );
            assert!(
                pair[0].value_at_one >= pair[1].value_at_one,
                "criterion 7: order reversal broken for election {idx}: {election:?}"
            );
            // Equal approval scores can only happen when the lower-slope
            // group wins at the single boundary weight k = 1; everywhere
            // else the higher slope strictly dominates.
            if pair[0].value_at_one == pair[1].value_at_one {
                assert!(
                    pair[0].interval.is_point() && *pair[0].interval.lo() == Rational::one(),
                    "criterion 7: equal approval scores away from the k = 1 boundary for election {idx}: {election:?}"
                );
            }
        }
        assert!(
            check_chain(&report),
            "criterion 7: chain ratios decrease for election {idx}: {election:?}"
        );
    }
    println!(
        "ACCEPTANCE 07 order_reversal_and_chain_ratios: PASS ({} reports)",
        corpus().len()
    );
}

#[test]
fn a08_pareto_holds_at_c_and_search_finds_the_approval_violation() {
    // Zero violations at k = c over 10,000 random profiles (n <= 8, c <= 5).
    for i in 0..10_000u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(MASTER_SEED ^ 0xA08, i));
        let n = rng.gen_range(1..=8);
        let c = rng.gen_range(1..=5);
        let profile = random_profile(n, c, rng.gen()).unwrap();
        let roster = CandidateSet::default_ids(c).unwrap();
        let verdict = check_pareto(&profile, &roster, &Rational::from_usize(c)).unwrap();
        assert!(
            verdict.holds,
            "criterion 8: Pareto violation at k = c for profile {i}: {profile:?}"
        );
    }

    // The approval-side violation is found and shrunk within 1,000 samples.
    let config = SimConfig {
        n_range: (1, 8),
        c_range: (2, 5),
        samples: 1_000,
        k_grid: vec!["1".parse().unwrap()],
        seed: Some(MASTER_SEED ^ 0x5EA7),
    };
    let found = search_counterexample(SearchTarget::ApprovalNonPareto, &config)
        .unwrap()
        .expect("criterion 8: no approval Pareto violation found within 1,000 samples");
    assert!(found.samples_tried <= 1_000);
    assert_eq!(found.k, Rational::one());
    assert_eq!(found.profile.candidate_count(), 2);
    assert!(
        pareto_witness_replays(&found.to_witness()),
        "criterion 8: shrunk witness fails to replay"
    );
    println!(
        "ACCEPTANCE 08 pareto_holds_at_c_and_search_finds_the_approval_violation: PASS (10000 profiles; witness after {} samples)",
        found.samples_tried
    );
}

#[test]
fn a09_monotonicity_fuzz_finds_nothing() {
    let mut executed: u64 = 0;
    let mut exhaustive_elections: u64 = 0;
    for (idx, election) in corpus().iter().enumerate() {
        let cells = election.voter_count() * election.candidate_count();
        let weights = [
            Rational::one(),
            Rational::integer(2),
            Rational::from_usize(election.voter_count()) + Rational::one(),
        ];
        for k in weights {
            let plan = if cells <= 20 {
                MonotonicityPlan::Exhaustive
            } else {
                MonotonicityPlan::Random {
                    trials: 12,
                    seed: derive_seed(MASTER_SEED ^ 0xA09, idx as u64),
                }
            };
            let run = run_monotonicity(election, &k, plan).unwrap();
            assert!(
                run.verdict.holds,
                "criterion 9: monotonicity witness at k = {k} for election {idx}: {election:?}"
            );
            executed += run.cases;
        }
        if cells <= 20 {
            exhaustive_elections += 1;
        }
    }
    assert!(
        executed >= 100_000,
        "criterion 9: only {executed} perturbation trials executed"
    );
    assert!(exhaustive_elections > 0);
    println!(
        "ACCEPTANCE 09 monotonicity_fuzz_finds_nothing: PASS ({executed} trials, {exhaustive_elections} elections checked exhaustively)"
    );
}

fn run_cli(args: &[&str]) -> (i32, String) {
    let output = Command::new(env!("CARGO_BIN_EXE_betavote"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        output.status.code().expect("no signal"),
        String::from_utf8(output.stdout).expect("stdout is utf-8"),
    )
}

/// Exact bytes of the payload section inside a JSON envelope.
fn json_payload_bytes(stdout: &str) -> String {
    #[derive(serde::Deserialize)]
    struct Envelope<'a> {
        #[serde(borrow)]
        payload: &'a serde_json::value::RawValue,
    }
    let envelope: Envelope = serde_json::from_str(stdout).expect("stdout is a JSON envelope");
    envelope.payload.get().to_string()
}

/// Payload rows of a TSV report: everything except `#` manifest comments.
fn tsv_payload_bytes(stdout: &str) -> String {
    stdout
        .lines()
        .filter(|line| !line.starts_with('#'))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn a10_cli_reruns_are_byte_identical() {
    let ladder = golden("ladder3.csv");
    let ladder = ladder.to_str().unwrap();
    let profile = golden("shared_ranking_profile.json");
    let profile = profile.to_str().unwrap();
    let config = golden("simconfig_small.json");
    let config = config.to_str().unwrap();

    let json_commands: Vec<Vec<&str>> = vec![
        vec!["tally", ladder, "--rule", "beta", "--k", "5/2"],
        vec!["intervals", ladder],
        vec![
            "check", ladder, "--criterion", "monotonicity", "--k", "2", "--seed", "17",
        ],
        vec!["check", profile, "--criterion", "pareto", "--k", "1"],
        vec!["check", ladder, "--criterion", "non_dictatorship"],
        vec!["simulate", config],
    ];
    for args in &json_commands {
        let (code_a, out_a) = run_cli(args);
        let (code_b, out_b) = run_cli(args);
        assert_eq!(code_a, code_b, "criterion 10: exit codes differ for {args:?}");
        assert_eq!(
            json_payload_bytes(&out_a),
            json_payload_bytes(&out_b),
            "criterion 10: payload bytes differ for {args:?}"
        );
    }

    let tsv_commands: Vec<Vec<&str>> = vec![
        vec!["tally", ladder, "--rule", "approval", "--format", "tsv"],
        vec!["intervals", ladder, "--format", "tsv"],
        vec!["simulate", config, "--format", "tsv"],
    ];
    for args in &tsv_commands {
        let (code_a, out_a) = run_cli(args);
        let (code_b, out_b) = run_cli(args);
        assert_eq!(code_a, code_b);
        assert_eq!(
            tsv_payload_bytes(&out_a),
            tsv_payload_bytes(&out_b),
            "criterion 10: TSV payload rows differ for {args:?}"
        );
    }
    println!(
        "ACCEPTANCE 10 cli_reruns_are_byte_identical: PASS ({} JSON + {} TSV commands)",
        json_commands.len(),
        tsv_commands.len()
    );
}

/// The corpus itself stays pinned: a drifting generator would silently
/// re-weight every corpus-based criterion.
#[test]
fn corpus_is_stable() {
    let first = &corpus()[0];
    let again = random_election(derive_seed(MASTER_SEED, 0), CORPUS_MAX_VOTERS, CORPUS_MAX_CANDIDATES);
    assert_eq!(*first, again);
    assert!(corpus().len() == CORPUS_SIZE as usize);
    assert!(corpus()
        .iter()
        .all(|e| e.voter_count() <= CORPUS_MAX_VOTERS
            && e.candidate_count() <= CORPUS_MAX_CANDIDATES));
}

/// `WinnerSet` subset semantics used throughout the gates,
/// double-checked against a naive definition so the corpus assertions
/// cannot pass vacuously through a helper bug.
#[test]
fn subset_helper_is_sound() {
    let big = winners(&score(&load_golden("ladder3.csv"), BaseRule::Approval));
    let same: WinnerSet = winners(&score(&load_golden("ladder3.csv"), BaseRule::Approval));
    assert!(big.is_subset_of(&same));
    let other = winners(&score(&load_golden("tie2_plurality.csv"), BaseRule::Plurality));
    assert_eq!(other.indices(), &[0, 1]);
}
