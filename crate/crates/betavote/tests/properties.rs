//! Randomized property tests over generated elections and rationals.
//!
//! These complement the fixed seeded corpus in the acceptance suite with
//! shrinking generators: failures minimize to small reproducible inputs.

use proptest::prelude::*;

use betavote::{
    beta_score, potential_winners, winners, winning_interval, BallotPair, CandidateSet, Election,
    KExpr, Rational,
};

fn rational() -> impl Strategy<Value = Rational> {
    (-200i64..=200, 1i64..=40).prop_map(|(numer, denom)| Rational::new(numer, denom))
}

fn weight() -> impl Strategy<Value = Rational> {
    // Weights at and above the domain edge k = 1.
    (0i64..=60, 1i64..=8).prop_map(|(numer, denom)| Rational::one() + Rational::new(numer, denom))
}

fn election() -> impl Strategy<Value = Election> {
    (1usize..=5)
        .prop_flat_map(|candidate_count| {
            let ballot = (0..candidate_count, proptest::collection::vec(any::<bool>(), candidate_count))
                .prop_map(|(first, mask)| {
                    let mut approvals: Vec<usize> = mask
                        .iter()
                        .enumerate()
                        .filter_map(|(index, approve)| approve.then_some(index))
                        .collect();
                    if !approvals.contains(&first) {
                        approvals.push(first);
                    }
                    BallotPair::new(first, approvals).expect("first choice is approved")
                });
            (
                Just(candidate_count),
                proptest::collection::vec(ballot, 1..=8),
            )
        })
        .prop_map(|(candidate_count, ballots)| {
            let candidates = CandidateSet::default_ids(candidate_count).expect("count >= 1");
            Election::new(candidates, ballots).expect("ballots index valid candidates")
        })
}

proptest! {
    #[test]
    fn rational_display_parse_roundtrip(r in rational()) {
        let text = r.to_string();
        let back: Rational = text.parse().expect("display output parses");
        prop_assert_eq!(back, r);
    }

    #[test]
    fn rational_field_laws(a in rational(), b in rational(), c in rational()) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&(&a + &b) * &c, &(&a * &c) + &(&b * &c));
        prop_assert_eq!(&(&a + &b) - &b, a.clone());
        prop_assert!((&a - &a).is_zero());
    }

    #[test]
    fn kexpr_display_parse_roundtrip(choice in 0usize..6, lit in rational()) {
        let expr = match choice {
            0 => KExpr::N,
            1 => KExpr::NPlusOne,
            2 => KExpr::OnePlusInvTwoN,
            3 => KExpr::C,
            4 => KExpr::CMinusOne,
            _ => KExpr::Literal(Rational::one() + (&lit * &lit)),
        };
        let back: KExpr = expr.to_string().parse().expect("display output parses");
        prop_assert_eq!(back, expr);
    }

    #[test]
    fn envelope_winners_match_brute_force(e in election(), k in weight()) {
        let report = potential_winners(&e);
        let brute = winners(&beta_score(&e, &k).expect("k >= 1"))
            .indices()
            .to_vec();
        prop_assert_eq!(report.winners_at(&k), brute);
    }

    #[test]
    fn envelope_partitions_the_domain(e in election()) {
        let report = potential_winners(&e);
        let mut combined = betavote::kanalysis::KIntervalSet::empty();
        for candidate in 0..e.candidate_count() {
            for interval in report.interval_of(candidate).intervals() {
                combined.insert(interval.clone());
            }
        }
        prop_assert!(combined.covers_domain());
    }

    #[test]
    fn interval_formula_agrees_with_envelope(e in election()) {
        let report = potential_winners(&e);
        for candidate in 0..e.candidate_count() {
            let direct = winning_interval(&e, candidate).expect("candidate in range");
            prop_assert_eq!(direct, report.interval_of(candidate));
        }
    }
}
