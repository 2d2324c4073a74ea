mod common;

use frege::apportionment::DivisorCriterion;
use frege::axioms::check_quota;
use frege::original::convergence_constant;
use frege::quota::lower_deficit_bound;
use frege::{
    cost_stabilization_time, detect_cycle, is_divisor_admissible, run_modified, run_original, CandidateId, Method,
    Profile, Rational, Round, SmallProblem,
};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn int(n: u64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

fn arb_fixed() -> impl Strategy<Value = Profile> {
    prop::collection::vec(0u64..300, 2..=8)
        .prop_filter("some voter", |v| v.iter().any(|&s| s > 0))
        .prop_map(|v| Profile::fixed(v).unwrap())
}

fn arb_varying() -> impl Strategy<Value = (Profile, u64)> {
    (2usize..=8, 1u64..=200, any::<u64>()).prop_map(|(m, horizon, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (common::varying_profile(&mut rng, m, horizon), horizon)
    })
}

/// Exact checks on a modified-method run: scores sum to one, stay above
/// share minus one, and the cumulative surplus `sum p - r` lies in
/// `(-1, (m-1)/2]`, strictly below the upper end for `m >= 3`.
fn check_modified(profile: &Profile, horizon: u64) -> Result<(), TestCaseError> {
    let m = profile.m();
    let trace = run_modified::<Rational>(profile, horizon).unwrap();
    let upper = Rational::new(BigInt::from(m - 1), BigInt::from(2));
    let mut cumulative = vec![Rational::zero(); m];
    let mut wins = vec![0u64; m];
    for r in &trace.records {
        let sum: Rational = r.scores.iter().sum();
        prop_assert!(sum.is_one(), "round {} sums to {}", r.t, sum);
        for (s, p) in r.scores.iter().zip(&r.shares) {
            prop_assert!(s - p > -Rational::one());
        }
        wins[r.winner.0] += 1;
        for j in 0..m {
            cumulative[j] += &r.shares[j];
            let surplus = &cumulative[j] - int(wins[j]);
            prop_assert!(surplus > -Rational::one(), "t {} candidate {}: {}", r.t, j, surplus);
            if m >= 3 {
                prop_assert!(surplus < upper);
            } else {
                prop_assert!(surplus <= upper);
            }
            if m <= 4 {
                prop_assert!(surplus.abs() < int(2));
            }
        }
    }
    let audit = trace.audit();
    prop_assert!(audit.upper_ok());
    if m <= 3 {
        prop_assert!(audit.lower_ok());
    }
    prop_assert!(audit.bound_breaches.is_empty());
    prop_assert!(audit.max_lower_deficit <= BigInt::from(lower_deficit_bound(m)));
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn total_score_rises_to_nm(n in 1u64..=10_000, m in 2u64..=100) {
        let t0 = cost_stabilization_time(n, m);
        let (n_big, m_big) = (BigInt::from(n), BigInt::from(m));
        let mut a = n_big.clone();
        for t in 1..=t0 + 5 {
            if t >= t0 {
                prop_assert_eq!(&a, &(&n_big * &m_big));
            } else {
                prop_assert!(a < &n_big * &m_big);
            }
            let next = &a + &n_big - &a / &m_big;
            prop_assert!(next >= a);
            a = next;
        }
    }

    #[test]
    fn original_totals_on_profiles(profile in arb_fixed(), horizon in 1u64..=300) {
        let trace = run_original(&profile, horizon).unwrap();
        let n = profile.constant_voters().unwrap().clone();
        let nm = &n * BigInt::from(profile.m());
        let t0 = cost_stabilization_time(n.try_into().unwrap(), profile.m() as u64);
        let mut prev = BigInt::zero();
        for r in &trace.records {
            let a: BigInt = r.sigma.iter().sum();
            prop_assert!(a >= prev);
            prop_assert!(r.sigma.iter().all(|s| !s.is_negative()));
            prop_assert_eq!(a == nm, r.t >= t0);
            prev = a;
        }
    }

    #[test]
    fn original_sigma_nonnegative_on_varying((profile, horizon) in arb_varying()) {
        let trace = run_original(&profile, horizon).unwrap();
        for r in &trace.records {
            prop_assert!(r.sigma.iter().all(|s| !s.is_negative()));
        }
    }

    #[test]
    fn original_constant_size_totals(m in 2usize..=6, n in 1u64..=40, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let profile = common::constant_size_profile(&mut rng, m, n, 150);
        let trace = run_original(&profile, 150).unwrap();
        let t0 = cost_stabilization_time(n, m as u64);
        let mut prev = BigInt::zero();
        for r in &trace.records {
            let a: BigInt = r.sigma.iter().sum();
            prop_assert!(a >= prev);
            prop_assert_eq!(a == BigInt::from(n * m as u64), r.t >= t0);
            prev = a;
        }
    }

    #[test]
    fn original_win_rate_bound(profile in arb_fixed()) {
        let n: u64 = profile.constant_voters().unwrap().try_into().unwrap();
        let m = profile.m();
        let t0 = cost_stabilization_time(n, m as u64);
        let horizon = t0 + 1500;
        let trace = run_original(&profile, horizon).unwrap();
        let round = profile.round(1).unwrap();
        let mut wins = vec![0u64; m];
        let mut at_t0 = vec![0u64; m];
        for r in &trace.records {
            wins[r.winner.0] += 1;
            if r.t == t0 {
                at_t0.clone_from(&wins);
            }
            if r.t >= t0 {
                for j in 0..m {
                    let k = convergence_constant(round, at_t0[j], t0, j);
                    let expected = Rational::new(round.scores()[j].clone() * BigInt::from(r.t), BigInt::from(n));
                    prop_assert!((int(wins[j]) - expected).abs() <= k);
                }
            }
        }
    }

    #[test]
    fn cycle_wins_are_proportional(profile in prop::collection::vec(0u64..=50, 2..=5)
        .prop_filter("some voter", |v| v.iter().any(|&s| s > 0))
        .prop_map(|v| Profile::fixed(v).unwrap()))
    {
        let cycle = detect_cycle(&profile, 1_000_000).unwrap();
        prop_assert!(cycle.is_proportional(profile.round(1).unwrap()));
    }

    #[test]
    fn modified_on_fixed(profile in arb_fixed(), horizon in 1u64..=500) {
        check_modified(&profile, horizon)?;
    }

    #[test]
    fn modified_on_varying((profile, horizon) in arb_varying()) {
        check_modified(&profile, horizon)?;
    }

    #[test]
    fn modified_scaling_keeps_trace((profile, horizon) in arb_varying(), k in 2u64..=9) {
        let a = run_modified::<Rational>(&profile, horizon).unwrap();
        let b = run_modified::<Rational>(&profile.scaled(&BigInt::from(k)).unwrap(), horizon).unwrap();
        prop_assert_eq!(a.winners(), b.winners());
        for (x, y) in a.records.iter().zip(&b.records) {
            prop_assert_eq!(&x.scores, &y.scores);
        }
    }

    #[test]
    fn apportionment_properties(
        votes in prop::collection::vec(1u64..=1000, 1..=8),
        seats in 1u64..=150,
    ) {
        let problem = SmallProblem::from_votes(&votes, seats).unwrap();
        let m = votes.len();
        for method in Method::ALL {
            let sol = method.apportion(&problem);
            prop_assert_eq!(sol.total(), seats);
            let check = check_quota(&sol, &problem).unwrap();
            match method {
                Method::Quota => prop_assert!(check.upper_ok && check.lower_ok),
                Method::LargestRemainder => prop_assert!(check.upper_ok && check.lower_ok),
                Method::Divisor(DivisorCriterion::DHondt) => prop_assert!(check.lower_ok),
                Method::Divisor(DivisorCriterion::Adams) => prop_assert!(check.upper_ok),
                Method::Frege => {
                    prop_assert!(check.upper_ok);
                    let deficit = check.lower_slack.iter().map(|s| -s).max().unwrap();
                    prop_assert!(deficit <= BigInt::from(lower_deficit_bound(m)));
                }
                Method::Divisor(_) => {}
            }
            // With fewer seats than parties no divisor vanishing at zero is admissible.
            if let Method::Divisor(c) = method {
                prop_assume!(seats >= m as u64 || !c.vanishes_at(0));
                prop_assert!(is_divisor_admissible(c, &problem, &sol));
            }
        }
    }

    #[test]
    fn weak_proportionality(seats in prop::collection::vec(0u64..=30, 1..=8), scale in 1u64..=7) {
        prop_assume!(seats.iter().any(|&a| a > 0));
        let k: u64 = seats.iter().sum();
        let votes: Vec<u64> = seats.iter().map(|a| a * scale).collect();
        let problem = SmallProblem::from_votes(&votes, k).unwrap();
        for method in Method::ALL {
            let sol = method.apportion(&problem);
            prop_assert_eq!(sol.seats(), &seats[..], "{}", method);
        }
    }

    #[test]
    fn frege_is_house_monotone(votes in prop::collection::vec(1u64..=1000, 2..=8)) {
        let problem = SmallProblem::from_votes(&votes, 1).unwrap();
        let mut prev = vec![0u64; votes.len()];
        for k in 1..=100 {
            let sol = Method::Frege.apportion(&problem.with_seats(k).unwrap());
            let grown: Vec<usize> = (0..votes.len()).filter(|&i| sol.seats()[i] != prev[i]).collect();
            prop_assert_eq!(grown.len(), 1);
            prop_assert_eq!(sol.seats()[grown[0]], prev[grown[0]] + 1);
            prev = sol.0;
        }
    }
}

/// First lower-quota violation of a fixed electorate within `horizon`.
fn first_lower_violation(scores: &[u64], horizon: u64) -> Option<(u64, CandidateId, BigInt)> {
    let trace = run_modified::<Rational>(&Profile::fixed(scores.to_vec()).unwrap(), horizon).unwrap();
    let audit = trace.audit();
    audit
        .lower_violations
        .first()
        .map(|v| (v.t, v.candidate, v.amount.clone()))
}

#[test]
fn four_candidates_violate_lower_quota() {
    let (t, who, amount) = first_lower_violation(&[1001, 1000, 115, 26], 30).unwrap();
    assert!(t <= 30);
    assert_eq!(amount, BigInt::from(1));
    assert_eq!((t, who), (30, CandidateId(1)));
}

#[test]
fn five_candidates_violate_lower_quota() {
    let (t, who, amount) = first_lower_violation(&[1001, 1000, 300, 107, 92], 15).unwrap();
    assert!(t <= 15);
    assert_eq!(amount, BigInt::from(1));
    assert_eq!((t, who), (15, CandidateId(1)));
}

#[test]
fn harmonic_construction_scores_exceed_one() {
    let profile = common::harmonic_profile(11);
    let trace = run_modified::<Rational>(&profile, 11).unwrap();
    let last = &trace.records[10];
    // Candidate 11 has collected the harmonic sum without winning.
    assert!(last.scores[10] > int(3));
    let cumulative: Rational = trace.records[..10].iter().map(|r| r.shares[10].clone()).sum();
    assert!(cumulative > int(2));
    assert_eq!(trace.wins[10], 1);
}

#[test]
fn three_candidates_never_break_lower_quota_on_long_runs() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let profile = common::varying_profile(&mut rng, 3, 1000);
        let audit = run_modified::<Rational>(&profile, 1000).unwrap().audit();
        assert!(audit.lower_ok() && audit.upper_ok());
    }
}

#[test]
fn scaling_a_round_keeps_shares() {
    let r = Round::new([3u32, 5, 0]).unwrap();
    let scaled = r.scaled(&BigInt::from(7)).unwrap();
    assert_eq!(r.shares::<Rational>().unwrap(), scaled.shares::<Rational>().unwrap());
}

/// The cost `floor(a / m)` does not commute with scaling the electorate, so
/// the original method is not scale invariant: (2, 1) and (4, 2) part ways
/// in round 3.
#[test]
fn original_scaling_can_change_winners() {
    let small = run_original(&Profile::fixed(vec![2u64, 1]).unwrap(), 3).unwrap();
    let large = run_original(&Profile::fixed(vec![4u64, 2]).unwrap(), 3).unwrap();
    assert_eq!(small.winners()[..2], large.winners()[..2]);
    assert_ne!(small.winners()[2], large.winners()[2]);
    assert_eq!(small.records[0].sigma, vec![BigInt::from(2), BigInt::from(1)]);
}
