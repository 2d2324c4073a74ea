#![allow(dead_code)]

use frege::{Profile, Round};
use rand::Rng;

/// Fixed electorate with `2..=max_m` candidates and scores in `0..=max_score`,
/// at least one of them positive.
pub fn fixed_profile<R: Rng>(rng: &mut R, max_m: usize, max_score: u64) -> Profile {
    let m = rng.gen_range(2..=max_m);
    loop {
        let scores: Vec<u64> = (0..m).map(|_| rng.gen_range(0..=max_score)).collect();
        if scores.iter().any(|&s| s > 0) {
            return Profile::fixed(scores).unwrap();
        }
    }
}

/// Each of `n` voters picks a uniformly random candidate.
pub fn random_round<R: Rng>(rng: &mut R, m: usize, n: u64) -> Round {
    let mut scores = vec![0u64; m];
    for _ in 0..n {
        scores[rng.gen_range(0..m)] += 1;
    }
    Round::new(scores).unwrap()
}

/// Varying electorate of `horizon` rounds with 1 to 12 voters per round,
/// which keeps the common denominator of all shares small.
pub fn varying_profile<R: Rng>(rng: &mut R, m: usize, horizon: u64) -> Profile {
    let rounds = (0..horizon)
        .map(|_| {
            let n = rng.gen_range(1..=12);
            random_round(rng, m, n)
        })
        .collect();
    Profile::varying(rounds).unwrap()
}

/// Varying electorate with the same number of voters in every round.
pub fn constant_size_profile<R: Rng>(rng: &mut R, m: usize, n: u64, horizon: u64) -> Profile {
    let rounds = (0..horizon).map(|_| random_round(rng, m, n)).collect();
    Profile::varying(rounds).unwrap()
}

/// Profile with `m` candidates and `n_t = m - t + 1` voters in round `t`:
/// candidates `t..=m` get one vote each.
pub fn harmonic_profile(m: usize) -> Profile {
    let rounds = (1..=m)
        .map(|t| Round::new((1..=m).map(|j| u32::from(j >= t))).unwrap())
        .collect();
    Profile::varying(rounds).unwrap()
}
