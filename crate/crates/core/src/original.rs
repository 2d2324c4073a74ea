//! Frege's original method: integer aggregate scores, and a cost of winning
//! equal to the floor of the average aggregate score.

use crate::error::{Error, Result};
use crate::profile::{argmax, CandidateId, Profile, Round};
use crate::quota::{audit_variable_quota, QuotaReport};
use crate::scalar::Rational;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use std::collections::HashMap;

/// Aggregate scores at round `t`, before the cost of round `t` is charged.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OriginalState {
    t: u64,
    sigma: Vec<BigInt>,
    wins: Vec<u64>,
}

impl OriginalState {
    /// State at round 1, where the aggregate scores equal the first round's
    /// plurality scores.
    pub fn new(first: &Round) -> Self {
        OriginalState {
            t: 1,
            sigma: first.scores().to_vec(),
            wins: vec![0; first.len()],
        }
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn sigma(&self) -> &[BigInt] {
        &self.sigma
    }

    /// Rounds won before round `t`.
    pub fn wins(&self) -> &[u64] {
        &self.wins
    }

    /// Sum of all aggregate scores.
    pub fn total(&self) -> BigInt {
        self.sigma.iter().sum()
    }

    /// Representative of round `t`.
    pub fn leader(&self) -> CandidateId {
        argmax(&self.sigma)
    }

    /// Cost charged to the representative of round `t`.
    pub fn cost(&self) -> BigInt {
        self.total().div_floor(&BigInt::from(self.sigma.len()))
    }

    /// Elects the representative of round `t`, charges the cost and adds the
    /// scores of round `t + 1`. Returns the winner and the cost.
    pub fn advance(&mut self, next: &Round) -> Result<(CandidateId, BigInt)> {
        if next.len() != self.sigma.len() {
            return Err(Error::DimensionMismatch {
                expected: self.sigma.len(),
                found: next.len(),
            });
        }
        let winner = self.leader();
        let cost = self.cost();
        self.sigma[winner.0] -= &cost;
        for (s, p) in self.sigma.iter_mut().zip(next.scores()) {
            *s += p;
        }
        if self.sigma[winner.0].is_negative() {
            return Err(Error::Invariant(format!(
                "aggregate score of {winner} negative at round {}",
                self.t + 1
            )));
        }
        self.wins[winner.0] += 1;
        self.t += 1;
        Ok((winner, cost))
    }

    /// Pure form of [`OriginalState::advance`].
    pub fn step(&self, next: &Round) -> Result<(OriginalState, CandidateId, BigInt)> {
        let mut state = self.clone();
        let (winner, cost) = state.advance(next)?;
        Ok((state, winner, cost))
    }
}

/// One row of an original-method run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OriginalRecord {
    pub t: u64,
    /// Plurality scores of this round.
    pub round: Round,
    /// Aggregate scores the winner is chosen on.
    pub sigma: Vec<BigInt>,
    pub winner: CandidateId,
    pub cost: BigInt,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OriginalTrace {
    pub candidates: Vec<String>,
    pub records: Vec<OriginalRecord>,
    /// Total wins per candidate over the whole run.
    pub wins: Vec<u64>,
}

impl OriginalTrace {
    pub fn winners(&self) -> Vec<CandidateId> {
        self.records.iter().map(|r| r.winner).collect()
    }

    pub fn costs(&self) -> Vec<BigInt> {
        self.records.iter().map(|r| r.cost.clone()).collect()
    }

    /// Variable quota audit of the winner sequence.
    pub fn audit(&self) -> QuotaReport {
        audit_variable_quota(
            self.candidates.len(),
            self.records
                .iter()
                .map(|r| (crate::profile::normalize(&r.round), r.winner)),
        )
    }
}

/// Runs the original method for `horizon` rounds.
pub fn run_original(profile: &Profile, horizon: u64) -> Result<OriginalTrace> {
    profile.ensure_horizon(horizon)?;
    let round_at = |t: u64| profile.round(t).expect("horizon checked");
    let mut state = OriginalState::new(round_at(1));
    let mut records = Vec::with_capacity(horizon as usize);
    for t in 1..=horizon {
        records.push(OriginalRecord {
            t,
            round: round_at(t).clone(),
            sigma: state.sigma.clone(),
            winner: state.leader(),
            cost: state.cost(),
        });
        if t < horizon {
            state.advance(round_at(t + 1))?;
        }
    }
    let mut wins = vec![0; profile.m()];
    for r in &records {
        wins[r.winner.0] += 1;
    }
    Ok(OriginalTrace {
        candidates: profile.candidates().to_vec(),
        records,
        wins,
    })
}

/// First round at which the total aggregate score reaches `n * m`, after
/// which the cost of winning stays at `n`.
///
/// The total evolves as `a(1) = n`, `a(t+1) = a(t) + n - floor(a(t) / m)`
/// regardless of how the votes are split.
pub fn cost_stabilization_time(n: u64, m: u64) -> u64 {
    assert!(n >= 1 && m >= 2, "need n >= 1 and m >= 2");
    let (n, m) = (n as u128, m as u128);
    let target = n * m;
    let (mut a, mut t) = (n, 1u64);
    while a != target {
        a = a + n - a / m;
        t += 1;
    }
    t
}

/// Periodic regime of a fixed electorate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cycle {
    /// First round of the periodic part.
    pub start: u64,
    pub period: u64,
    /// Wins of each candidate within one period.
    pub wins_per_period: Vec<u64>,
}

impl Cycle {
    /// Whether every candidate wins a share of each period exactly equal to
    /// its share of the votes.
    pub fn is_proportional(&self, round: &Round) -> bool {
        let period = BigInt::from(self.period);
        self.wins_per_period
            .iter()
            .zip(round.scores())
            .all(|(w, s)| BigInt::from(*w) * round.voters() == s * &period)
    }
}

/// Default bound on the number of simulated rounds in [`detect_cycle`].
pub const DEFAULT_CYCLE_CAP: u64 = 10_000_000;

/// Finds the first repeated aggregate-score vector of a fixed electorate.
///
/// The state space is finite since every score stays within `0..=n*m`, so a
/// repetition always exists; `cap` bounds the search.
pub fn detect_cycle(profile: &Profile, cap: u64) -> Result<Cycle> {
    let round = match profile.rounds() {
        crate::profile::Rounds::Fixed(r) => r,
        crate::profile::Rounds::Varying(_) => {
            return Err(Error::Validation("cycle detection requires a fixed electorate".into()))
        }
    };
    let mut state = OriginalState::new(round);
    let mut seen: HashMap<Vec<BigInt>, u64> = HashMap::new();
    let mut winners: Vec<CandidateId> = Vec::new();
    loop {
        if let Some(&start) = seen.get(&state.sigma) {
            let period = state.t - start;
            let mut wins_per_period = vec![0; profile.m()];
            for w in &winners[(start - 1) as usize..] {
                wins_per_period[w.0] += 1;
            }
            return Ok(Cycle {
                start,
                period,
                wins_per_period,
            });
        }
        if state.t > cap {
            return Err(Error::CycleCapExceeded { cap });
        }
        seen.insert(state.sigma.clone(), state.t);
        let (winner, _) = state.advance(round)?;
        winners.push(winner);
    }
}

/// Offsets `c_j` of the closed form of the aggregate scores after
/// stabilization: `c_j = sum_{s <= t0+1} pi_j^s - sigma_j^{t0+1}`.
/// `None` if the trace ends before round `t0 + 1`.
pub fn closed_form_offsets(trace: &OriginalTrace, t0: u64) -> Option<Vec<BigInt>> {
    let after = trace.records.get(t0 as usize)?;
    let m = trace.candidates.len();
    let mut cumulative = vec![BigInt::zero(); m];
    for r in &trace.records[..=t0 as usize] {
        for (c, p) in cumulative.iter_mut().zip(r.round.scores()) {
            *c += p;
        }
    }
    Some(cumulative.iter().zip(&after.sigma).map(|(c, s)| c - s).collect())
}

/// Checks `sigma_j^{t+1} = sum_{s<=t+1} pi_j^s - c_j - n (rho_j(t) - rho_j(t0))`
/// for every `t >= t0` covered by the trace. Requires a constant voter
/// count; vacuously true when the trace ends before round `t0 + 1`.
pub fn closed_form_check(trace: &OriginalTrace, t0: u64, offsets: &[BigInt]) -> bool {
    let records = &trace.records;
    if t0 == 0 || records.len() as u64 <= t0 {
        return true;
    }
    let n = records[0].round.voters().clone();
    if records.iter().any(|r| r.round.voters() != &n) {
        return false;
    }
    let m = trace.candidates.len();
    let mut cumulative = vec![BigInt::zero(); m];
    let mut wins = vec![0u64; m];
    let mut wins_at_t0 = vec![0u64; m];
    for (idx, r) in records.iter().enumerate() {
        let t = idx as u64 + 1;
        for (c, p) in cumulative.iter_mut().zip(r.round.scores()) {
            *c += p;
        }
        // Here `cumulative` covers rounds 1..=t and `wins` covers 1..t-1, so
        // this checks the identity at t-1.
        if t > t0 {
            for j in 0..m {
                let expected = &cumulative[j] - &offsets[j] - &n * BigInt::from(wins[j] as i64 - wins_at_t0[j] as i64);
                if expected != r.sigma[j] {
                    return false;
                }
            }
        }
        wins[r.winner.0] += 1;
        if t == t0 {
            wins_at_t0.clone_from(&wins);
        }
    }
    true
}

/// Upper bound on `|rho_j(t)/t - pi_j/n| * t` for `t >= t0` on a fixed
/// electorate: `pi_j/n + rho_j(t0) + t0 + m`.
pub fn convergence_constant(round: &Round, wins_at_t0: u64, t0: u64, j: usize) -> Rational {
    Rational::new(round.scores()[j].clone(), round.voters().clone())
        + Rational::from_integer(BigInt::from(wins_at_t0 + t0 + round.len() as u64))
}
