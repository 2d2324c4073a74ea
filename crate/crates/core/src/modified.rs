//! The modified method: aggregate scores built from normalized plurality
//! scores, with a constant cost of winning of exactly one.
//!
//! Scores may become negative. With exact arithmetic the scores always sum
//! to one, and `s_j^{t+1} = sum_{s<=t+1} p_j^s - r_j(t)`.

use crate::error::{Error, Result};
use crate::profile::{argmax, CandidateId, Profile, Round};
use crate::quota::{audit_variable_quota, QuotaReport};
use crate::scalar::{check_distribution, total, Scalar};

/// Aggregate scores at round `t` together with the cumulative shares and
/// the wins before round `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModifiedState<T> {
    t: u64,
    scores: Vec<T>,
    cumulative: Vec<T>,
    wins: Vec<u64>,
}

impl<T: Scalar> ModifiedState<T> {
    /// State at round 1 from the first round's normalized scores.
    pub fn new(first: Vec<T>) -> Result<Self> {
        check_distribution(&first)?;
        let m = first.len();
        if m < 2 {
            return Err(Error::Validation("at least two candidates required".into()));
        }
        Ok(ModifiedState {
            t: 1,
            cumulative: first.clone(),
            scores: first,
            wins: vec![0; m],
        })
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn scores(&self) -> &[T] {
        &self.scores
    }

    /// Sum of the normalized scores of rounds `1..=t`.
    pub fn cumulative(&self) -> &[T] {
        &self.cumulative
    }

    /// Rounds won before round `t`.
    pub fn wins(&self) -> &[u64] {
        &self.wins
    }

    pub fn leader(&self) -> CandidateId {
        argmax(&self.scores)
    }

    /// Elects the representative of round `t`, charges it one unit and adds
    /// the normalized scores `next` of round `t + 1`.
    pub fn advance(&mut self, next: &[T]) -> Result<CandidateId> {
        if next.len() != self.scores.len() {
            return Err(Error::DimensionMismatch {
                expected: self.scores.len(),
                found: next.len(),
            });
        }
        check_distribution(next)?;
        Ok(self.advance_unchecked(next))
    }

    /// [`ModifiedState::advance`] without validating `next`.
    pub(crate) fn advance_unchecked(&mut self, next: &[T]) -> CandidateId {
        let winner = self.leader();
        self.scores[winner.0] = self.scores[winner.0].clone() - T::one();
        for ((s, c), p) in self.scores.iter_mut().zip(&mut self.cumulative).zip(next) {
            *s = s.clone() + p.clone();
            *c = c.clone() + p.clone();
        }
        self.wins[winner.0] += 1;
        self.t += 1;
        if T::EXACT {
            debug_assert!(self.check_identities().is_ok());
        }
        winner
    }

    /// Pure form of [`ModifiedState::advance`].
    pub fn step(&self, next: &[T]) -> Result<(Self, CandidateId)> {
        let mut state = self.clone();
        let winner = state.advance(next)?;
        Ok((state, winner))
    }

    /// Verifies that scores sum to one and equal cumulative shares minus
    /// wins. Only meaningful for exact scalars.
    pub fn check_identities(&self) -> Result<()> {
        let sum = total(&self.scores);
        if !sum.nearly_eq(&T::one()) {
            return Err(Error::Invariant(format!("scores sum to {sum} at round {}", self.t)));
        }
        for (j, ((s, c), w)) in self.scores.iter().zip(&self.cumulative).zip(&self.wins).enumerate() {
            let expected = c.clone() - T::from_u64(*w);
            if !s.nearly_eq(&expected) {
                return Err(Error::Invariant(format!(
                    "score of candidate {} is {s}, expected {expected} at round {}",
                    j + 1,
                    self.t
                )));
            }
        }
        Ok(())
    }
}

/// One row of a modified-method run.
#[derive(Clone, Debug, PartialEq)]
pub struct ModifiedRecord<T> {
    pub t: u64,
    /// Plurality scores of this round.
    pub round: Round,
    /// Normalized scores of this round.
    pub shares: Vec<T>,
    /// Aggregate scores the winner is chosen on.
    pub scores: Vec<T>,
    pub winner: CandidateId,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModifiedTrace<T> {
    pub candidates: Vec<String>,
    pub records: Vec<ModifiedRecord<T>>,
    pub wins: Vec<u64>,
}

impl<T: Scalar> ModifiedTrace<T> {
    pub fn winners(&self) -> Vec<CandidateId> {
        self.records.iter().map(|r| r.winner).collect()
    }

    pub fn audit(&self) -> QuotaReport {
        audit_variable_quota(
            self.candidates.len(),
            self.records.iter().map(|r| (r.shares.clone(), r.winner)),
        )
    }
}

/// Runs the modified method for `horizon` rounds, normalizing each round.
pub fn run_modified<T: Scalar>(profile: &Profile, horizon: u64) -> Result<ModifiedTrace<T>> {
    profile.ensure_horizon(horizon)?;
    let round_at = |t: u64| profile.round(t).expect("horizon checked");
    let mut shares = round_at(1).shares::<T>()?;
    let mut state = ModifiedState::new(shares.clone())?;
    let mut records = Vec::with_capacity(horizon as usize);
    for t in 1..=horizon {
        let next = if t < horizon {
            Some(round_at(t + 1).shares::<T>()?)
        } else {
            None
        };
        let winner = state.leader();
        records.push(ModifiedRecord {
            t,
            round: round_at(t).clone(),
            shares,
            scores: state.scores.clone(),
            winner,
        });
        match next {
            Some(p) => {
                state.advance(&p)?;
                shares = p;
            }
            None => break,
        }
    }
    let mut wins = vec![0; profile.m()];
    for r in &records {
        wins[r.winner.0] += 1;
    }
    Ok(ModifiedTrace {
        candidates: profile.candidates().to_vec(),
        records,
        wins,
    })
}

/// Wins after `rounds` rounds of the modified method on the fixed shares
/// `p`. This is the apportionment form of the method.
pub fn fixed_shares_wins<T: Scalar>(p: &[T], rounds: u64) -> Result<Vec<u64>> {
    if rounds == 0 {
        return Ok(vec![0; p.len()]);
    }
    let mut state = ModifiedState::new(p.to_vec())?;
    if T::EXACT {
        if let Some(wins) = integer_wins(p, rounds) {
            return Ok(wins);
        }
    }
    for _ in 1..rounds {
        state.advance_unchecked(p);
    }
    let last = state.leader();
    let mut wins = state.wins;
    wins[last.0] += 1;
    Ok(wins)
}

/// Same iteration on integers: scores scaled by the common denominator `L`
/// of `p`, so each round adds `L * p_j` and the winner pays `L`. `None` when
/// the scaled scores may not fit in an `i128`.
fn integer_wins<T: Scalar>(p: &[T], rounds: u64) -> Option<Vec<u64>> {
    use num_integer::Integer;
    use num_traits::{One, ToPrimitive};
    let exact: Vec<_> = p.iter().map(Scalar::to_rational).collect();
    let l = exact
        .iter()
        .fold(num_bigint::BigInt::one(), |acc, r| acc.lcm(r.denom()));
    let l = l.to_i128()?;
    // |scores| stay below L * (m + 1), well inside this margin.
    l.checked_mul(4 * (p.len() as i128 + 1))?;
    let step: Vec<i128> = exact
        .iter()
        .map(|r| (r.numer() * (l / r.denom().to_i128().unwrap())).to_i128())
        .collect::<Option<_>>()?;
    let mut scores = step.clone();
    let mut wins = vec![0u64; p.len()];
    for _ in 0..rounds {
        let mut best = 0;
        for (j, s) in scores.iter().enumerate().skip(1) {
            if *s > scores[best] {
                best = j;
            }
        }
        wins[best] += 1;
        scores[best] -= l;
        for (s, d) in scores.iter_mut().zip(&step) {
            *s += d;
        }
    }
    Some(wins)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, Rational};
    use num_bigint::BigInt;
    use num_rational::Ratio;
    use num_traits::One;

    fn ids(s: &str) -> Vec<CandidateId> {
        s.bytes().map(|b| CandidateId((b - b'a') as usize)).collect()
    }

    fn tenths(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| rat(x, 10).unwrap()).collect()
    }

    #[test]
    fn tenths_profile_trace() {
        let trace = run_modified::<Rational>(&Profile::fixed([1, 1, 1, 1, 1, 5]).unwrap(), 10).unwrap();
        let expected = [
            [1, 1, 1, 1, 1, 5],
            [2, 2, 2, 2, 2, 0],
            [-7, 3, 3, 3, 3, 5],
            [-6, 4, 4, 4, 4, 0],
            [-5, -5, 5, 5, 5, 5],
            [-4, -4, -4, 6, 6, 10],
            [-3, -3, -3, 7, 7, 5],
            [-2, -2, -2, -2, 8, 10],
            [-1, -1, -1, -1, 9, 5],
            [0, 0, 0, 0, 0, 10],
        ];
        for (r, s) in trace.records.iter().zip(expected) {
            assert_eq!(r.scores, tenths(&s), "round {}", r.t);
        }
        assert_eq!(trace.winners(), ids("fafbcfdfef"));
        assert_eq!(trace.wins, vec![1, 1, 1, 1, 1, 5]);
        let audit = trace.audit();
        assert!(audit.upper_ok() && audit.lower_ok());
    }

    #[test]
    fn lower_quota_violation_trace() {
        let trace = run_modified::<Rational>(&Profile::fixed([1001, 1000, 206, 182, 181, 180]).unwrap(), 11).unwrap();
        let scaled = [
            [1001, 1000, 206, 182, 181, 180],
            [-748, 2000, 412, 364, 362, 360],
            [253, 250, 618, 546, 543, 540],
            [1254, 1250, -1926, 728, 724, 720],
            [-495, 2250, -1720, 910, 905, 900],
            [506, 500, -1514, 1092, 1086, 1080],
            [1507, 1500, -1308, -1476, 1267, 1260],
            [-242, 2500, -1102, -1294, 1448, 1440],
            [759, 750, -896, -1112, 1629, 1620],
            [1760, 1750, -690, -930, -940, 1800],
            [2761, 2750, -484, -748, -759, -770],
        ];
        for (r, s) in trace.records.iter().zip(scaled) {
            let expected: Vec<Rational> = s.iter().map(|&x| rat(x, 2750).unwrap()).collect();
            assert_eq!(r.scores, expected, "round {}", r.t);
        }
        assert_eq!(trace.winners(), ids("abcabdabefa"));
        assert_eq!(trace.wins[1], 3);

        let audit = trace.audit();
        let row = audit.row(11).unwrap();
        assert_eq!(row.floor[1], BigInt::from(4));
        assert_eq!(row.lower_deficit(1), BigInt::from(1));
        assert!(audit.upper_ok());
        assert_eq!(audit.max_lower_deficit, BigInt::from(1));
        assert!(audit.bound_breaches.is_empty());
    }

    #[test]
    fn step_examples() {
        let p = tenths(&[1, 1, 1, 1, 1, 5]);
        let state = ModifiedState::new(p.clone()).unwrap();
        let (next, winner) = state.step(&p).unwrap();
        assert_eq!(winner, CandidateId(5));
        assert_eq!(next.scores(), tenths(&[2, 2, 2, 2, 2, 0]).as_slice());
        assert_eq!(next.leader(), CandidateId(0));

        let half = vec![rat(1, 2).unwrap(); 2];
        let state = ModifiedState::new(half.clone()).unwrap();
        let (next, winner) = state.step(&half).unwrap();
        assert_eq!(winner, CandidateId(0));
        assert_eq!(next.scores(), &[Rational::from_integer(0.into()), Rational::one()]);
        assert_eq!(next.leader(), CandidateId(1));
    }

    #[test]
    fn lower_quota_example_transition() {
        let p: Vec<Rational> = [1001, 1000, 206, 182, 181, 180]
            .iter()
            .map(|&x| rat(x, 2750).unwrap())
            .collect();
        let (state, _) = ModifiedState::new(p.clone()).unwrap().step(&p).unwrap();
        assert_eq!(state.scores()[1], rat(2000, 2750).unwrap());
        let (state, winner) = state.step(&p).unwrap();
        assert_eq!(winner, CandidateId(1));
        assert_eq!(state.scores()[1], rat(250, 2750).unwrap());
    }

    #[test]
    fn rejects_unnormalized_input() {
        let state = ModifiedState::new(vec![rat(1, 2).unwrap(); 2]).unwrap();
        let bad = vec![rat(1, 2).unwrap(), rat(1, 3).unwrap()];
        assert!(matches!(state.step(&bad), Err(Error::NotNormalized(_))));
        assert!(ModifiedState::new(bad).is_err());
        assert!(matches!(
            state.step(&[Rational::one()]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn harmonic_construction() {
        let m = 4usize;
        let rounds = (1..=m)
            .map(|t| Round::new((1..=m).map(|j| u32::from(j >= t))).unwrap())
            .collect();
        let profile = Profile::varying(rounds).unwrap();
        let trace = run_modified::<Rational>(&profile, 3).unwrap();
        assert_eq!(trace.winners(), vec![CandidateId(0), CandidateId(1), CandidateId(2)]);
        let audit = trace.audit();
        let row = audit.row(3).unwrap();
        assert_eq!(row.wins[3], 0);
        // 1/4 + 1/3 + 1/2 = 13/12
        assert_eq!(row.floor[3], BigInt::from(1));
        assert_eq!(row.ceil[3], BigInt::from(2));
        let cumulative: Rational = trace.records.iter().map(|r| r.shares[3].clone()).sum();
        assert_eq!(cumulative, rat(13, 12).unwrap());
    }

    #[test]
    fn fixed_shares_matches_trace() {
        let profile = Profile::fixed([1001, 1000, 206, 182, 181, 180]).unwrap();
        let p = profile.round(1).unwrap().shares::<Rational>().unwrap();
        for k in 0..=30 {
            let wins = fixed_shares_wins(&p, k).unwrap();
            let expected = if k == 0 {
                vec![0; 6]
            } else {
                run_modified::<Rational>(&profile, k).unwrap().wins
            };
            assert_eq!(wins, expected, "k = {k}");
        }
    }

    #[test]
    fn machine_ratio_and_float_agree() {
        let profile = Profile::fixed([1001, 1000, 206, 182, 181, 180]).unwrap();
        let exact = run_modified::<Rational>(&profile, 11).unwrap().winners();
        let small = run_modified::<Ratio<i64>>(&profile, 11).unwrap().winners();
        assert_eq!(exact, small);
        let float = run_modified::<f64>(&profile, 11).unwrap().winners();
        assert_eq!(exact, float);
    }
}
