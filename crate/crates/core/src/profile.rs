//! Candidates, per-round plurality scores and electorate profiles.

use crate::error::{Error, Result};
use crate::scalar::{Rational, Scalar};
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Position of a candidate. Index order is also the tie-breaking order: on
/// equal scores the lower index wins.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CandidateId(pub usize);

impl CandidateId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for CandidateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", default_label(self.0))
    }
}

/// Label used when a profile does not name its candidates: `a`..`z`, then
/// `c27`, `c28`, ...
pub fn default_label(index: usize) -> String {
    if index < 26 {
        char::from(b'a' + index as u8).to_string()
    } else {
        format!("c{}", index + 1)
    }
}

/// Default labels for `m` candidates.
pub fn default_labels(m: usize) -> Vec<String> {
    (0..m).map(default_label).collect()
}

/// Returns the first index holding a maximal value.
pub(crate) fn argmax<T: PartialOrd>(values: &[T]) -> CandidateId {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    CandidateId(best)
}

/// Plurality scores of one election round.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Round {
    scores: Vec<BigInt>,
    voters: BigInt,
}

impl Round {
    /// Validates and wraps a score vector. Scores must be non-negative and at
    /// least one voter must take part.
    pub fn new<I: Into<BigInt>>(scores: impl IntoIterator<Item = I>) -> Result<Self> {
        let scores: Vec<BigInt> = scores.into_iter().map(Into::into).collect();
        if scores.is_empty() {
            return Err(Error::Validation("empty round".into()));
        }
        if let Some((j, s)) = scores.iter().enumerate().find(|(_, s)| s.is_negative()) {
            return Err(Error::Validation(format!("negative score {s} for candidate {}", j + 1)));
        }
        let voters: BigInt = scores.iter().sum();
        if voters.is_zero() {
            return Err(Error::Validation("round without voters".into()));
        }
        Ok(Round { scores, voters })
    }

    pub fn scores(&self) -> &[BigInt] {
        &self.scores
    }

    /// Number of participating voters, the sum of all scores.
    pub fn voters(&self) -> &BigInt {
        &self.voters
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// Normalized scores `score / voters` in the requested scalar type.
    pub fn shares<T: Scalar>(&self) -> Result<Vec<T>> {
        self.scores.iter().map(|s| T::from_ratio(s, &self.voters)).collect()
    }

    /// Multiplies every score by `k`.
    pub fn scaled(&self, k: &BigInt) -> Result<Round> {
        Round::new(self.scores.iter().map(|s| s * k))
    }
}

/// Exact normalized scores of a round. They sum to exactly one.
pub fn normalize(round: &Round) -> Vec<Rational> {
    round
        .scores
        .iter()
        .map(|s| Rational::new(s.clone(), round.voters.clone()))
        .collect()
}

/// Sequence of rounds: a single round repeated forever, or an explicit
/// finite list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rounds {
    /// Fixed electorate, represented once.
    Fixed(Round),
    Varying(Vec<Round>),
}

/// Candidates together with the plurality scores of every round.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Profile {
    candidates: Vec<String>,
    rounds: Rounds,
}

#[allow(clippy::len_without_is_empty)]
impl Profile {
    /// Fixed electorate with default candidate labels.
    pub fn fixed<I: Into<BigInt>>(scores: impl IntoIterator<Item = I>) -> Result<Self> {
        let round = Round::new(scores)?;
        Profile::new(default_labels(round.len()), Rounds::Fixed(round))
    }

    /// Varying electorate with default candidate labels.
    pub fn varying(rounds: Vec<Round>) -> Result<Self> {
        let m = rounds
            .first()
            .ok_or_else(|| Error::Validation("profile without rounds".into()))?
            .len();
        Profile::new(default_labels(m), Rounds::Varying(rounds))
    }

    pub fn new(candidates: Vec<String>, rounds: Rounds) -> Result<Self> {
        let m = candidates.len();
        if m < 2 {
            return Err(Error::Validation(format!(
                "at least two candidates required, found {m}"
            )));
        }
        let check = |r: &Round| {
            if r.len() != m {
                Err(Error::DimensionMismatch {
                    expected: m,
                    found: r.len(),
                })
            } else {
                Ok(())
            }
        };
        match &rounds {
            Rounds::Fixed(r) => check(r)?,
            Rounds::Varying(rs) => {
                if rs.is_empty() {
                    return Err(Error::Validation("profile without rounds".into()));
                }
                rs.iter().try_for_each(check)?
            }
        }
        Ok(Profile { candidates, rounds })
    }

    pub fn candidates(&self) -> &[String] {
        &self.candidates
    }

    /// Number of candidates.
    pub fn m(&self) -> usize {
        self.candidates.len()
    }

    pub fn rounds(&self) -> &Rounds {
        &self.rounds
    }

    pub fn is_fixed(&self) -> bool {
        matches!(self.rounds, Rounds::Fixed(_))
    }

    /// Number of explicit rounds, or `None` for a fixed electorate.
    pub fn len(&self) -> Option<u64> {
        match &self.rounds {
            Rounds::Fixed(_) => None,
            Rounds::Varying(rs) => Some(rs.len() as u64),
        }
    }

    /// Round `t`, counted from 1.
    pub fn round(&self, t: u64) -> Option<&Round> {
        if t == 0 {
            return None;
        }
        match &self.rounds {
            Rounds::Fixed(r) => Some(r),
            Rounds::Varying(rs) => rs.get((t - 1) as usize),
        }
    }

    /// Errors unless the profile provides at least `horizon` rounds.
    pub fn ensure_horizon(&self, horizon: u64) -> Result<()> {
        if horizon == 0 {
            return Err(Error::Validation("horizon must be at least 1".into()));
        }
        match self.len() {
            Some(available) if available < horizon => Err(Error::ProfileTooShort {
                needed: horizon,
                available,
            }),
            _ => Ok(()),
        }
    }

    /// Iterator over rounds `1..=horizon`.
    pub fn iter(&self, horizon: u64) -> impl Iterator<Item = &Round> + '_ {
        (1..=horizon).map_while(move |t| self.round(t))
    }

    /// Voter count when it is the same in every round.
    pub fn constant_voters(&self) -> Option<&BigInt> {
        match &self.rounds {
            Rounds::Fixed(r) => Some(r.voters()),
            Rounds::Varying(rs) => {
                let n = rs[0].voters();
                rs.iter().all(|r| r.voters() == n).then_some(n)
            }
        }
    }

    /// Every round multiplied by `k`.
    pub fn scaled(&self, k: &BigInt) -> Result<Profile> {
        let rounds = match &self.rounds {
            Rounds::Fixed(r) => Rounds::Fixed(r.scaled(k)?),
            Rounds::Varying(rs) => Rounds::Varying(rs.iter().map(|r| r.scaled(k)).collect::<Result<_>>()?),
        };
        Profile::new(self.candidates.clone(), rounds)
    }

    /// Name of candidate `id`.
    pub fn label(&self, id: CandidateId) -> &str {
        &self.candidates[id.0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;
    use num_traits::One;
    use proptest::prelude::*;

    #[test]
    fn normalize_five_three_two() {
        let r = Round::new([5, 3, 2]).unwrap();
        assert_eq!(
            normalize(&r),
            vec![rat(1, 2).unwrap(), rat(3, 10).unwrap(), rat(1, 5).unwrap()]
        );
        let r = Round::new([1, 1]).unwrap();
        assert_eq!(normalize(&r), vec![rat(1, 2).unwrap(); 2]);
        let scores = [1001, 1000, 206, 182, 181, 180];
        let r = Round::new(scores).unwrap();
        assert_eq!(r.voters(), &BigInt::from(2750));
        for (p, s) in normalize(&r).iter().zip(scores) {
            assert_eq!(p, &rat(s, 2750).unwrap());
        }
    }

    #[test]
    fn round_validation() {
        assert!(Round::new(Vec::<i64>::new()).is_err());
        assert!(Round::new([0, 0]).is_err());
        let err = Round::new([5, -1]).unwrap_err();
        assert!(err.to_string().contains("candidate 2"), "{err}");
    }

    #[test]
    fn profile_dimensions() {
        let rounds = vec![Round::new([1, 1]).unwrap(), Round::new([1, 1, 1]).unwrap()];
        assert!(matches!(
            Profile::varying(rounds),
            Err(Error::DimensionMismatch { expected: 2, found: 3 })
        ));
        assert!(Profile::fixed([4]).is_err());
    }

    #[test]
    fn fixed_profile_repeats() {
        let p = Profile::fixed([5, 3, 2]).unwrap();
        assert_eq!(p.round(1_000_000), p.round(1));
        assert!(p.round(0).is_none());
        assert_eq!(p.iter(7).count(), 7);
        assert!(p.ensure_horizon(u64::MAX).is_ok());
        assert_eq!(p.constant_voters(), Some(&BigInt::from(10)));
    }

    #[test]
    fn varying_profile_bounds() {
        let p = Profile::varying(vec![Round::new([1, 1]).unwrap(), Round::new([2, 1]).unwrap()]).unwrap();
        assert_eq!(p.len(), Some(2));
        assert!(p.round(3).is_none());
        assert_eq!(
            p.ensure_horizon(3),
            Err(Error::ProfileTooShort {
                needed: 3,
                available: 2
            })
        );
        assert_eq!(p.constant_voters(), None);
    }

    #[test]
    fn labels() {
        assert_eq!(CandidateId(0).to_string(), "a");
        assert_eq!(CandidateId(5).to_string(), "f");
        assert_eq!(default_label(26), "c27");
    }

    #[test]
    fn argmax_breaks_ties_by_index() {
        assert_eq!(argmax(&[1, 3, 3, 2]), CandidateId(1));
        assert_eq!(argmax(&[8, 8, 8]), CandidateId(0));
    }

    proptest! {
        #[test]
        fn normalized_scores_sum_to_one(scores in proptest::collection::vec(0u32..1000, 2..10)) {
            prop_assume!(scores.iter().any(|&s| s > 0));
            let r = Round::new(scores).unwrap();
            let p = normalize(&r);
            prop_assert!(p.iter().all(|x| !x.is_negative()));
            prop_assert!(p.iter().sum::<Rational>().is_one());
        }
    }
}
