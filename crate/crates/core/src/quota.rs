//! Variable upper and lower quota audits of a winner sequence.
//!
//! After `t` rounds candidate `j` should have won between
//! `floor(sum_{s<=t} p_j^s)` and `ceil(sum_{s<=t} p_j^s)` times.

use crate::profile::CandidateId;
use crate::scalar::Scalar;
use num_bigint::BigInt;
use num_traits::Zero;

/// Quotas and wins of every candidate after one round.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuotaRow {
    pub t: u64,
    pub floor: Vec<BigInt>,
    pub ceil: Vec<BigInt>,
    pub wins: Vec<u64>,
}

impl QuotaRow {
    /// `wins - ceil`; positive values break upper quota.
    pub fn upper_slack(&self, j: usize) -> BigInt {
        BigInt::from(self.wins[j]) - &self.ceil[j]
    }

    /// `floor - wins`; positive values break lower quota.
    pub fn lower_deficit(&self, j: usize) -> BigInt {
        &self.floor[j] - BigInt::from(self.wins[j])
    }
}

/// A single quota breach.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuotaViolation {
    pub t: u64,
    pub candidate: CandidateId,
    /// How far the wins are outside the quota.
    pub amount: BigInt,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuotaReport {
    pub m: usize,
    pub rows: Vec<QuotaRow>,
    pub upper_violations: Vec<QuotaViolation>,
    pub lower_violations: Vec<QuotaViolation>,
    /// Largest lower deficit seen (0 if lower quota always holds).
    pub max_lower_deficit: BigInt,
    /// Lower deficits above [`lower_deficit_bound`], which the modified
    /// method can never produce.
    pub bound_breaches: Vec<QuotaViolation>,
}

impl QuotaReport {
    pub fn upper_ok(&self) -> bool {
        self.upper_violations.is_empty()
    }

    pub fn lower_ok(&self) -> bool {
        self.lower_violations.is_empty()
    }

    pub fn row(&self, t: u64) -> Option<&QuotaRow> {
        self.rows.get(t.checked_sub(1)? as usize)
    }
}

/// Largest lower-quota deficit the modified method can reach with `m`
/// candidates: `ceil((m - 3) / 2)`, and 0 for `m <= 3`.
pub fn lower_deficit_bound(m: usize) -> u64 {
    (m.saturating_sub(3) as u64).div_ceil(2)
}

/// Audits a sequence of `(shares, winner)` rounds.
pub fn audit_variable_quota<T, I>(m: usize, rounds: I) -> QuotaReport
where
    T: Scalar,
    I: IntoIterator<Item = (Vec<T>, CandidateId)>,
{
    let bound = BigInt::from(lower_deficit_bound(m));
    let mut cumulative = vec![T::zero(); m];
    let mut wins = vec![0u64; m];
    let mut report = QuotaReport {
        m,
        rows: Vec::new(),
        upper_violations: Vec::new(),
        lower_violations: Vec::new(),
        max_lower_deficit: BigInt::zero(),
        bound_breaches: Vec::new(),
    };
    for (idx, (shares, winner)) in rounds.into_iter().enumerate() {
        let t = idx as u64 + 1;
        for (c, p) in cumulative.iter_mut().zip(shares) {
            *c = c.clone() + p;
        }
        wins[winner.0] += 1;
        let row = QuotaRow {
            t,
            floor: cumulative.iter().map(Scalar::floor_int).collect(),
            ceil: cumulative.iter().map(Scalar::ceil_int).collect(),
            wins: wins.clone(),
        };
        for j in 0..m {
            let slack = row.upper_slack(j);
            if slack > BigInt::zero() {
                report.upper_violations.push(QuotaViolation {
                    t,
                    candidate: CandidateId(j),
                    amount: slack,
                });
            }
            let deficit = row.lower_deficit(j);
            if deficit > BigInt::zero() {
                if deficit > report.max_lower_deficit {
                    report.max_lower_deficit = deficit.clone();
                }
                let v = QuotaViolation {
                    t,
                    candidate: CandidateId(j),
                    amount: deficit.clone(),
                };
                if deficit > bound {
                    report.bound_breaches.push(v.clone());
                }
                report.lower_violations.push(v);
            }
        }
        report.rows.push(row);
    }
    report
}
