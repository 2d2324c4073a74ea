//! Apportionment methods: largest remainder, the four classical divisor
//! methods, the quota method, and the modified method run for `k` rounds.
//!
//! Ties are always broken in favour of the lower party index. Parties with a
//! zero share never receive a seat.

use crate::error::{Error, Result};
use crate::modified::fixed_shares_wins;
use crate::scalar::{check_distribution, Scalar};
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

/// Vote shares summing to one and a house size.
#[derive(Clone, Debug, PartialEq)]
pub struct ApportionmentProblem<T> {
    shares: Vec<T>,
    seats: u64,
}

impl<T: Scalar> ApportionmentProblem<T> {
    pub fn new(shares: Vec<T>, seats: u64) -> Result<Self> {
        if shares.is_empty() {
            return Err(Error::Validation("no parties".into()));
        }
        if seats == 0 {
            return Err(Error::Validation("house size must be positive".into()));
        }
        check_distribution(&shares)?;
        Ok(ApportionmentProblem { shares, seats })
    }

    /// Normalizes integer vote counts.
    pub fn from_votes(votes: &[u64], seats: u64) -> Result<Self> {
        let n: u64 = votes.iter().sum();
        if n == 0 {
            return Err(Error::Validation("no votes".into()));
        }
        let n = BigInt::from(n);
        let shares = votes
            .iter()
            .map(|&v| T::from_ratio(&BigInt::from(v), &n))
            .collect::<Result<_>>()?;
        ApportionmentProblem::new(shares, seats)
    }

    pub fn shares(&self) -> &[T] {
        &self.shares
    }

    pub fn seats(&self) -> u64 {
        self.seats
    }

    pub fn parties(&self) -> usize {
        self.shares.len()
    }

    /// Same shares with a different house size.
    pub fn with_seats(&self, seats: u64) -> Result<Self> {
        ApportionmentProblem::new(self.shares.clone(), seats)
    }

    /// Exact quota `k * p_i`.
    pub fn quota(&self, party: usize) -> T {
        self.shares[party].clone() * T::from_u64(self.seats)
    }
}

/// Seats per party.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ApportionmentSolution(pub Vec<u64>);

impl ApportionmentSolution {
    pub fn seats(&self) -> &[u64] {
        &self.0
    }

    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }
}

impl fmt::Display for ApportionmentSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(")")
    }
}

/// Rounding thresholds `d(a)` of the divisor methods.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DivisorCriterion {
    /// `d(a) = a + 1`
    DHondt,
    /// `d(a) = a`
    Adams,
    /// `d(a) = a + 1/2`
    SainteLague,
    /// `d(a) = sqrt(a (a + 1))`
    HuntingtonHill,
}

impl DivisorCriterion {
    pub const ALL: [DivisorCriterion; 4] = [
        DivisorCriterion::DHondt,
        DivisorCriterion::Adams,
        DivisorCriterion::SainteLague,
        DivisorCriterion::HuntingtonHill,
    ];

    /// Whether `d(a) = 0`, making the next seat's priority infinite.
    pub fn vanishes_at(self, a: u64) -> bool {
        a == 0 && matches!(self, DivisorCriterion::Adams | DivisorCriterion::HuntingtonHill)
    }

    /// A power `e` of the divisor and a positive factor `c` with
    /// `d(a)^e = value / c`. Comparisons of `p / d(a)` are then done on
    /// `p^e * c / value`, all integral and exact.
    fn scaled_power(self, a: u64) -> (u32, u64) {
        match self {
            DivisorCriterion::DHondt => (1, a + 1),
            DivisorCriterion::Adams => (1, a),
            DivisorCriterion::SainteLague => (1, 2 * a + 1),
            DivisorCriterion::HuntingtonHill => (2, a * (a + 1)),
        }
    }

    /// `p^e / d(a)^e` up to a factor common to all parties, or `None` when
    /// `d(a) = 0`.
    pub fn priority<T: Scalar>(self, share: &T, a: u64) -> Option<T> {
        let (exp, d) = self.scaled_power(a);
        if d == 0 {
            return None;
        }
        let base = if exp == 2 {
            share.clone() * share.clone()
        } else {
            share.clone()
        };
        Some(base / T::from_u64(d))
    }

    /// Compares the priority of party `(p_i, a_i)` with `(p_j, a_j)` for the
    /// next seat. Both shares must be positive.
    pub fn compare<T: Scalar>(self, p_i: &T, a_i: u64, p_j: &T, a_j: u64) -> Ordering {
        match (self.vanishes_at(a_i), self.vanishes_at(a_j)) {
            (true, true) => return p_i.partial_cmp(p_j).unwrap_or(Ordering::Equal),
            (true, false) => return Ordering::Greater,
            (false, true) => return Ordering::Less,
            (false, false) => {}
        }
        let (exp, d_i) = self.scaled_power(a_i);
        let (_, d_j) = self.scaled_power(a_j);
        if exp == 2 {
            p_i.cmp_square_scaled(d_j, p_j, d_i)
        } else {
            p_i.cmp_scaled(d_j, p_j, d_i)
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DivisorCriterion::DHondt => "dhondt",
            DivisorCriterion::Adams => "adams",
            DivisorCriterion::SainteLague => "sainte-lague",
            DivisorCriterion::HuntingtonHill => "huntington-hill",
        }
    }
}

/// The seven apportionment methods.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Method {
    LargestRemainder,
    Divisor(DivisorCriterion),
    Quota,
    Frege,
}

impl Method {
    /// All methods in the customary table order.
    pub const ALL: [Method; 7] = [
        Method::LargestRemainder,
        Method::Divisor(DivisorCriterion::DHondt),
        Method::Divisor(DivisorCriterion::Adams),
        Method::Divisor(DivisorCriterion::SainteLague),
        Method::Divisor(DivisorCriterion::HuntingtonHill),
        Method::Quota,
        Method::Frege,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::LargestRemainder => "largest-remainder",
            Method::Divisor(c) => c.name(),
            Method::Quota => "quota",
            Method::Frege => "frege",
        }
    }

    /// Human-readable name as used in tables.
    pub fn title(self) -> &'static str {
        match self {
            Method::LargestRemainder => "Largest Remainder",
            Method::Divisor(DivisorCriterion::DHondt) => "D'Hondt (Jefferson)",
            Method::Divisor(DivisorCriterion::Adams) => "Adams",
            Method::Divisor(DivisorCriterion::SainteLague) => "Sainte-Laguë (Webster)",
            Method::Divisor(DivisorCriterion::HuntingtonHill) => "Huntington-Hill",
            Method::Quota => "Quota method",
            Method::Frege => "Frege's apportionment method",
        }
    }

    pub fn apportion<T: Scalar>(self, problem: &ApportionmentProblem<T>) -> ApportionmentSolution {
        match self {
            Method::LargestRemainder => largest_remainder(problem),
            Method::Divisor(c) => divisor_method(c, problem),
            Method::Quota => quota_method(problem),
            Method::Frege => frege_apportionment(problem),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown method {s:?}")))
    }
}

impl From<Method> for String {
    fn from(m: Method) -> String {
        m.name().to_string()
    }
}

impl TryFrom<String> for Method {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

fn to_u64(x: &BigInt) -> u64 {
    x.to_u64().expect("seat count fits in u64")
}

/// Hamilton's method: floors of the quotas, then one extra seat each for
/// the largest remainders.
pub fn largest_remainder<T: Scalar>(problem: &ApportionmentProblem<T>) -> ApportionmentSolution {
    let m = problem.parties();
    let quotas: Vec<T> = (0..m).map(|i| problem.quota(i)).collect();
    let mut seats: Vec<u64> = quotas.iter().map(|q| to_u64(&q.floor_int())).collect();
    let remainders: Vec<T> = quotas
        .iter()
        .zip(&seats)
        .map(|(q, &a)| q.clone() - T::from_u64(a))
        .collect();
    let assigned: u64 = seats.iter().sum();
    let left = problem.seats().saturating_sub(assigned) as usize;
    let mut order: Vec<usize> = (0..m).filter(|&i| !problem.shares[i].is_zero()).collect();
    // Stable sort keeps index order among equal remainders.
    order.sort_by(|&i, &j| remainders[j].partial_cmp(&remainders[i]).unwrap_or(Ordering::Equal));
    for &i in order.iter().take(left) {
        seats[i] += 1;
    }
    ApportionmentSolution(seats)
}

/// Highest-averages iteration: each seat goes to the party with the largest
/// `p_i / d(a_i)`.
pub fn divisor_method<T: Scalar>(
    criterion: DivisorCriterion,
    problem: &ApportionmentProblem<T>,
) -> ApportionmentSolution {
    let shares = problem.shares();
    let eligible: Vec<usize> = (0..shares.len()).filter(|&i| !shares[i].is_zero()).collect();
    let mut seats = vec![0u64; shares.len()];
    for _ in 0..problem.seats() {
        let mut best = eligible[0];
        for &i in &eligible[1..] {
            if criterion.compare(&shares[i], seats[i], &shares[best], seats[best]) == Ordering::Greater {
                best = i;
            }
        }
        seats[best] += 1;
    }
    ApportionmentSolution(seats)
}

/// Balinski and Young's quota method: seat `l` goes to the party with the
/// largest `p_i / (a_i + 1)` among those with `a_i < p_i * l`.
pub fn quota_method<T: Scalar>(problem: &ApportionmentProblem<T>) -> ApportionmentSolution {
    let shares = problem.shares();
    let mut seats = vec![0u64; shares.len()];
    for l in 1..=problem.seats() {
        let mut best: Option<usize> = None;
        for (i, p) in shares.iter().enumerate() {
            if p.is_zero() || p.cmp_scaled_int(l, seats[i]) != Ordering::Greater {
                continue;
            }
            let better = match best {
                None => true,
                Some(b) => DivisorCriterion::DHondt.compare(p, seats[i], &shares[b], seats[b]) == Ordering::Greater,
            };
            if better {
                best = Some(i);
            }
        }
        // Some party is always below its quota: sum a_i = l - 1 < l = sum p_i l.
        let best = best.expect("a party below upper quota exists");
        seats[best] += 1;
    }
    ApportionmentSolution(seats)
}

/// The modified method on the fixed shares, run for `k` rounds.
pub fn frege_apportionment<T: Scalar>(problem: &ApportionmentProblem<T>) -> ApportionmentSolution {
    if problem.parties() == 1 {
        return ApportionmentSolution(vec![problem.seats()]);
    }
    let wins = fixed_shares_wins(problem.shares(), problem.seats()).expect("problem shares already validated");
    ApportionmentSolution(wins)
}

/// Solutions of all seven methods, in [`Method::ALL`] order.
pub fn compare_all<T: Scalar>(problem: &ApportionmentProblem<T>) -> Vec<(Method, ApportionmentSolution)> {
    Method::ALL.into_iter().map(|m| (m, m.apportion(problem))).collect()
}

/// Whether `solution` is `d`-admissible: some `x > 0` puts every `a_i` in
/// the `d`-rounding of `p_i / x`, i.e. `d(a_i - 1) <= p_i / x <= d(a_i)`.
///
/// Independent of [`divisor_method`]: it intersects the intervals of
/// feasible `x` instead of iterating. For Huntington-Hill the bounds are
/// compared squared.
pub fn is_divisor_admissible<T: Scalar>(
    criterion: DivisorCriterion,
    problem: &ApportionmentProblem<T>,
    solution: &ApportionmentSolution,
) -> bool {
    if solution.seats().len() != problem.parties() || solution.total() != problem.seats() {
        return false;
    }
    // x >= p_i / d(a_i) (lower) and x <= p_i / d(a_i - 1) (upper).
    let mut lower: Option<T> = None;
    let mut upper: Option<T> = None;
    for (p, &a) in problem.shares().iter().zip(solution.seats()) {
        if p.is_zero() {
            // 0 / x = 0 must lie in [d(a - 1), d(a)].
            if a > 0 && !criterion.vanishes_at(a - 1) {
                return false;
            }
            continue;
        }
        match criterion.priority(p, a) {
            None => return false,
            Some(v) => {
                if lower.as_ref().is_none_or(|l| v > *l) {
                    lower = Some(v);
                }
            }
        }
        if a > 0 {
            if let Some(v) = criterion.priority(p, a - 1) {
                if upper.as_ref().is_none_or(|u| v < *u) {
                    upper = Some(v);
                }
            }
        }
    }
    match (lower, upper) {
        (Some(l), Some(u)) => l <= u,
        _ => true,
    }
}
