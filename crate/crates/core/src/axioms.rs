//! Quota and monotonicity axioms for apportionment methods, replayable
//! counterexamples, and regeneration of the method-by-axiom table.
//!
//! A monotonicity axiom quantifies over all problems, so a verdict of
//! [`Verdict::HoldsOnTested`] only means no counterexample was found among
//! the instances examined. [`Verdict::Violated`] always comes with a
//! [`Witness`] that [`Witness::replay`] reproduces exactly.

use crate::apportionment::{ApportionmentProblem, ApportionmentSolution, Method};
use crate::error::{Error, Result};
use crate::quota::lower_deficit_bound;
use crate::scalar::{exact_serde, Rational, Scalar};
use crate::SmallRational;
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::{self, Write as _};
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Axiom {
    HouseMonotonicity,
    PopulationMonotonicity,
    LowerQuota,
    UpperQuota,
    /// Lower and upper quota on problems with three parties.
    QuotaForThree,
}

impl Axiom {
    pub const ALL: [Axiom; 5] = [
        Axiom::HouseMonotonicity,
        Axiom::PopulationMonotonicity,
        Axiom::LowerQuota,
        Axiom::UpperQuota,
        Axiom::QuotaForThree,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Axiom::HouseMonotonicity => "house-monotonicity",
            Axiom::PopulationMonotonicity => "population-monotonicity",
            Axiom::LowerQuota => "lower-quota",
            Axiom::UpperQuota => "upper-quota",
            Axiom::QuotaForThree => "quota-m3",
        }
    }

    /// Short column heading.
    pub fn title(self) -> &'static str {
        match self {
            Axiom::HouseMonotonicity => "house monot.",
            Axiom::PopulationMonotonicity => "popul. monot.",
            Axiom::LowerQuota => "lower quota",
            Axiom::UpperQuota => "upper quota",
            Axiom::QuotaForThree => "quota m=3",
        }
    }

    fn index(self) -> usize {
        Axiom::ALL.iter().position(|&a| a == self).unwrap()
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Axiom {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Axiom::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown axiom {s:?}")))
    }
}

/// Whether the published table marks `method` as satisfying `axiom`.
pub fn published_verdict(method: Method, axiom: Axiom) -> bool {
    use crate::apportionment::DivisorCriterion::*;
    use Axiom::*;
    match method {
        Method::LargestRemainder => !matches!(axiom, HouseMonotonicity | PopulationMonotonicity),
        Method::Divisor(DHondt) => !matches!(axiom, UpperQuota | QuotaForThree),
        Method::Divisor(Adams) => !matches!(axiom, LowerQuota | QuotaForThree),
        Method::Divisor(SainteLague) => !matches!(axiom, LowerQuota | UpperQuota),
        Method::Divisor(HuntingtonHill) => {
            matches!(axiom, HouseMonotonicity | PopulationMonotonicity)
        }
        Method::Quota => axiom != PopulationMonotonicity,
        Method::Frege => !matches!(axiom, PopulationMonotonicity | LowerQuota),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    HoldsOnTested,
    Violated,
}

impl Verdict {
    /// `+` or `-`.
    pub fn symbol(self) -> char {
        match self {
            Verdict::HoldsOnTested => '+',
            Verdict::Violated => '-',
        }
    }
}

/// An apportionment problem with exact shares, as stored in witnesses.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    #[serde(with = "exact_serde::fractions")]
    pub shares: Vec<Rational>,
    pub seats: u64,
}

impl Instance {
    pub fn from_problem<T: Scalar>(problem: &ApportionmentProblem<T>) -> Self {
        Instance {
            shares: problem.shares().iter().map(Scalar::to_rational).collect(),
            seats: problem.seats(),
        }
    }

    pub fn from_votes(votes: &[u64], seats: u64) -> Result<Self> {
        Ok(Instance::from_problem(&ApportionmentProblem::<Rational>::from_votes(
            votes, seats,
        )?))
    }

    pub fn problem(&self) -> Result<ApportionmentProblem<Rational>> {
        ApportionmentProblem::new(self.shares.clone(), self.seats)
    }
}

/// A concrete counterexample together with the violated inequality.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Witness {
    /// `a_i < floor(k p_i)` (lower) or `a_i > ceil(k p_i)` (upper).
    Quota {
        instance: Instance,
        solution: ApportionmentSolution,
        party: usize,
        lower: bool,
        #[serde(with = "exact_serde::fraction")]
        quota: Rational,
        #[serde(with = "exact_serde::integer")]
        bound: BigInt,
    },
    /// Solutions for `k` and `k + 1` seats that do not differ by one seat
    /// for a single party.
    House {
        instance: Instance,
        before: ApportionmentSolution,
        after: ApportionmentSolution,
    },
    /// `p'_i / p'_j >= p_i / p_j` while `a'_i < a_i` and `a'_j > a_j`.
    Population {
        before: Instance,
        after: Instance,
        solution_before: ApportionmentSolution,
        solution_after: ApportionmentSolution,
        i: usize,
        j: usize,
        #[serde(with = "exact_serde::fraction")]
        ratio_before: Rational,
        #[serde(with = "exact_serde::fraction")]
        ratio_after: Rational,
    },
}

impl Witness {
    /// Recomputes the witness from its instances with `method`. Fails with
    /// an invariant error if the violation does not reappear.
    pub fn replay(&self, method: Method) -> Result<Witness> {
        let lost = || Error::Invariant(format!("witness does not replay under {method}"));
        match self {
            Witness::Quota { instance, lower, .. } => {
                let problem = instance.problem()?;
                let solution = method.apportion(&problem);
                quota_witness(&problem, &solution, *lower).ok_or_else(lost)
            }
            Witness::House { instance, .. } => {
                let problem = instance.problem()?;
                let before = method.apportion(&problem);
                let after = method.apportion(&problem.with_seats(instance.seats + 1)?);
                if is_unit_step(&before, &after) {
                    Err(lost())
                } else {
                    Ok(Witness::House {
                        instance: instance.clone(),
                        before,
                        after,
                    })
                }
            }
            Witness::Population { before, after, .. } => {
                let report = check_population_paradox(method, &before.problem()?, &after.problem()?)?;
                report.witness.ok_or_else(lost)
            }
        }
    }

    /// The violated inequality with exact values.
    pub fn describe(&self) -> String {
        match self {
            Witness::Quota {
                instance,
                solution,
                party,
                lower,
                quota,
                bound,
            } => {
                let (op, f) = if *lower { ("<", "floor") } else { (">", "ceil") };
                format!(
                    "p = {}, k = {}: a_{} = {} {op} {f}({quota}) = {bound}",
                    fraction_list(&instance.shares),
                    instance.seats,
                    party + 1,
                    solution.seats()[*party],
                )
            }
            Witness::House {
                instance,
                before,
                after,
            } => format!(
                "p = {}: k = {} gives {before}, k = {} gives {after}",
                fraction_list(&instance.shares),
                instance.seats,
                instance.seats + 1
            ),
            Witness::Population {
                before,
                after,
                solution_before,
                solution_after,
                i,
                j,
                ratio_before,
                ratio_after,
            } => format!(
                "p = {}, p' = {}, k = {}: p'_{i1}/p'_{j1} = {ratio_after} >= {ratio_before} = p_{i1}/p_{j1} \
                 but a'_{i1} = {} < {} = a_{i1} and a'_{j1} = {} > {} = a_{j1}",
                fraction_list(&before.shares),
                fraction_list(&after.shares),
                before.seats,
                solution_after.seats()[*i],
                solution_before.seats()[*i],
                solution_after.seats()[*j],
                solution_before.seats()[*j],
                i1 = i + 1,
                j1 = j + 1,
            ),
        }
    }
}

fn fraction_list(xs: &[Rational]) -> String {
    let parts: Vec<String> = xs.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(", "))
}

/// Outcome of checking one axiom for one method.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub axiom: Axiom,
    pub method: Method,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    /// Ordered pairs `(i, j)` left out of a population check because
    /// `p_j` or `p'_j` is zero.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub skipped_pairs: Vec<(usize, usize)>,
}

impl AxiomReport {
    fn new(axiom: Axiom, method: Method, witness: Option<Witness>) -> Self {
        AxiomReport {
            axiom,
            method,
            verdict: if witness.is_some() {
                Verdict::Violated
            } else {
                Verdict::HoldsOnTested
            },
            witness,
            skipped_pairs: Vec::new(),
        }
    }
}

/// Per-party quota slacks of a solution.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuotaCheck {
    pub upper_ok: bool,
    pub lower_ok: bool,
    /// `ceil(k p_i) - a_i`; negative entries break upper quota.
    #[serde(with = "exact_serde::integers")]
    pub upper_slack: Vec<BigInt>,
    /// `a_i - floor(k p_i)`; negative entries break lower quota.
    #[serde(with = "exact_serde::integers")]
    pub lower_slack: Vec<BigInt>,
}

pub fn check_quota<T: Scalar>(
    solution: &ApportionmentSolution,
    problem: &ApportionmentProblem<T>,
) -> Result<QuotaCheck> {
    if solution.seats().len() != problem.parties() {
        return Err(Error::DimensionMismatch {
            expected: problem.parties(),
            found: solution.seats().len(),
        });
    }
    let mut upper_slack = Vec::with_capacity(problem.parties());
    let mut lower_slack = Vec::with_capacity(problem.parties());
    for (i, &a) in solution.seats().iter().enumerate() {
        let q = problem.quota(i);
        let a = BigInt::from(a);
        upper_slack.push(q.ceil_int() - &a);
        lower_slack.push(a - q.floor_int());
    }
    Ok(QuotaCheck {
        upper_ok: upper_slack.iter().all(|s| !s.is_negative()),
        lower_ok: lower_slack.iter().all(|s| !s.is_negative()),
        upper_slack,
        lower_slack,
    })
}

/// The first party breaking lower (or upper) quota, as a witness.
fn quota_witness<T: Scalar>(
    problem: &ApportionmentProblem<T>,
    solution: &ApportionmentSolution,
    lower: bool,
) -> Option<Witness> {
    let check = check_quota(solution, problem).ok()?;
    let slack = if lower { &check.lower_slack } else { &check.upper_slack };
    let party = slack.iter().position(|s| s.is_negative())?;
    let quota = problem.quota(party).to_rational();
    let bound = if lower { quota.floor_int() } else { quota.ceil_int() };
    Some(Witness::Quota {
        instance: Instance::from_problem(problem),
        solution: solution.clone(),
        party,
        lower,
        quota,
        bound,
    })
}

/// Lower, upper, or (for three parties) combined quota of `method` on one
/// problem. `QuotaForThree` on a problem with another number of parties
/// holds vacuously.
pub fn check_quota_axiom<T: Scalar>(
    method: Method,
    axiom: Axiom,
    problem: &ApportionmentProblem<T>,
) -> Result<AxiomReport> {
    let solution = method.apportion(problem);
    let witness = match axiom {
        Axiom::LowerQuota => quota_witness(problem, &solution, true),
        Axiom::UpperQuota => quota_witness(problem, &solution, false),
        Axiom::QuotaForThree if problem.parties() == 3 => {
            quota_witness(problem, &solution, true).or_else(|| quota_witness(problem, &solution, false))
        }
        Axiom::QuotaForThree => None,
        _ => {
            return Err(Error::Validation(format!("{axiom} is not a quota axiom")));
        }
    };
    Ok(AxiomReport::new(axiom, method, witness))
}

fn is_unit_step(before: &ApportionmentSolution, after: &ApportionmentSolution) -> bool {
    let mut grown = 0;
    for (&a, &b) in before.seats().iter().zip(after.seats()) {
        if b == a + 1 {
            grown += 1;
        } else if b != a {
            return false;
        }
    }
    grown == 1
}

/// Solutions of `method` for `k = 1..=k_max` on the shares of `problem`.
fn solutions_up_to<T: Scalar>(
    method: Method,
    problem: &ApportionmentProblem<T>,
    k_max: u64,
) -> Result<Vec<ApportionmentSolution>> {
    (1..=k_max)
        .map(|k| Ok(method.apportion(&problem.with_seats(k)?)))
        .collect()
}

fn house_witness<T: Scalar>(
    problem: &ApportionmentProblem<T>,
    solutions: &[ApportionmentSolution],
) -> Result<Option<Witness>> {
    for (idx, pair) in solutions.windows(2).enumerate() {
        if !is_unit_step(&pair[0], &pair[1]) {
            return Ok(Some(Witness::House {
                instance: Instance::from_problem(&problem.with_seats(idx as u64 + 1)?),
                before: pair[0].clone(),
                after: pair[1].clone(),
            }));
        }
    }
    Ok(None)
}

/// Compares the solutions for every house size `1..=k_max` on the shares of
/// `problem` (its own house size is ignored) and reports the first step
/// that is not a single added seat.
pub fn check_house_monotonicity<T: Scalar>(
    method: Method,
    problem: &ApportionmentProblem<T>,
    k_max: u64,
) -> Result<AxiomReport> {
    if k_max < 2 {
        return Err(Error::Validation("k_max must be at least 2".into()));
    }
    let solutions = solutions_up_to(method, problem, k_max)?;
    let witness = house_witness(problem, &solutions)?;
    Ok(AxiomReport::new(Axiom::HouseMonotonicity, method, witness))
}

/// Scans all ordered pairs `(i, j)` for a population paradox between
/// `before` and `after`, which must have the same parties and house size.
pub fn check_population_paradox<T: Scalar>(
    method: Method,
    before: &ApportionmentProblem<T>,
    after: &ApportionmentProblem<T>,
) -> Result<AxiomReport> {
    if before.parties() != after.parties() {
        return Err(Error::DimensionMismatch {
            expected: before.parties(),
            found: after.parties(),
        });
    }
    if before.seats() != after.seats() {
        return Err(Error::Validation(format!(
            "house sizes differ: {} and {}",
            before.seats(),
            after.seats()
        )));
    }
    let a = method.apportion(before);
    let b = method.apportion(after);
    paradox_report(method, before, after, a, b)
}

fn paradox_report<T: Scalar>(
    method: Method,
    before: &ApportionmentProblem<T>,
    after: &ApportionmentProblem<T>,
    a: ApportionmentSolution,
    b: ApportionmentSolution,
) -> Result<AxiomReport> {
    let p: Vec<Rational> = before.shares().iter().map(Scalar::to_rational).collect();
    let q: Vec<Rational> = after.shares().iter().map(Scalar::to_rational).collect();
    let m = p.len();
    let mut skipped = Vec::new();
    let mut witness = None;
    for j in 0..m {
        if p[j].is_zero() || q[j].is_zero() {
            skipped.extend((0..m).filter(|&i| i != j).map(|i| (i, j)));
            continue;
        }
        for i in 0..m {
            if i == j || witness.is_some() {
                continue;
            }
            if b.seats()[i] >= a.seats()[i] || b.seats()[j] <= a.seats()[j] {
                continue;
            }
            let ratio_before = &p[i] / &p[j];
            let ratio_after = &q[i] / &q[j];
            if ratio_after >= ratio_before {
                witness = Some(Witness::Population {
                    before: Instance::from_problem(before),
                    after: Instance::from_problem(after),
                    solution_before: a.clone(),
                    solution_after: b.clone(),
                    i,
                    j,
                    ratio_before,
                    ratio_after,
                });
            }
        }
    }
    skipped.sort_unstable();
    let mut report = AxiomReport::new(Axiom::PopulationMonotonicity, method, witness);
    report.skipped_pairs = skipped;
    Ok(report)
}

/// A hand-picked or previously found counterexample, stored as vote counts.
#[derive(Clone, Copy, Debug)]
pub struct BundledCase {
    pub method: Method,
    pub axiom: Axiom,
    pub votes: &'static [u64],
    /// House size; for house monotonicity the largest size compared.
    pub seats: u64,
    /// Second vote vector of a population-paradox pair.
    pub votes_after: Option<&'static [u64]>,
}

impl BundledCase {
    /// Runs the case and returns its report.
    pub fn check(&self) -> Result<AxiomReport> {
        let problem = ApportionmentProblem::<Rational>::from_votes(self.votes, self.seats)?;
        match self.axiom {
            Axiom::HouseMonotonicity => check_house_monotonicity(self.method, &problem, self.seats),
            Axiom::PopulationMonotonicity => {
                let votes = self
                    .votes_after
                    .ok_or_else(|| Error::Validation("population case needs a second profile".into()))?;
                let after = ApportionmentProblem::from_votes(votes, self.seats)?;
                check_population_paradox(self.method, &problem, &after)
            }
            axiom => check_quota_axiom(self.method, axiom, &problem),
        }
    }
}

const SIX_PARTIES: &[u64] = &[79, 7, 6, 3, 2, 1];
const FIVE_PARTIES: &[u64] = &[14, 7, 26, 96, 25];

/// One counterexample for every method and axiom the published table marks
/// as failing.
pub fn bundled_cases() -> Vec<BundledCase> {
    use crate::apportionment::DivisorCriterion::*;
    let case = |method, axiom, votes, seats, votes_after| BundledCase {
        method,
        axiom,
        votes,
        seats,
        votes_after,
    };
    vec![
        case(
            Method::LargestRemainder,
            Axiom::HouseMonotonicity,
            &[5, 5, 2][..],
            4,
            None,
        ),
        case(
            Method::LargestRemainder,
            Axiom::PopulationMonotonicity,
            &[64, 63, 6],
            9,
            Some(&[54, 72, 7][..]),
        ),
        case(Method::Divisor(DHondt), Axiom::UpperQuota, SIX_PARTIES, 20, None),
        case(Method::Divisor(DHondt), Axiom::QuotaForThree, &[8, 1, 1], 5, None),
        case(Method::Divisor(Adams), Axiom::LowerQuota, SIX_PARTIES, 20, None),
        case(Method::Divisor(Adams), Axiom::QuotaForThree, &[8, 1, 1], 5, None),
        case(
            Method::Divisor(SainteLague),
            Axiom::LowerQuota,
            &[93, 15, 35, 5],
            16,
            None,
        ),
        case(Method::Divisor(SainteLague), Axiom::UpperQuota, FIVE_PARTIES, 28, None),
        case(
            Method::Divisor(HuntingtonHill),
            Axiom::LowerQuota,
            SIX_PARTIES,
            20,
            None,
        ),
        case(
            Method::Divisor(HuntingtonHill),
            Axiom::UpperQuota,
            FIVE_PARTIES,
            28,
            None,
        ),
        case(
            Method::Divisor(HuntingtonHill),
            Axiom::QuotaForThree,
            &[8, 1, 1],
            5,
            None,
        ),
        case(
            Method::Quota,
            Axiom::PopulationMonotonicity,
            &[91, 16, 17, 92],
            9,
            Some(&[85, 13, 19, 98]),
        ),
        case(
            Method::Frege,
            Axiom::PopulationMonotonicity,
            &[8, 3, 9],
            3,
            Some(&[5, 4, 11]),
        ),
        case(
            Method::Frege,
            Axiom::LowerQuota,
            &[1001, 1000, 206, 182, 181, 180],
            11,
            None,
        ),
    ]
}

/// Bounds of the random instances used by witness search and the corpus.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusConfig {
    pub seed: u64,
    /// General instances with 2 to `max_parties` parties.
    pub instances: u64,
    /// Additional three-party instances for the `quota-m3` column.
    pub three_party_instances: u64,
    pub max_parties: usize,
    pub max_seats: u64,
    pub max_votes: u64,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            seed: 0,
            instances: 10_000,
            three_party_instances: 10_000,
            max_parties: 8,
            max_seats: 150,
            max_votes: 1000,
        }
    }
}

impl CorpusConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_parties < 3 {
            return Err(Error::Validation("max parties must be at least 3".into()));
        }
        if self.max_seats < 2 || self.max_votes == 0 {
            return Err(Error::Validation(
                "max seats must be at least 2 and max votes positive".into(),
            ));
        }
        Ok(())
    }
}

/// One random corpus entry: a vote vector, a perturbed copy for population
/// checks, and a house size.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorpusInstance {
    pub votes: Vec<u64>,
    pub votes_after: Vec<u64>,
    pub seats: u64,
}

/// Instance `index` of a corpus. Indices below `instances` are general;
/// later ones have three parties. Each index has its own random stream.
pub fn corpus_instance(config: &CorpusConfig, index: u64) -> CorpusInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(index);
    let parties = if index < config.instances {
        rng.gen_range(2..=config.max_parties)
    } else {
        3
    };
    let seats = rng.gen_range(1..=config.max_seats);
    let votes: Vec<u64> = (0..parties).map(|_| rng.gen_range(1..=config.max_votes)).collect();
    // Shift each count by up to a quarter in either direction.
    let votes_after = votes
        .iter()
        .map(|&v| {
            let d = v / 4;
            rng.gen_range(v - d..=v + d).max(1)
        })
        .collect();
    CorpusInstance {
        votes,
        votes_after,
        seats,
    }
}

type Problem = ApportionmentProblem<SmallRational>;

/// Checks one axiom for one method on a corpus instance.
fn evaluate(method: Method, axiom: Axiom, inst: &CorpusInstance) -> Result<Option<Witness>> {
    let problem = Problem::from_votes(&inst.votes, inst.seats)?;
    let report = match axiom {
        Axiom::HouseMonotonicity => check_house_monotonicity(method, &problem, inst.seats.max(2))?,
        Axiom::PopulationMonotonicity => {
            let after = Problem::from_votes(&inst.votes_after, inst.seats)?;
            check_population_paradox(method, &problem, &after)?
        }
        axiom => check_quota_axiom(method, axiom, &problem)?,
    };
    Ok(report.witness)
}

/// Random search for a counterexample: tries corpus instances `0..attempts`
/// (three-party ones for `quota-m3`) and returns the first witness with
/// its instance index.
pub fn search_witness(
    method: Method,
    axiom: Axiom,
    config: &CorpusConfig,
    attempts: u64,
) -> Result<Option<(u64, Witness)>> {
    config.validate()?;
    let mut config = config.clone();
    if axiom == Axiom::QuotaForThree {
        config.instances = 0;
    }
    for index in 0..attempts {
        if let Some(w) = evaluate(method, axiom, &corpus_instance(&config, index))? {
            return Ok(Some((index, w)));
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WitnessSource {
    Bundled,
    Corpus { index: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxiomCell {
    pub axiom: Axiom,
    pub verdict: Verdict,
    /// Whether the published table marks the axiom as satisfied.
    pub published: bool,
    /// Corpus instances violating the axiom.
    pub counterexamples: u64,
    pub tested: u64,
    pub witness: Option<Witness>,
    pub source: Option<WitnessSource>,
}

impl AxiomCell {
    pub fn agrees(&self) -> bool {
        self.published == (self.verdict == Verdict::HoldsOnTested)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxiomRow {
    pub method: Method,
    pub cells: Vec<AxiomCell>,
    /// Largest lower-quota deficit seen on the corpus.
    pub max_lower_deficit: u64,
    /// Instances whose lower deficit exceeds `ceil((m - 3) / 2)`.
    pub deficit_bound_breaches: u64,
}

impl AxiomRow {
    pub fn cell(&self, axiom: Axiom) -> &AxiomCell {
        &self.cells[axiom.index()]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxiomTable {
    pub config: CorpusConfig,
    pub rows: Vec<AxiomRow>,
}

impl AxiomTable {
    pub fn row(&self, method: Method) -> Option<&AxiomRow> {
        self.rows.iter().find(|r| r.method == method)
    }

    /// Cells whose verdict differs from the published table.
    pub fn disagreements(&self) -> Vec<(Method, Axiom)> {
        self.rows
            .iter()
            .flat_map(|r| r.cells.iter().filter(|c| !c.agrees()).map(|c| (r.method, c.axiom)))
            .collect()
    }

    pub fn agrees_with_published(&self) -> bool {
        self.disagreements().is_empty()
    }

    /// Aligned `+`/`-` matrix, flagging cells that differ from the
    /// published table with `!`.
    pub fn to_text(&self) -> String {
        let width = self
            .rows
            .iter()
            .map(|r| r.method.title().chars().count())
            .max()
            .unwrap_or(0);
        let mut out = format!("{:width$}", "");
        for a in Axiom::ALL {
            let _ = write!(out, "  {:>13}", a.title());
        }
        out.push('\n');
        for row in &self.rows {
            let pad = width - row.method.title().chars().count();
            let _ = write!(out, "{}{}", row.method.title(), " ".repeat(pad));
            for c in &row.cells {
                let mark = format!("{}{}", c.verdict.symbol(), if c.agrees() { "" } else { "!" });
                let _ = write!(out, "  {mark:>13}");
            }
            out.push('\n');
        }
        let _ = writeln!(
            out,
            "instances: {} general, {} with three parties  seed: {}",
            self.config.instances, self.config.three_party_instances, self.config.seed
        );
        out
    }
}

#[derive(Clone, Debug, Default)]
struct Findings {
    counts: Vec<u64>,
    tested: Vec<u64>,
    first: Vec<Option<(u64, Witness)>>,
    max_deficit: Vec<u64>,
    breaches: Vec<u64>,
}

impl Findings {
    fn new(methods: usize) -> Self {
        let cells = methods * Axiom::ALL.len();
        Findings {
            counts: vec![0; cells],
            tested: vec![0; cells],
            first: vec![None; cells],
            max_deficit: vec![0; methods],
            breaches: vec![0; methods],
        }
    }

    fn merge(mut self, other: Findings) -> Findings {
        for c in 0..self.counts.len() {
            self.counts[c] += other.counts[c];
            self.tested[c] += other.tested[c];
            let keep_other = match (&self.first[c], &other.first[c]) {
                (None, Some(_)) => true,
                (Some((a, _)), Some((b, _))) => b < a,
                _ => false,
            };
            if keep_other {
                self.first[c] = other.first[c].clone();
            }
        }
        for m in 0..self.max_deficit.len() {
            self.max_deficit[m] = self.max_deficit[m].max(other.max_deficit[m]);
            self.breaches[m] += other.breaches[m];
        }
        self
    }
}

fn scan_instance(methods: &[Method], config: &CorpusConfig, index: u64, findings: &mut Findings) -> Result<()> {
    let inst = corpus_instance(config, index);
    let general = index < config.instances;
    let problem = Problem::from_votes(&inst.votes, inst.seats)?;
    let after = Problem::from_votes(&inst.votes_after, inst.seats)?;
    let m = inst.votes.len();
    for (mi, &method) in methods.iter().enumerate() {
        let cell = |a: Axiom| mi * Axiom::ALL.len() + a.index();
        let record = |a: Axiom, w: Option<Witness>, f: &mut Findings| {
            f.tested[cell(a)] += 1;
            if let Some(w) = w {
                f.counts[cell(a)] += 1;
                if f.first[cell(a)].is_none() {
                    f.first[cell(a)] = Some((index, w));
                }
            }
        };
        let solution;
        if general {
            let solutions = solutions_up_to(method, &problem, inst.seats.max(2))?;
            record(Axiom::HouseMonotonicity, house_witness(&problem, &solutions)?, findings);
            solution = solutions[inst.seats as usize - 1].clone();
            let other = method.apportion(&after);
            let paradox = paradox_report(method, &problem, &after, solution.clone(), other)?;
            record(Axiom::PopulationMonotonicity, paradox.witness, findings);
            record(Axiom::LowerQuota, quota_witness(&problem, &solution, true), findings);
            record(Axiom::UpperQuota, quota_witness(&problem, &solution, false), findings);
        } else {
            solution = method.apportion(&problem);
        }
        if m == 3 {
            let w = quota_witness(&problem, &solution, true).or_else(|| quota_witness(&problem, &solution, false));
            record(Axiom::QuotaForThree, w, findings);
        }
        let check = check_quota(&solution, &problem)?;
        let deficit = check
            .lower_slack
            .iter()
            .map(|s| (-s).to_u64().unwrap_or(0))
            .max()
            .unwrap_or(0);
        findings.max_deficit[mi] = findings.max_deficit[mi].max(deficit);
        if deficit > lower_deficit_bound(m) {
            findings.breaches[mi] += 1;
        }
    }
    Ok(())
}

/// Checks every method against every axiom on the seeded corpus and fills
/// in bundled witnesses. Instances are scanned in parallel; the result does
/// not depend on scheduling.
pub fn regenerate_axiom_table(config: &CorpusConfig) -> Result<AxiomTable> {
    regenerate_axiom_table_for(config, &Method::ALL)
}

pub fn regenerate_axiom_table_for(config: &CorpusConfig, methods: &[Method]) -> Result<AxiomTable> {
    config.validate()?;
    let total = config.instances + config.three_party_instances;
    const CHUNK: u64 = 64;
    let chunks: Vec<u64> = (0..total.div_ceil(CHUNK)).collect();
    let findings = chunks
        .into_par_iter()
        .map(|c| {
            let mut f = Findings::new(methods.len());
            for index in c * CHUNK..((c + 1) * CHUNK).min(total) {
                scan_instance(methods, config, index, &mut f)?;
            }
            Ok(f)
        })
        .try_reduce(|| Findings::new(methods.len()), |a, b| Ok(a.merge(b)))?;

    let bundled = bundled_cases();
    let mut rows = Vec::with_capacity(methods.len());
    for (mi, &method) in methods.iter().enumerate() {
        let mut cells = Vec::with_capacity(Axiom::ALL.len());
        for axiom in Axiom::ALL {
            let c = mi * Axiom::ALL.len() + axiom.index();
            let published = published_verdict(method, axiom);
            let mut witness = None;
            let mut source = None;
            if !published {
                if let Some(case) = bundled.iter().find(|b| b.method == method && b.axiom == axiom) {
                    witness = case.check()?.witness;
                    source = witness.as_ref().map(|_| WitnessSource::Bundled);
                }
            }
            if witness.is_none() {
                if let Some((index, w)) = &findings.first[c] {
                    witness = Some(w.clone());
                    source = Some(WitnessSource::Corpus { index: *index });
                }
            }
            cells.push(AxiomCell {
                axiom,
                verdict: if witness.is_some() {
                    Verdict::Violated
                } else {
                    Verdict::HoldsOnTested
                },
                published,
                counterexamples: findings.counts[c],
                tested: findings.tested[c],
                witness,
                source,
            });
        }
        rows.push(AxiomRow {
            method,
            cells,
            max_lower_deficit: findings.max_deficit[mi],
            deficit_bound_breaches: findings.breaches[mi],
        });
    }
    Ok(AxiomTable {
        config: config.clone(),
        rows,
    })
}
