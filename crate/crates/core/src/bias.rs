//! Monte-Carlo estimate of how often each apportionment method gives the
//! smallest party fewer votes per seat than the largest one.
//!
//! Instance `i` of a run is drawn from its own ChaCha stream selected by
//! `(seed, i)`, so results do not depend on evaluation order or on the
//! number of worker threads.

use crate::apportionment::{ApportionmentProblem, ApportionmentSolution, Method};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::SmallRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt::Write as _;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BiasConfig {
    pub parties: usize,
    /// Vote counts are uniform on `1..=max_votes`.
    pub max_votes: u64,
    pub seats: u64,
    pub samples: u64,
    pub seed: u64,
    pub methods: Vec<Method>,
}

impl Default for BiasConfig {
    fn default() -> Self {
        BiasConfig {
            parties: 5,
            max_votes: 1000,
            seats: 100,
            samples: 1_000_000,
            seed: 0,
            methods: Method::ALL.to_vec(),
        }
    }
}

impl BiasConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::Validation("samples must be at least 1".into()));
        }
        if self.parties < 2 {
            return Err(Error::Validation("at least two parties required".into()));
        }
        if self.max_votes == 0 || self.seats == 0 {
            return Err(Error::Validation("max votes and seats must be positive".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Validation("no methods selected".into()));
        }
        Ok(())
    }
}

/// Vote counts of instance `index`: i.i.d. uniform on `1..=max_votes`.
pub fn sample_votes(seed: u64, index: u64, config: &BiasConfig) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    (0..config.parties)
        .map(|_| rng.gen_range(1..=config.max_votes))
        .collect()
}

/// Normalized problem of instance `index`.
pub fn sample_instance<T: Scalar>(seed: u64, index: u64, config: &BiasConfig) -> Result<ApportionmentProblem<T>> {
    ApportionmentProblem::from_votes(&sample_votes(seed, index, config), config.seats)
}

/// Outcome of comparing votes per seat of the smallest and largest party.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Favor {
    /// Strictly fewer votes per seat for the smallest party.
    Favored,
    NotFavored,
    /// The largest party has no seat; the comparison is undefined.
    Skip,
}

/// Smallest and largest party by share, lowest index on ties.
pub fn extreme_parties<T: Scalar>(shares: &[T]) -> (usize, usize) {
    let (mut small, mut large) = (0, 0);
    for (i, p) in shares.iter().enumerate().skip(1) {
        if *p < shares[small] {
            small = i;
        }
        if *p > shares[large] {
            large = i;
        }
    }
    (small, large)
}

/// Whether `p_s / a_s < p_l / a_l`. A smallest party without seats needs
/// infinitely many votes per seat and is never favored.
pub fn smaller_party_favored<T: Scalar>(problem: &ApportionmentProblem<T>, solution: &ApportionmentSolution) -> Favor {
    let shares = problem.shares();
    let (s, l) = extreme_parties(shares);
    let seats = solution.seats();
    if seats[l] == 0 {
        return Favor::Skip;
    }
    if seats[s] == 0 {
        return Favor::NotFavored;
    }
    match shares[s].cmp_scaled(seats[l], &shares[l], seats[s]) {
        Ordering::Less => Favor::Favored,
        _ => Favor::NotFavored,
    }
}

/// Per-method tallies of a run.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BiasCounts {
    pub favored: u64,
    pub not_favored: u64,
    pub skipped: u64,
    /// Instances where the smallest party received no seat.
    pub smallest_without_seat: u64,
}

impl BiasCounts {
    fn merge(&mut self, other: &BiasCounts) {
        self.favored += other.favored;
        self.not_favored += other.not_favored;
        self.skipped += other.skipped;
        self.smallest_without_seat += other.smallest_without_seat;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodBias {
    pub method: Method,
    pub counts: BiasCounts,
    /// Fraction of counted instances favoring the smallest party.
    pub fraction: f64,
    /// 95% normal-approximation interval.
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiasReport {
    pub config: BiasConfig,
    pub methods: Vec<MethodBias>,
    /// Instances where the smallest vote count was shared by several parties.
    pub smallest_ties: u64,
    pub largest_ties: u64,
}

impl BiasReport {
    pub fn get(&self, method: Method) -> Option<&MethodBias> {
        self.methods.iter().find(|m| m.method == method)
    }

    /// Aligned text table with percentages.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let width = self
            .methods
            .iter()
            .map(|m| m.method.title().chars().count())
            .max()
            .unwrap_or(0);
        let _ = writeln!(out, "{:<width$}  {:>7}  {:>20}", "method", "bias", "95% confidence");
        for m in &self.methods {
            let pad = width - m.method.title().chars().count();
            let _ = writeln!(
                out,
                "{}{}  {:>6.2}%  ({:>6.2}%, {:>6.2}%)",
                m.method.title(),
                " ".repeat(pad),
                100.0 * m.fraction,
                100.0 * m.ci_low,
                100.0 * m.ci_high
            );
        }
        let _ = writeln!(
            out,
            "samples: {}  seed: {}  smallest ties: {}  largest ties: {}",
            self.config.samples, self.config.seed, self.smallest_ties, self.largest_ties
        );
        out
    }
}

/// Half-width of the 95% normal-approximation interval for a fraction `f`
/// estimated from `n` samples. Zero when the variance vanishes.
pub fn ci_half_width(f: f64, n: u64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    1.96 * (f * (1.0 - f) / n as f64).sqrt()
}

#[derive(Clone, Debug, Default)]
struct Tally {
    counts: Vec<BiasCounts>,
    smallest_ties: u64,
    largest_ties: u64,
}

impl Tally {
    fn new(methods: usize) -> Self {
        Tally {
            counts: vec![BiasCounts::default(); methods],
            ..Default::default()
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            a.merge(b);
        }
        self.smallest_ties += other.smallest_ties;
        self.largest_ties += other.largest_ties;
        self
    }
}

/// Runs the experiment with 64-bit exact fractions.
pub fn run_bias_experiment(config: &BiasConfig) -> Result<BiasReport> {
    run_bias_experiment_with::<SmallRational>(config)
}

/// Runs the experiment with shares in the scalar type `T`.
pub fn run_bias_experiment_with<T: Scalar>(config: &BiasConfig) -> Result<BiasReport> {
    config.validate()?;
    const CHUNK: u64 = 1024;
    let chunks = config.samples.div_ceil(CHUNK);
    let tally = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut tally = Tally::new(config.methods.len());
            for index in c * CHUNK..((c + 1) * CHUNK).min(config.samples) {
                let votes = sample_votes(config.seed, index, config);
                let min = votes.iter().min().expect("parties >= 2");
                let max = votes.iter().max().expect("parties >= 2");
                tally.smallest_ties += u64::from(votes.iter().filter(|v| *v == min).count() > 1);
                tally.largest_ties += u64::from(votes.iter().filter(|v| *v == max).count() > 1);
                let problem: ApportionmentProblem<T> = ApportionmentProblem::from_votes(&votes, config.seats)?;
                let (small, _) = extreme_parties(problem.shares());
                for (counts, method) in tally.counts.iter_mut().zip(&config.methods) {
                    let solution = method.apportion(&problem);
                    if solution.seats()[small] == 0 {
                        counts.smallest_without_seat += 1;
                    }
                    match smaller_party_favored(&problem, &solution) {
                        Favor::Favored => counts.favored += 1,
                        Favor::NotFavored => counts.not_favored += 1,
                        Favor::Skip => counts.skipped += 1,
                    }
                }
            }
            Ok(tally)
        })
        .try_reduce(|| Tally::new(config.methods.len()), |a, b| Ok(a.merge(b)))?;

    let methods = config
        .methods
        .iter()
        .zip(tally.counts)
        .map(|(&method, counts)| {
            let counted = counts.favored + counts.not_favored;
            let fraction = if counted == 0 {
                0.0
            } else {
                counts.favored as f64 / counted as f64
            };
            let half = ci_half_width(fraction, counted);
            MethodBias {
                method,
                counts,
                fraction,
                ci_low: (fraction - half).max(0.0),
                ci_high: (fraction + half).min(1.0),
            }
        })
        .collect();
    Ok(BiasReport {
        config: config.clone(),
        methods,
        smallest_ties: tally.smallest_ties,
        largest_ties: tally.largest_ties,
    })
}
