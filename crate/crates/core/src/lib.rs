//! Frege's temporal voting method, its modified variant, and apportionment
//! methods over exact rational vote shares.
//!
//! The voting and apportionment engines are generic over a [`Scalar`]
//! (exact [`Rational`], machine-integer fractions, or floats). The aliases
//! below fix the exact instantiation used throughout the command line and
//! the test suites.

pub mod apportionment;
pub mod axioms;
pub mod bias;
pub mod command;
pub mod error;
pub mod io;
pub mod modified;
pub mod original;
pub mod profile;
pub mod quota;
pub mod scalar;

pub use apportionment::{
    compare_all, divisor_method, frege_apportionment, is_divisor_admissible, largest_remainder, quota_method,
    ApportionmentProblem, ApportionmentSolution, DivisorCriterion, Method,
};
pub use error::{Error, Result};
pub use modified::{run_modified, ModifiedRecord, ModifiedState, ModifiedTrace};
pub use original::{
    closed_form_check, closed_form_offsets, cost_stabilization_time, detect_cycle, run_original, Cycle, OriginalRecord,
    OriginalState, OriginalTrace,
};
pub use profile::{normalize, CandidateId, Profile, Round, Rounds};
pub use quota::{audit_variable_quota, lower_deficit_bound, QuotaReport};
pub use scalar::{ceil, floor, rat, Rational, Scalar};

/// Fraction with 64-bit numerator and denominator. Exact, and much faster
/// than [`Rational`] when vote counts are small.
pub type SmallRational = num_rational::Ratio<i64>;

/// Modified-method state over exact rationals.
pub type ExactModifiedState = ModifiedState<Rational>;
/// Modified-method trace over exact rationals.
pub type ExactModifiedTrace = ModifiedTrace<Rational>;
/// Apportionment problem over exact rationals.
pub type ExactProblem = ApportionmentProblem<Rational>;
/// Apportionment problem over 64-bit fractions.
pub type SmallProblem = ApportionmentProblem<SmallRational>;
/// Apportionment problem over `f64` shares.
pub type FloatProblem = ApportionmentProblem<f64>;
