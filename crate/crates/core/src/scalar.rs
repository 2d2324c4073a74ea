//! Arithmetic abstraction shared by the modified method and the apportionment
//! methods, with implementations for exact rationals and floating point.
//!
//! Every result in this crate is stated for exact arithmetic. The float
//! implementations exist for quick exploratory runs; ties and quota
//! boundaries are only reliable with the exact types.

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Exact arbitrary-precision fraction, always kept in lowest terms with a
/// positive denominator.
pub type Rational = BigRational;

/// Numeric type usable as a vote share or aggregate score.
pub trait Scalar: Clone + Debug + Display + PartialOrd + Num + Signed + Sum + Send + Sync + 'static {
    /// Whether arithmetic on this type is exact.
    const EXACT: bool;

    /// Builds `num / den`. Fails on a zero denominator or when the value is
    /// not representable.
    fn from_ratio(num: &BigInt, den: &BigInt) -> Result<Self>;

    fn from_u64(n: u64) -> Self;

    /// Largest integer not greater than `self`.
    fn floor_int(&self) -> BigInt;

    /// Smallest integer not less than `self`.
    fn ceil_int(&self) -> BigInt;

    fn to_f64(&self) -> f64;

    /// Exact rational value of `self`. Floats convert their binary value.
    fn to_rational(&self) -> Rational;

    /// Equality used when validating inputs such as "shares sum to one".
    /// Exact types compare exactly; floats allow a small relative error.
    fn nearly_eq(&self, other: &Self) -> bool {
        self == other
    }

    /// Compares `self * k` with `other * l`.
    fn cmp_scaled(&self, k: u64, other: &Self, l: u64) -> Ordering {
        (self.clone() * Self::from_u64(k))
            .partial_cmp(&(other.clone() * Self::from_u64(l)))
            .unwrap_or(Ordering::Equal)
    }

    /// Compares `self^2 * k` with `other^2 * l`.
    fn cmp_square_scaled(&self, k: u64, other: &Self, l: u64) -> Ordering {
        (self.clone() * self.clone()).cmp_scaled(k, &(other.clone() * other.clone()), l)
    }

    /// Compares `self * k` with the integer `n`.
    fn cmp_scaled_int(&self, k: u64, n: u64) -> Ordering {
        (self.clone() * Self::from_u64(k))
            .partial_cmp(&Self::from_u64(n))
            .unwrap_or(Ordering::Equal)
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_ratio(num: &BigInt, den: &BigInt) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        Ok(BigRational::new(num.clone(), den.clone()))
    }

    fn from_u64(n: u64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }

    fn floor_int(&self) -> BigInt {
        self.floor().to_integer()
    }

    fn ceil_int(&self) -> BigInt {
        self.ceil().to_integer()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn to_rational(&self) -> Rational {
        self.clone()
    }

    fn cmp_scaled(&self, k: u64, other: &Self, l: u64) -> Ordering {
        (self.numer() * k * other.denom()).cmp(&(other.numer() * l * self.denom()))
    }

    fn cmp_square_scaled(&self, k: u64, other: &Self, l: u64) -> Ordering {
        let lhs = self.numer() * self.numer() * k * other.denom() * other.denom();
        let rhs = other.numer() * other.numer() * l * self.denom() * self.denom();
        lhs.cmp(&rhs)
    }

    fn cmp_scaled_int(&self, k: u64, n: u64) -> Ordering {
        (self.numer() * k).cmp(&(self.denom() * n))
    }
}

macro_rules! machine_ratio {
    ($int:ty) => {
        impl Scalar for Ratio<$int> {
            const EXACT: bool = true;

            fn from_ratio(num: &BigInt, den: &BigInt) -> Result<Self> {
                if den.is_zero() {
                    return Err(Error::ZeroDenominator);
                }
                let g = num.gcd(den);
                let (n, d) = (num / &g, den / &g);
                let conv = |x: &BigInt| <$int>::from_bigint_checked(x).ok_or_else(|| Error::Overflow(x.to_string()));
                Ok(Ratio::new(conv(&n)?, conv(&d)?))
            }

            fn from_u64(n: u64) -> Self {
                Ratio::from_integer(<$int>::try_from(n).expect("integer fits"))
            }

            fn floor_int(&self) -> BigInt {
                BigInt::from(self.floor().to_integer())
            }

            fn ceil_int(&self) -> BigInt {
                BigInt::from(self.ceil().to_integer())
            }

            fn to_f64(&self) -> f64 {
                *self.numer() as f64 / *self.denom() as f64
            }

            fn to_rational(&self) -> Rational {
                BigRational::new(BigInt::from(*self.numer()), BigInt::from(*self.denom()))
            }

            fn cmp_scaled(&self, k: u64, other: &Self, l: u64) -> Ordering {
                let wide = |a: $int, b: u64, c: $int| {
                    i128::try_from(a)
                        .ok()?
                        .checked_mul(i128::from(b))?
                        .checked_mul(i128::try_from(c).ok()?)
                };
                match (
                    wide(*self.numer(), k, *other.denom()),
                    wide(*other.numer(), l, *self.denom()),
                ) {
                    (Some(lhs), Some(rhs)) => lhs.cmp(&rhs),
                    _ => self.to_rational().cmp_scaled(k, &other.to_rational(), l),
                }
            }

            fn cmp_square_scaled(&self, k: u64, other: &Self, l: u64) -> Ordering {
                let wide = |a: $int, b: u64, c: $int| {
                    let a = i128::try_from(a).ok()?;
                    let c = i128::try_from(c).ok()?;
                    a.checked_mul(a)?
                        .checked_mul(i128::from(b))?
                        .checked_mul(c)?
                        .checked_mul(c)
                };
                match (
                    wide(*self.numer(), k, *other.denom()),
                    wide(*other.numer(), l, *self.denom()),
                ) {
                    (Some(lhs), Some(rhs)) => lhs.cmp(&rhs),
                    _ => self.to_rational().cmp_square_scaled(k, &other.to_rational(), l),
                }
            }

            fn cmp_scaled_int(&self, k: u64, n: u64) -> Ordering {
                let lhs = i128::try_from(*self.numer())
                    .ok()
                    .and_then(|a| a.checked_mul(i128::from(k)));
                let rhs = i128::try_from(*self.denom())
                    .ok()
                    .and_then(|d| d.checked_mul(i128::from(n)));
                match (lhs, rhs) {
                    (Some(lhs), Some(rhs)) => lhs.cmp(&rhs),
                    _ => self.to_rational().cmp_scaled_int(k, n),
                }
            }
        }
    };
}

trait FromBigIntChecked: Sized {
    fn from_bigint_checked(x: &BigInt) -> Option<Self>;
}

impl FromBigIntChecked for i64 {
    fn from_bigint_checked(x: &BigInt) -> Option<Self> {
        x.to_i64()
    }
}

impl FromBigIntChecked for i128 {
    fn from_bigint_checked(x: &BigInt) -> Option<Self> {
        x.to_i128()
    }
}

machine_ratio!(i64);
machine_ratio!(i128);

macro_rules! float_scalar {
    ($float:ty) => {
        impl Scalar for $float {
            const EXACT: bool = false;

            fn from_ratio(num: &BigInt, den: &BigInt) -> Result<Self> {
                if den.is_zero() {
                    return Err(Error::ZeroDenominator);
                }
                let q = BigRational::new(num.clone(), den.clone());
                ToPrimitive::to_f64(&q)
                    .map(|v| v as $float)
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::Overflow(q.to_string()))
            }

            fn from_u64(n: u64) -> Self {
                n as $float
            }

            fn floor_int(&self) -> BigInt {
                BigInt::from_f64(self.floor() as f64).expect("finite value")
            }

            fn ceil_int(&self) -> BigInt {
                BigInt::from_f64(self.ceil() as f64).expect("finite value")
            }

            fn to_f64(&self) -> f64 {
                *self as f64
            }

            fn to_rational(&self) -> Rational {
                BigRational::from_float(*self).expect("finite value")
            }

            fn nearly_eq(&self, other: &Self) -> bool {
                let scale = self.abs().max(other.abs()).max(1.0);
                (self - other).abs() <= 1e3 * <$float>::EPSILON * scale
            }
        }
    };
}

float_scalar!(f64);
float_scalar!(f32);

/// Builds the canonical fraction `num / den`.
pub fn rat(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Result<Rational> {
    Rational::from_ratio(&num.into(), &den.into())
}

/// Largest integer not greater than `x`.
pub fn floor(x: &Rational) -> BigInt {
    x.floor_int()
}

/// Smallest integer not less than `x`.
pub fn ceil(x: &Rational) -> BigInt {
    x.ceil_int()
}

/// Parses `"a/b"` or `"a"` into an exact fraction.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let parse_int = |t: &str| {
        t.trim()
            .parse::<BigInt>()
            .map_err(|_| Error::Parse(format!("invalid integer {t:?}")))
    };
    match s.split_once('/') {
        Some((n, d)) => Rational::from_ratio(&parse_int(n)?, &parse_int(d)?),
        None => Ok(Rational::from_integer(parse_int(s)?)),
    }
}

/// Sum of a slice of scalars.
pub(crate) fn total<T: Scalar>(values: &[T]) -> T {
    values.iter().cloned().fold(T::zero(), |acc, v| acc + v)
}

/// Checks that `values` form a distribution: non-negative and summing to one.
pub(crate) fn check_distribution<T: Scalar>(values: &[T]) -> Result<()> {
    if let Some(v) = values.iter().find(|v| v.is_negative()) {
        return Err(Error::Validation(format!("negative share {v}")));
    }
    let sum = total(values);
    if !sum.nearly_eq(&T::one()) {
        return Err(Error::NotNormalized(sum.to_string()));
    }
    Ok(())
}

/// Serde adapters writing exact values as `"num/den"` and decimal strings.
pub mod exact_serde {
    use super::{parse_rational, Rational};
    use num_bigint::BigInt;
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub mod fraction {
        use super::*;

        pub fn serialize<S: Serializer>(x: &Rational, s: S) -> Result<S::Ok, S::Error> {
            s.collect_str(x)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
            let text = String::deserialize(d)?;
            parse_rational(&text).map_err(D::Error::custom)
        }
    }

    pub mod fractions {
        use super::*;

        pub fn serialize<S: Serializer>(xs: &[Rational], s: S) -> Result<S::Ok, S::Error> {
            s.collect_seq(xs.iter().map(|x| x.to_string()))
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
            Vec::<String>::deserialize(d)?
                .iter()
                .map(|t| parse_rational(t).map_err(D::Error::custom))
                .collect()
        }
    }

    pub mod integer {
        use super::*;

        pub fn serialize<S: Serializer>(x: &BigInt, s: S) -> Result<S::Ok, S::Error> {
            s.collect_str(x)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
            String::deserialize(d)?.parse().map_err(D::Error::custom)
        }
    }

    pub mod integers {
        use super::*;

        pub fn serialize<S: Serializer>(xs: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
            s.collect_seq(xs.iter().map(|x| x.to_string()))
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
            Vec::<String>::deserialize(d)?
                .iter()
                .map(|t| t.parse().map_err(D::Error::custom))
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rat_reduces_to_lowest_terms() {
        assert_eq!(rat(2, 4).unwrap(), rat(1, 2).unwrap());
        let zero = rat(0, 7).unwrap();
        assert_eq!(zero.numer(), &BigInt::from(0));
        assert_eq!(zero.denom(), &BigInt::from(1));
        let neg = rat(3, -6).unwrap();
        assert_eq!(neg.numer(), &BigInt::from(-1));
        assert_eq!(neg.denom(), &BigInt::from(2));
    }

    #[test]
    fn rat_rejects_zero_denominator() {
        assert_eq!(rat(1, 0), Err(Error::ZeroDenominator));
        assert!(Ratio::<i64>::from_ratio(&BigInt::from(1), &BigInt::from(0)).is_err());
        assert!(f64::from_ratio(&BigInt::from(1), &BigInt::from(0)).is_err());
    }

    #[test]
    fn sum_with_common_denominator() {
        let s = rat(1001, 2750).unwrap() + rat(1000, 2750).unwrap();
        assert_eq!(s, rat(2001, 2750).unwrap());
    }

    #[test]
    fn floor_and_ceil_examples() {
        assert_eq!(floor(&rat(10, 3).unwrap()), BigInt::from(3));
        assert_eq!(floor(&rat(-1, 2).unwrap()), BigInt::from(-1));
        assert_eq!(ceil(&rat(11 * 1000, 2750).unwrap()), BigInt::from(4));
        assert_eq!(ceil(&rat(-1, 2).unwrap()), BigInt::from(0));
    }

    #[test]
    fn machine_ratio_overflow_is_reported() {
        let big = BigInt::from(i64::MAX) * 3;
        assert!(matches!(
            Ratio::<i64>::from_ratio(&big, &BigInt::from(1)),
            Err(Error::Overflow(_))
        ));
        // Reduction happens before conversion.
        let r = Ratio::<i64>::from_ratio(&(BigInt::from(i64::MAX) * 2), &BigInt::from(4)).unwrap();
        assert_eq!(
            r.to_rational(),
            BigRational::new(BigInt::from(i64::MAX), BigInt::from(2))
        );
    }

    #[test]
    fn parse_rational_forms() {
        assert_eq!(parse_rational("3/6").unwrap(), rat(1, 2).unwrap());
        assert_eq!(parse_rational(" -4 ").unwrap(), rat(-4, 1).unwrap());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn float_floor_ceil() {
        assert_eq!(2.5f64.floor_int(), BigInt::from(2));
        assert_eq!((-2.5f64).ceil_int(), BigInt::from(-2));
        assert!(0.1f64.nearly_eq(&(1.0 - 0.9)));
    }

    fn small_rat() -> impl Strategy<Value = (i64, i64)> {
        (-1000i64..1000, 1i64..1000)
    }

    proptest! {
        #[test]
        fn addition_matches_integer_oracle((a, b) in small_rat(), (c, d) in small_rat()) {
            // a/b + c/d computed on the common denominator b*d.
            let expected = rat(a * d + c * b, b * d).unwrap();
            prop_assert_eq!(rat(a, b).unwrap() + rat(c, d).unwrap(), expected);
        }

        #[test]
        fn arithmetic_laws((a, b) in small_rat(), (c, d) in small_rat(), (e, f) in small_rat()) {
            let (x, y, z) = (rat(a, b).unwrap(), rat(c, d).unwrap(), rat(e, f).unwrap());
            prop_assert_eq!(&x + &y, &y + &x);
            prop_assert_eq!(&x * &y, &y * &x);
            prop_assert_eq!((&x + &y) + &z, &x + (&y + &z));
            prop_assert_eq!((&x * &y) * &z, &x * (&y * &z));
            prop_assert_eq!(&x * (&y + &z), &x * &y + &x * &z);
        }

        #[test]
        fn canonical_form((a, b) in small_rat(), k in 1i64..50) {
            let x = rat(a * k, b * k).unwrap();
            prop_assert_eq!(&x, &rat(a, b).unwrap());
            prop_assert!(x.denom() > &BigInt::from(0));
            prop_assert!(x.numer().gcd(x.denom()) == BigInt::from(1));
        }

        #[test]
        fn floor_ceil_duality((a, b) in small_rat()) {
            let x = rat(a, b).unwrap();
            let f = floor(&x);
            prop_assert!(Rational::from_integer(f.clone()) <= x);
            prop_assert!(x < Rational::from_integer(f.clone() + 1));
            prop_assert_eq!(&f + ceil(&-x.clone()), BigInt::from(0));
            prop_assert_eq!(ceil(&x), -floor(&-x));
        }

        #[test]
        fn comparison_hooks_agree((a, b) in small_rat(), (c, d) in small_rat(), k in 0u64..500, l in 0u64..500) {
            let (x, y) = (rat(a, b).unwrap(), rat(c, d).unwrap());
            let naive = (&x * <Rational as Scalar>::from_u64(k)).cmp(&(&y * <Rational as Scalar>::from_u64(l)));
            prop_assert_eq!(x.cmp_scaled(k, &y, l), naive);
            let naive_sq = (&x * &x * <Rational as Scalar>::from_u64(k)).cmp(&(&y * &y * <Rational as Scalar>::from_u64(l)));
            prop_assert_eq!(x.cmp_square_scaled(k, &y, l), naive_sq);
            prop_assert_eq!(x.cmp_scaled_int(k, l), (&x * <Rational as Scalar>::from_u64(k)).cmp(&<Rational as Scalar>::from_u64(l)));
            let (xs, ys) = (Ratio::<i64>::new(a, b), Ratio::<i64>::new(c, d));
            prop_assert_eq!(xs.cmp_scaled(k, &ys, l), naive);
            prop_assert_eq!(xs.cmp_square_scaled(k, &ys, l), naive_sq);
            prop_assert_eq!(xs.cmp_scaled_int(k, l), x.cmp_scaled_int(k, l));
        }

        #[test]
        fn machine_ratio_agrees_with_bigrational((a, b) in small_rat(), (c, d) in small_rat()) {
            let x = Ratio::<i64>::new(a, b) + Ratio::<i64>::new(c, d);
            prop_assert_eq!(x.to_rational(), rat(a, b).unwrap() + rat(c, d).unwrap());
            prop_assert_eq!(x.floor_int(), floor(&x.to_rational()));
        }
    }
}
