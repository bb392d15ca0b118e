//! Prime fields, factorials modulo `p`, and exact rationals.
//!
//! Everything the rest of the crate computes lives either in `F_p` (the
//! matrices of the connection and its graded pieces all have integer entries)
//! or in `Q` (slopes).

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// The characteristic of the base field. Always a prime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct PrimeChar(u32);

impl PrimeChar {
    pub fn new(p: u64) -> Result<Self> {
        if p > u32::MAX as u64 || !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(PrimeChar(p as u32))
    }

    #[inline]
    pub fn get(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn as_usize(self) -> usize {
        self.0 as usize
    }

    /// Reduce an arbitrary integer to its canonical residue.
    #[inline]
    pub fn reduce(self, x: i64) -> u32 {
        x.rem_euclid(self.0 as i64) as u32
    }

    #[inline]
    pub(crate) fn add(self, a: u32, b: u32) -> u32 {
        ((a as u64 + b as u64) % self.0 as u64) as u32
    }

    #[inline]
    pub(crate) fn sub(self, a: u32, b: u32) -> u32 {
        ((a as u64 + self.0 as u64 - b as u64) % self.0 as u64) as u32
    }

    #[inline]
    pub(crate) fn mul(self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.0 as u64) as u32
    }

    #[inline]
    pub(crate) fn neg(self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.0 - a
        }
    }

    pub(crate) fn pow(self, mut base: u32, mut exp: u64) -> u32 {
        let mut acc = 1 % self.0;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Inverse by Fermat's little theorem. `a` must be nonzero.
    pub(crate) fn inv(self, a: u32) -> Option<u32> {
        let a = a % self.0;
        if a == 0 {
            None
        } else {
            Some(self.pow(a, self.0 as u64 - 2))
        }
    }
}

impl fmt::Display for PrimeChar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// An element of `F_p`, stored as its canonical residue.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldScalar {
    value: u32,
    p: PrimeChar,
}

impl FieldScalar {
    pub fn new(value: i64, p: PrimeChar) -> Self {
        FieldScalar {
            value: p.reduce(value),
            p,
        }
    }

    pub fn zero(p: PrimeChar) -> Self {
        FieldScalar { value: 0, p }
    }

    pub fn one(p: PrimeChar) -> Self {
        FieldScalar {
            value: 1 % p.get(),
            p,
        }
    }

    #[inline]
    pub fn value(self) -> u32 {
        self.value
    }

    #[inline]
    pub fn characteristic(self) -> PrimeChar {
        self.p
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    fn same_char(self, other: Self) -> Result<PrimeChar> {
        if self.p != other.p {
            return Err(Error::CharacteristicMismatch {
                left: self.p.get(),
                right: other.p.get(),
            });
        }
        Ok(self.p)
    }

    pub fn try_add(self, other: Self) -> Result<Self> {
        let p = self.same_char(other)?;
        Ok(FieldScalar {
            value: p.add(self.value, other.value),
            p,
        })
    }

    pub fn try_sub(self, other: Self) -> Result<Self> {
        let p = self.same_char(other)?;
        Ok(FieldScalar {
            value: p.sub(self.value, other.value),
            p,
        })
    }

    pub fn try_mul(self, other: Self) -> Result<Self> {
        let p = self.same_char(other)?;
        Ok(FieldScalar {
            value: p.mul(self.value, other.value),
            p,
        })
    }

    pub fn try_div(self, other: Self) -> Result<Self> {
        self.try_mul(other.inv()?)
    }

    pub fn inv(self) -> Result<Self> {
        let value = self.p.inv(self.value).ok_or(Error::DivisionByZero(self.p.get()))?;
        Ok(FieldScalar { value, p: self.p })
    }

    pub fn pow(self, exp: u64) -> Self {
        FieldScalar {
            value: self.p.pow(self.value, exp),
            p: self.p,
        }
    }
}

impl Neg for FieldScalar {
    type Output = FieldScalar;

    fn neg(self) -> FieldScalar {
        FieldScalar {
            value: self.p.neg(self.value),
            p: self.p,
        }
    }
}

// The operator forms panic on mismatched characteristics; use the `try_*`
// methods when the operands come from different contexts.
impl Add for FieldScalar {
    type Output = FieldScalar;

    fn add(self, rhs: FieldScalar) -> FieldScalar {
        self.try_add(rhs).expect("characteristic mismatch")
    }
}

impl Sub for FieldScalar {
    type Output = FieldScalar;

    fn sub(self, rhs: FieldScalar) -> FieldScalar {
        self.try_sub(rhs).expect("characteristic mismatch")
    }
}

impl Mul for FieldScalar {
    type Output = FieldScalar;

    fn mul(self, rhs: FieldScalar) -> FieldScalar {
        self.try_mul(rhs).expect("characteristic mismatch")
    }
}

impl fmt::Display for FieldScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// `k! mod p`. Zero as soon as `k >= p`.
pub fn factorial_mod_p(k: u64, p: PrimeChar) -> FieldScalar {
    if k >= p.get() as u64 {
        return FieldScalar::zero(p);
    }
    let value = (1..=k as u32).fold(1 % p.get(), |acc, j| p.mul(acc, j));
    FieldScalar { value, p }
}

/// Binomial coefficient over the integers, with overflow detection.
pub fn binomial(n: u64, k: u64) -> Result<u128> {
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for j in 0..k {
        // acc * (n - j) is divisible by (j + 1) at every step.
        acc = acc
            .checked_mul((n - j) as u128)
            .ok_or(Error::Overflow("binomial coefficient"))?
            / (j as u128 + 1);
    }
    Ok(acc)
}

/// An exact rational number, always in lowest terms with positive denominator.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExactRational(BigRational);

impl ExactRational {
    pub fn new(numerator: i64, denominator: i64) -> Result<Self> {
        if denominator == 0 {
            return Err(Error::usage("rational with zero denominator"));
        }
        Ok(ExactRational(BigRational::new(
            numerator.into(),
            denominator.into(),
        )))
    }

    pub fn from_integer(n: i64) -> Self {
        ExactRational(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        ExactRational(BigRational::zero())
    }

    pub fn one() -> Self {
        ExactRational(BigRational::one())
    }

    pub fn numerator(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denominator(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        if other.is_zero() {
            return Err(Error::usage("rational division by zero"));
        }
        Ok(ExactRational(&self.0 / &other.0))
    }

    /// Always `num/den`, including integers (`3/1`).
    pub fn to_fraction_string(&self) -> String {
        format!("{}/{}", self.0.numer(), self.0.denom())
    }
}

impl fmt::Display for ExactRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl Serialize for ExactRational {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_fraction_string())
    }
}

impl From<i64> for ExactRational {
    fn from(n: i64) -> Self {
        ExactRational::from_integer(n)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for ExactRational {
            type Output = ExactRational;
            fn $method(self, rhs: ExactRational) -> ExactRational {
                ExactRational($trait::$method(self.0, rhs.0))
            }
        }

        impl<'a> $trait<&'a ExactRational> for &'a ExactRational {
            type Output = ExactRational;
            fn $method(self, rhs: &'a ExactRational) -> ExactRational {
                ExactRational($trait::$method(&self.0, &rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl Div for ExactRational {
    type Output = ExactRational;

    /// Panics on division by zero, like integer division. See [`ExactRational::checked_div`].
    fn div(self, rhs: ExactRational) -> ExactRational {
        self.checked_div(&rhs).expect("rational division by zero")
    }
}

impl Neg for ExactRational {
    type Output = ExactRational;

    fn neg(self) -> ExactRational {
        ExactRational(-self.0)
    }
}

impl std::iter::Sum for ExactRational {
    fn sum<I: Iterator<Item = ExactRational>>(iter: I) -> ExactRational {
        iter.fold(ExactRational::zero(), |a, b| a + b)
    }
}

impl PartialEq<i64> for ExactRational {
    fn eq(&self, other: &i64) -> bool {
        self.0 == BigRational::from_integer((*other).into())
    }
}

impl PartialOrd<i64> for ExactRational {
    fn partial_cmp(&self, other: &i64) -> Option<Ordering> {
        self.0.partial_cmp(&BigRational::from_integer((*other).into()))
    }
}
