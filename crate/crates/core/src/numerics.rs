//! Scalar backends: exact big rationals and `f64` with compensated summation.
//!
//! Every algorithm in this crate is generic over [`Scalar`]. The caller picks
//! the backend at the call site; nothing promotes silently between them.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::NumericsError;

/// Largest `m` with `m!` representable as a finite `f64`.
pub const MAX_FLOAT_FACTORIAL: u64 = 170;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Exact,
    Float,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Exact => "exact",
            Backend::Float => "float",
        })
    }
}

/// Field operations shared by the exact and the floating-point backend.
pub trait Scalar:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + 'static
{
    const BACKEND: Backend;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_u64(n: u64) -> Self;
    /// `num / den`; `den` must be nonzero.
    fn from_ratio(num: i64, den: u64) -> Self;
    /// Exact for rationals (every finite double is dyadic); panics on non-finite input.
    fn from_f64(x: f64) -> Self;
    fn is_zero(&self) -> bool;
    fn abs(&self) -> Self;
    fn to_f64(&self) -> f64;

    /// Sum in input order. Floats use Neumaier compensation; rationals are exact.
    fn sum_compensated<I: IntoIterator<Item = Self>>(terms: I) -> Result<Self, NumericsError>;

    /// `m!`, or an error if it is not representable in this backend.
    fn factorial(m: u64) -> Result<Self, NumericsError>;

    fn square(&self) -> Self {
        self.clone() * self.clone()
    }

    /// Backend override for the symmetric-polynomial DP. `None` runs the
    /// generic row update.
    fn esp_row(_probs: &[Self], _weighted: bool) -> Option<(Vec<Self>, crate::esp::DpWork)> {
        None
    }
}

/// Running Neumaier (improved Kahan) accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl Scalar for f64 {
    const BACKEND: Backend = Backend::Float;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_u64(n: u64) -> Self {
        n as f64
    }
    fn from_ratio(num: i64, den: u64) -> Self {
        num as f64 / den as f64
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn to_f64(&self) -> f64 {
        *self
    }

    fn sum_compensated<I: IntoIterator<Item = Self>>(terms: I) -> Result<Self, NumericsError> {
        let mut acc = CompensatedSum::new();
        for (index, x) in terms.into_iter().enumerate() {
            acc.add(x);
            if !acc.sum.is_finite() {
                return Err(NumericsError::Overflow { index });
            }
        }
        Ok(acc.value())
    }

    fn factorial(m: u64) -> Result<Self, NumericsError> {
        if m > MAX_FLOAT_FACTORIAL {
            return Err(NumericsError::FactorialOverflow(m));
        }
        Ok((2..=m).fold(1.0, |acc, k| acc * k as f64))
    }
}

/// Arbitrary-precision rational, always in lowest terms with positive denominator.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(num: BigInt, den: BigInt) -> Self {
        Rational(BigRational::new(num, den))
    }

    pub fn from_integer(n: BigInt) -> Self {
        Rational(BigRational::from_integer(n))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn inner(&self) -> &BigRational {
        &self.0
    }

    /// Exact conversion of a finite `f64` (every finite double is dyadic).
    pub fn from_f64_exact(x: f64) -> Option<Self> {
        BigRational::from_float(x).map(Rational)
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    /// `2^-e` for `e >= 0`.
    pub fn pow2_neg(e: u32) -> Self {
        Rational::new(BigInt::one(), BigInt::one() << e)
    }

    /// Round `self * 10^digits` half away from zero and return the integer.
    pub fn round_scaled(&self, digits: u32) -> BigInt {
        let scaled = &self.0 * BigRational::from_integer(BigInt::from(10u32).pow(digits));
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        let magnitude = (scaled.abs() + half).floor().to_integer();
        if scaled.is_negative() {
            -magnitude
        } else {
            magnitude
        }
    }

    /// Decimal rendering with `digits` places, rounded half away from zero.
    pub fn to_fixed(&self, digits: u32) -> String {
        let r = self.round_scaled(digits);
        let negative = r.sign() == Sign::Minus;
        let mut s = r.magnitude().to_string();
        let d = digits as usize;
        if d == 0 {
            return if negative { format!("-{s}") } else { s };
        }
        if s.len() <= d {
            s = "0".repeat(d + 1 - s.len()) + &s;
        }
        let (int, frac) = s.split_at(s.len() - d);
        format!("{}{int}.{frac}", if negative { "-" } else { "" })
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = NumericsError;

    /// Accepts `"a"` or `"a/b"` with decimal integers.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || NumericsError::Parse(s.to_string());
        let s = s.trim();
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s, "1"),
        };
        let num: BigInt = num.parse().map_err(|_| bad())?;
        let den: BigInt = den.parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        Ok(Rational::new(num, den))
    }
}

#[derive(Serialize, Deserialize)]
struct RationalRepr {
    num: String,
    den: String,
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        RationalRepr {
            num: self.0.numer().to_string(),
            den: self.0.denom().to_string(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = RationalRepr::deserialize(deserializer)?;
        let num: BigInt = repr.num.parse().map_err(D::Error::custom)?;
        let den: BigInt = repr.den.parse().map_err(D::Error::custom)?;
        if den.is_zero() {
            return Err(D::Error::custom("zero denominator"));
        }
        Ok(Rational::new(num, den))
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $assign_tr:ident, $assign_method:ident) => {
        impl $tr for Rational {
            type Output = Rational;
            #[inline]
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0.$method(rhs.0))
            }
        }
        impl<'a> $tr<&'a Rational> for &'a Rational {
            type Output = Rational;
            #[inline]
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }
        impl $assign_tr for Rational {
            #[inline]
            fn $assign_method(&mut self, rhs: Rational) {
                self.0.$assign_method(rhs.0);
            }
        }
    };
}

forward_binop!(Add, add, AddAssign, add_assign);
forward_binop!(Sub, sub, SubAssign, sub_assign);
forward_binop!(Mul, mul, MulAssign, mul_assign);

impl Div for Rational {
    type Output = Rational;
    fn div(self, rhs: Rational) -> Rational {
        Rational(self.0 / rhs.0)
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |a, b| a + b)
    }
}

impl Scalar for Rational {
    const BACKEND: Backend = Backend::Exact;

    fn zero() -> Self {
        Rational(BigRational::zero())
    }
    fn one() -> Self {
        Rational(BigRational::one())
    }
    fn from_u64(n: u64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(n)))
    }
    fn from_ratio(num: i64, den: u64) -> Self {
        Rational::new(BigInt::from(num), BigInt::from(den))
    }
    fn from_f64(x: f64) -> Self {
        Rational::from_f64_exact(x).expect("finite float")
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
    fn abs(&self) -> Self {
        Rational(self.0.abs())
    }
    fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    fn sum_compensated<I: IntoIterator<Item = Self>>(terms: I) -> Result<Self, NumericsError> {
        let mut acc = BigRational::zero();
        for x in terms {
            acc += x.0;
        }
        Ok(Rational(acc))
    }

    fn esp_row(probs: &[Self], weighted: bool) -> Option<(Vec<Self>, crate::esp::DpWork)> {
        Some(crate::esp::integer_dp(probs, weighted))
    }

    fn factorial(m: u64) -> Result<Self, NumericsError> {
        Ok(Rational::from_integer(factorial_big(m)))
    }
}

pub fn factorial_big(m: u64) -> BigInt {
    (2..=m).fold(BigUint::one(), |acc, k| acc * k).into()
}

/// Binomial coefficient as an exact integer.
pub fn binomial_big(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc.into()
}

/// Complex number over either backend.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Complex<S> {
    pub re: S,
    pub im: S,
}

impl<S: Scalar> Complex<S> {
    pub fn new(re: S, im: S) -> Self {
        Complex { re, im }
    }

    pub fn real(re: S) -> Self {
        Complex { re, im: S::zero() }
    }

    pub fn zero() -> Self {
        Complex::real(S::zero())
    }

    pub fn one() -> Self {
        Complex::real(S::one())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Complex::new(self.re.clone(), -self.im.clone())
    }

    /// `|z|^2 = re^2 + im^2`, computed in the same backend.
    pub fn norm_sqr(&self) -> S {
        self.re.square() + self.im.square()
    }

    pub fn scale(&self, s: &S) -> Self {
        Complex::new(self.re.clone() * s.clone(), self.im.clone() * s.clone())
    }
}

impl<S: Scalar> Add for Complex<S> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Complex::new(self.re + rhs.re, self.im + rhs.im)
    }
}

impl<S: Scalar> Sub for Complex<S> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Complex::new(self.re - rhs.re, self.im - rhs.im)
    }
}

impl<S: Scalar> Mul for Complex<S> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let re = self.re.clone() * rhs.re.clone() - self.im.clone() * rhs.im.clone();
        let im = self.re * rhs.im + self.im * rhs.re;
        Complex::new(re, im)
    }
}

impl<S: Scalar> Neg for Complex<S> {
    type Output = Self;
    fn neg(self) -> Self {
        Complex::new(-self.re, -self.im)
    }
}

/// Scalar as it appears in JSON files: a plain number or a `{"num","den"}` object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarRepr {
    Float(f64),
    Rational(Rational),
}

impl ScalarRepr {
    pub fn to_f64(&self) -> f64 {
        match self {
            ScalarRepr::Float(x) => *x,
            ScalarRepr::Rational(q) => q.to_f64(),
        }
    }

    pub fn to_rational(&self) -> Option<Rational> {
        match self {
            ScalarRepr::Float(_) => None,
            ScalarRepr::Rational(q) => Some(q.clone()),
        }
    }
}

/// Conversion of a scalar into its JSON form.
pub trait ToRepr {
    fn to_repr(&self) -> ScalarRepr;
}

impl ToRepr for f64 {
    fn to_repr(&self) -> ScalarRepr {
        ScalarRepr::Float(*self)
    }
}

impl ToRepr for Rational {
    fn to_repr(&self) -> ScalarRepr {
        ScalarRepr::Rational(self.clone())
    }
}
