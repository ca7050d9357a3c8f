//! Scalar fields used for lengths, positions and cocycle values.
//!
//! Three implementations are provided: [`f64`] for long orbit simulations,
//! [`Rational`] (arbitrary precision) for exact renormalization, and
//! [`QuadSqrt5`] for exact arithmetic in the quadratic field containing the
//! golden ratio.

use std::cmp::Ordering;
use std::fmt::{self, Debug, Display};
use std::hash::Hash;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Arbitrary precision rational number.
pub type Rational = BigRational;

/// Default tolerance for float-mode equality and domain checks.
pub const DEFAULT_FLOAT_TOL: f64 = 1e-12;

/// Arithmetic mode of a scalar type.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Rational,
    Float,
    Quadratic,
}

impl Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Mode::Rational => "rational",
            Mode::Float => "float",
            Mode::Quadratic => "quadratic",
        };
        f.write_str(s)
    }
}

/// Running sum; compensated for floats, plain for exact types.
pub trait Accumulator<S>: Clone + Default + Send {
    fn add(&mut self, v: &S);
    fn value(&self) -> S;
}

/// Ordered field used throughout the crate.
pub trait Scalar:
    Clone
    + Debug
    + Display
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    type Acc: Accumulator<Self>;

    const MODE: Mode;
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn from_bigint(v: &BigInt) -> Self;
    fn from_rational(r: &Rational) -> Self;
    /// Exact for rational types (the binary value of the float), identity for floats.
    fn from_f64(v: f64) -> Self;
    fn to_f64(&self) -> f64;
    /// Exact textual form ("num/den" for rationals, shortest round-trip for floats).
    fn to_exact_string(&self) -> String;
    /// Parses a literal of this type; exact types accept "num/den" and decimals.
    fn parse_literal(s: &str) -> Result<Self> {
        parse_rational(s).map(|r| Self::from_rational(&r))
    }

    /// The value as an exact rational, when it is one (never for floats).
    fn as_rational(&self) -> Option<Rational> {
        None
    }

    fn is_zero(&self) -> bool {
        *self == Self::zero()
    }
    fn is_negative(&self) -> bool {
        *self < Self::zero()
    }
    fn abs(&self) -> Self {
        if self.is_negative() {
            -self.clone()
        } else {
            self.clone()
        }
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_rational(&Rational::new(BigInt::from(num), BigInt::from(den)))
    }
    /// Equality test used for induction decisions: exact for exact types,
    /// `|a - b| < tol * scale` for floats.
    fn near(&self, other: &Self, scale: &Self, tol: f64) -> bool {
        if Self::EXACT {
            self == other
        } else {
            (self.to_f64() - other.to_f64()).abs() < tol * scale.to_f64().abs()
        }
    }
    fn max_of<'a>(a: &'a Self, b: &'a Self) -> &'a Self {
        if a >= b {
            a
        } else {
            b
        }
    }
    fn min_of<'a>(a: &'a Self, b: &'a Self) -> &'a Self {
        if a <= b {
            a
        } else {
            b
        }
    }
}

/// Parses "num/den", integers, decimals and scientific literals into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty scalar literal".into()));
    }
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|e| Error::Parse(format!("{s}: {e}")))?;
        let d = BigInt::from_str(d.trim()).map_err(|e| Error::Parse(format!("{s}: {e}")))?;
        if d.is_zero() {
            return Err(Error::Parse(format!("{s}: zero denominator")));
        }
        return Ok(Rational::new(n, d));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let e: i64 = s[pos + 1..]
                .parse()
                .map_err(|e| Error::Parse(format!("{s}: {e}")))?;
            (&s[..pos], e)
        }
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(Error::Parse(format!("{s}: no digits")));
    }
    if !int_part
        .chars()
        .chain(frac_part.chars())
        .all(|c| c.is_ascii_digit())
    {
        return Err(Error::Parse(format!("{s}: not a number")));
    }
    let all = format!("{int_part}{frac_part}");
    let num = BigInt::from_str(if all.is_empty() { "0" } else { &all })
        .map_err(|e| Error::Parse(format!("{s}: {e}")))?;
    let scale = exponent - frac_part.len() as i64;
    let ten = BigInt::from(10u32);
    let mut r = if scale >= 0 {
        Rational::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(num, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        r = -r;
    }
    Ok(r)
}

/// Parses a scalar literal for the given scalar type.
pub fn parse_scalar<S: Scalar>(s: &str) -> Result<S> {
    S::parse_literal(s)
}

/// Correctly scaled conversion that survives huge numerators and denominators.
pub fn rational_to_f64(r: &Rational) -> f64 {
    if let Some(v) = ToPrimitive::to_f64(r) {
        if v.is_finite() && (v != 0.0 || Zero::is_zero(r)) {
            return v;
        }
    }
    let n_bits = r.numer().bits() as i64;
    let d_bits = r.denom().bits() as i64;
    let shift = 60 - (n_bits - d_bits);
    let scaled = if shift >= 0 {
        (r.numer() << shift as usize) / r.denom()
    } else {
        r.numer() / (r.denom() << (-shift) as usize)
    };
    scaled.to_f64().unwrap_or(0.0) * 2f64.powi(-shift as i32)
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Accumulator<f64> for Neumaier {
    #[inline]
    fn add(&mut self, v: &f64) {
        let v = *v;
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }
    #[inline]
    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Clone, Debug)]
pub struct ExactSum<S>(S);

impl<S: Scalar> Default for ExactSum<S> {
    fn default() -> Self {
        ExactSum(S::zero())
    }
}

impl<S: Scalar> Accumulator<S> for ExactSum<S> {
    fn add(&mut self, v: &S) {
        self.0 = self.0.clone() + v.clone();
    }
    fn value(&self) -> S {
        self.0.clone()
    }
}

impl Scalar for f64 {
    type Acc = Neumaier;
    const MODE: Mode = Mode::Float;
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn from_bigint(v: &BigInt) -> Self {
        rational_to_f64(&Rational::from_integer(v.clone()))
    }
    fn from_rational(r: &Rational) -> Self {
        rational_to_f64(r)
    }
    fn from_f64(v: f64) -> Self {
        v
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn to_exact_string(&self) -> String {
        format!("{self:?}")
    }
    fn parse_literal(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.contains('/') {
            return parse_rational(t).map(|r| rational_to_f64(&r));
        }
        t.parse::<f64>()
            .map_err(|e| Error::Parse(format!("{s}: {e}")))
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
}

impl Scalar for Rational {
    type Acc = ExactSum<Rational>;
    const MODE: Mode = Mode::Rational;
    const EXACT: bool = true;

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_i64(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }
    fn from_bigint(v: &BigInt) -> Self {
        Rational::from_integer(v.clone())
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn from_f64(v: f64) -> Self {
        <Rational as FromPrimitive>::from_f64(v).expect("finite float")
    }
    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }
    fn to_exact_string(&self) -> String {
        format!("{}/{}", self.numer(), self.denom())
    }
    fn as_rational(&self) -> Option<Rational> {
        Some(self.clone())
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
}

/// Element `a + b·√5` of the quadratic field Q(√5).
///
/// Used for the golden-ratio IET, whose Rauzy orbit is periodic and cannot be
/// followed for long in floating point.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QuadSqrt5 {
    a: Rational,
    b: Rational,
}

impl QuadSqrt5 {
    pub fn new(a: Rational, b: Rational) -> Self {
        QuadSqrt5 { a, b }
    }
    /// The golden ratio (1 + √5)/2.
    pub fn phi() -> Self {
        let half = Rational::new(BigInt::one(), BigInt::from(2));
        QuadSqrt5::new(half.clone(), half)
    }
    pub fn rational_part(&self) -> &Rational {
        &self.a
    }
    pub fn surd_part(&self) -> &Rational {
        &self.b
    }
    fn conj(&self) -> Self {
        QuadSqrt5::new(self.a.clone(), -self.b.clone())
    }
    /// Field norm a² − 5b².
    fn norm(&self) -> Rational {
        &self.a * &self.a - Rational::from_integer(BigInt::from(5)) * &self.b * &self.b
    }
    fn sign(&self) -> Ordering {
        let sa = self.a.numer().sign();
        let sb = self.b.numer().sign();
        match (sa, sb) {
            (Sign::NoSign, s) | (s, Sign::NoSign) => sign_to_ordering(s),
            (x, y) if x == y => sign_to_ordering(x),
            (Sign::Plus, Sign::Minus) => self.norm().cmp(&<Rational as Zero>::zero()),
            _ => <Rational as Zero>::zero().cmp(&self.norm()),
        }
    }
}

fn sign_to_ordering(s: Sign) -> Ordering {
    match s {
        Sign::Minus => Ordering::Less,
        Sign::NoSign => Ordering::Equal,
        Sign::Plus => Ordering::Greater,
    }
}

impl PartialOrd for QuadSqrt5 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QuadSqrt5 {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.clone() - other.clone()).sign()
    }
}

impl Debug for QuadSqrt5 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Display::fmt(self, f)
    }
}

impl Display for QuadSqrt5 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if Zero::is_zero(&self.b) {
            return write!(f, "{}", self.a);
        }
        if Signed::is_negative(&self.b) {
            write!(f, "{}-{}*sqrt5", self.a, -self.b.clone())
        } else {
            write!(f, "{}+{}*sqrt5", self.a, self.b)
        }
    }
}

impl Add for QuadSqrt5 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        QuadSqrt5::new(self.a + o.a, self.b + o.b)
    }
}

impl Sub for QuadSqrt5 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        QuadSqrt5::new(self.a - o.a, self.b - o.b)
    }
}

impl Mul for QuadSqrt5 {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let five = Rational::from_integer(BigInt::from(5));
        QuadSqrt5::new(
            &self.a * &o.a + five * &self.b * &o.b,
            &self.a * &o.b + &self.b * &o.a,
        )
    }
}

impl Div for QuadSqrt5 {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let n = o.norm();
        assert!(!Zero::is_zero(&n), "division by zero in Q(sqrt5)");
        let p = self * o.conj();
        QuadSqrt5::new(p.a / &n, p.b / n)
    }
}

impl Neg for QuadSqrt5 {
    type Output = Self;
    fn neg(self) -> Self {
        QuadSqrt5::new(-self.a, -self.b)
    }
}

impl Scalar for QuadSqrt5 {
    type Acc = ExactSum<QuadSqrt5>;
    const MODE: Mode = Mode::Quadratic;
    const EXACT: bool = true;

    fn zero() -> Self {
        QuadSqrt5::new(<Rational as Zero>::zero(), <Rational as Zero>::zero())
    }
    fn one() -> Self {
        QuadSqrt5::new(<Rational as One>::one(), <Rational as Zero>::zero())
    }
    fn from_i64(v: i64) -> Self {
        QuadSqrt5::new(
            Rational::from_integer(BigInt::from(v)),
            <Rational as Zero>::zero(),
        )
    }
    fn from_bigint(v: &BigInt) -> Self {
        QuadSqrt5::new(
            Rational::from_integer(v.clone()),
            <Rational as Zero>::zero(),
        )
    }
    fn from_rational(r: &Rational) -> Self {
        QuadSqrt5::new(r.clone(), <Rational as Zero>::zero())
    }
    fn from_f64(v: f64) -> Self {
        QuadSqrt5::new(
            <Rational as FromPrimitive>::from_f64(v).expect("finite float"),
            <Rational as Zero>::zero(),
        )
    }
    fn to_f64(&self) -> f64 {
        let s5 = 5f64.sqrt();
        let a = rational_to_f64(&self.a);
        let b = rational_to_f64(&self.b);
        if a.signum() == b.signum() || a == 0.0 || b == 0.0 {
            a + b * s5
        } else {
            // a + b√5 = norm / (a − b√5); avoids cancellation.
            rational_to_f64(&self.norm()) / (a - b * s5)
        }
    }
    fn to_exact_string(&self) -> String {
        format!("{}", self)
    }
    fn as_rational(&self) -> Option<Rational> {
        Zero::is_zero(&self.b).then(|| self.a.clone())
    }
    /// Accepts "a", "a+b*sqrt5", "a-b*sqrt5" with rational `a`, `b`.
    fn parse_literal(s: &str) -> Result<Self> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let Some(body) = t.strip_suffix("*sqrt5") else {
            return parse_rational(&t).map(|r| QuadSqrt5::from_rational(&r));
        };
        let split = body
            .char_indices()
            .skip(1)
            .filter(|&(i, c)| {
                (c == '+' || c == '-') && !matches!(body.as_bytes()[i - 1], b'e' | b'E')
            })
            .map(|(i, _)| i)
            .last();
        let (a, b) = match split {
            Some(i) => (parse_rational(&body[..i])?, parse_rational(&body[i..])?),
            None => (<Rational as Zero>::zero(), parse_rational(body)?),
        };
        Ok(QuadSqrt5::new(a, b))
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(&self.a) && Zero::is_zero(&self.b)
    }
    fn is_negative(&self) -> bool {
        self.sign() == Ordering::Less
    }
}

/// Serde helper: exact types as their exact string, floats as JSON numbers.
pub fn ser_exact<S: Scalar, Z: serde::Serializer>(
    v: &S,
    z: Z,
) -> std::result::Result<Z::Ok, Z::Error> {
    if S::EXACT {
        z.serialize_str(&v.to_exact_string())
    } else {
        z.serialize_f64(v.to_f64())
    }
}

pub fn ser_exact_vec<S: Scalar, Z: serde::Serializer>(
    v: &[S],
    z: Z,
) -> std::result::Result<Z::Ok, Z::Error> {
    use serde::ser::SerializeSeq;
    struct One<'a, S>(&'a S);
    impl<S: Scalar> Serialize for One<'_, S> {
        fn serialize<Z: serde::Serializer>(&self, z: Z) -> std::result::Result<Z::Ok, Z::Error> {
            ser_exact(self.0, z)
        }
    }
    let mut seq = z.serialize_seq(Some(v.len()))?;
    for x in v {
        seq.serialize_element(&One(x))?;
    }
    seq.end()
}

/// Continued-fraction expansion of a positive rational, truncated at `max_terms`.
pub fn continued_fraction(r: &Rational, max_terms: usize) -> Vec<BigInt> {
    let mut out = Vec::new();
    let mut n = r.numer().clone();
    let mut d = r.denom().clone();
    while !d.is_zero() && out.len() < max_terms {
        let (q, rem) = n.div_mod_floor(&d);
        out.push(q);
        n = d;
        d = rem;
    }
    out
}

/// Partial quotients of a float, stopping once the remainder is within `tol`.
pub fn continued_fraction_f64(mut v: f64, max_terms: usize, tol: f64) -> Vec<i64> {
    let mut out = Vec::new();
    for _ in 0..max_terms {
        let q = v.floor();
        out.push(q as i64);
        let frac = v - q;
        if frac.abs() < tol {
            break;
        }
        v = 1.0 / frac;
        if !v.is_finite() || v > 1e15 {
            break;
        }
    }
    out
}
