//! Numbers used throughout the crate.
//!
//! Everything the rules admit is computed with exact big rationals. The only
//! quantities that have no closed form (conditional Poisson working
//! probabilities) are carried as binary floats of configurable precision.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;
use dashu_int::IBig;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Default working precision of float mode, in bits.
pub const DEFAULT_PRECISION_BITS: usize = 128;

/// Absolute slack for comparisons that involve a float.
pub const FLOAT_SLACK: f64 = 1e-12;

type BinFloat = FBig<HalfEven, 2>;

fn to_ibig(x: &BigInt) -> IBig {
    IBig::from_le_bytes(&x.to_signed_bytes_le())
}

fn from_ibig(x: &IBig) -> BigInt {
    BigInt::from_signed_bytes_le(&x.to_le_bytes())
}

/// A binary floating-point number with an explicit precision in bits.
#[derive(Clone, Debug)]
pub struct HpFloat(BinFloat);

impl HpFloat {
    pub fn zero(bits: usize) -> Self {
        HpFloat(BinFloat::ZERO.with_precision(bits).value())
    }

    pub fn one(bits: usize) -> Self {
        HpFloat(BinFloat::ONE.with_precision(bits).value())
    }

    /// Rounds a rational to `bits` bits of precision.
    pub fn from_rational(r: &BigRational, bits: usize) -> Self {
        let num = BinFloat::from(to_ibig(r.numer())).with_precision(bits).value();
        let den = BinFloat::from(to_ibig(r.denom())).with_precision(bits).value();
        HpFloat(num / den)
    }

    pub fn from_f64(x: f64, bits: usize) -> Self {
        let r = BigRational::from_float(x).expect("finite f64");
        Self::from_rational(&r, bits)
    }

    pub fn precision(&self) -> usize {
        self.0.precision()
    }

    /// The exact dyadic rational this float represents.
    pub fn to_rational(&self) -> BigRational {
        let (sig, exp) = self.0.repr().clone().into_parts();
        let sig = from_ibig(&sig);
        if exp >= 0 {
            BigRational::from_integer(sig << (exp as usize))
        } else {
            BigRational::new(sig, BigInt::one() << ((-exp) as usize))
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().value()
    }

    pub fn floor(&self) -> Self {
        HpFloat(self.0.floor())
    }

    pub fn abs(&self) -> Self {
        if self.is_negative() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.repr().significand().is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0 < BinFloat::ZERO
    }

    pub fn with_precision(&self, bits: usize) -> Self {
        HpFloat(self.0.clone().with_precision(bits).value())
    }
}

impl PartialEq for HpFloat {
    fn eq(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}

impl PartialOrd for HpFloat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.partial_cmp(&other.0)
    }
}

macro_rules! hp_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&HpFloat> for &HpFloat {
            type Output = HpFloat;
            fn $method(self, rhs: &HpFloat) -> HpFloat {
                HpFloat(&self.0 $op &rhs.0)
            }
        }
        impl $trait for HpFloat {
            type Output = HpFloat;
            fn $method(self, rhs: HpFloat) -> HpFloat {
                HpFloat(self.0 $op rhs.0)
            }
        }
    };
}

hp_binop!(Add, add, +);
hp_binop!(Sub, sub, -);
hp_binop!(Mul, mul, *);
hp_binop!(Div, div, /);

impl Neg for HpFloat {
    type Output = HpFloat;
    fn neg(self) -> HpFloat {
        HpFloat(-self.0)
    }
}

/// Exact rational or high-precision float.
#[derive(Clone, Debug)]
pub enum Scalar {
    Exact(BigRational),
    Float(HpFloat),
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Exact(BigRational::zero())
    }

    pub fn one() -> Self {
        Scalar::Exact(BigRational::one())
    }

    pub fn from_int(n: i64) -> Self {
        Scalar::Exact(BigRational::from_integer(n.into()))
    }

    /// `num / den` as an exact rational. Panics if `den == 0`.
    pub fn ratio(num: i64, den: i64) -> Self {
        Scalar::Exact(BigRational::new(num.into(), den.into()))
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(r) => r.is_zero(),
            Scalar::Float(f) => f.is_zero(),
        }
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Scalar::Exact(r) => r.is_negative(),
            Scalar::Float(f) => f.is_negative(),
        }
    }

    pub fn is_positive(&self) -> bool {
        !self.is_zero() && !self.is_negative()
    }

    pub fn precision_bits(&self) -> Option<usize> {
        match self {
            Scalar::Exact(_) => None,
            Scalar::Float(f) => Some(f.precision()),
        }
    }

    pub fn as_exact(&self) -> Option<&BigRational> {
        match self {
            Scalar::Exact(r) => Some(r),
            Scalar::Float(_) => None,
        }
    }

    /// The exact value; for floats, the dyadic rational they represent.
    pub fn to_exact(&self) -> BigRational {
        match self {
            Scalar::Exact(r) => r.clone(),
            Scalar::Float(f) => f.to_rational(),
        }
    }

    pub fn to_float(&self, bits: usize) -> HpFloat {
        match self {
            Scalar::Exact(r) => HpFloat::from_rational(r, bits),
            Scalar::Float(f) => f.with_precision(bits),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(r) => rational_to_f64(r),
            Scalar::Float(f) => f.to_f64(),
        }
    }

    pub fn abs(&self) -> Self {
        match self {
            Scalar::Exact(r) => Scalar::Exact(r.abs()),
            Scalar::Float(f) => Scalar::Float(f.abs()),
        }
    }

    pub fn floor(&self) -> Self {
        match self {
            Scalar::Exact(r) => Scalar::Exact(r.floor()),
            Scalar::Float(f) => Scalar::Float(f.floor()),
        }
    }

    /// `self >= other`, exactly when both sides are exact and up to
    /// [`FLOAT_SLACK`] otherwise.
    pub fn ge_within_slack(&self, other: &Scalar) -> bool {
        self.ge_within(other, FLOAT_SLACK)
    }

    /// `self >= other`, exactly when both sides are exact and up to `slack`
    /// otherwise.
    pub fn ge_within(&self, other: &Scalar, slack: f64) -> bool {
        if self.is_exact() && other.is_exact() {
            self >= other
        } else {
            (self.clone() - other.clone()).to_f64() >= -slack
        }
    }

    pub fn le_within_slack(&self, other: &Scalar) -> bool {
        other.ge_within_slack(self)
    }

    fn promote(a: &Scalar, b: &Scalar) -> Option<(HpFloat, HpFloat)> {
        match (a, b) {
            (Scalar::Exact(_), Scalar::Exact(_)) => None,
            (Scalar::Float(x), Scalar::Float(y)) => Some((x.clone(), y.clone())),
            (Scalar::Exact(x), Scalar::Float(y)) => {
                Some((HpFloat::from_rational(x, y.precision()), y.clone()))
            }
            (Scalar::Float(x), Scalar::Exact(y)) => {
                Some((x.clone(), HpFloat::from_rational(y, x.precision())))
            }
        }
    }
}

impl From<BigRational> for Scalar {
    fn from(r: BigRational) -> Self {
        Scalar::Exact(r)
    }
}

impl From<HpFloat> for Scalar {
    fn from(f: HpFloat) -> Self {
        Scalar::Float(f)
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::from_int(n)
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        self.partial_cmp(other) == Some(Ordering::Equal)
    }
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a.partial_cmp(b),
            _ => {
                let (a, b) = Scalar::promote(self, other)?;
                a.partial_cmp(&b)
            }
        }
    }
}

macro_rules! scalar_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                match (self, rhs) {
                    (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a $op b),
                    _ => {
                        let (a, b) = Scalar::promote(self, rhs).expect("mixed operands");
                        Scalar::Float(a $op b)
                    }
                }
            }
        }
        impl $trait for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                match (self, rhs) {
                    (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a $op b),
                    (a, b) => (&a).$method(&b),
                }
            }
        }
        impl $trait<&Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                (&self).$method(rhs)
            }
        }
    };
}

scalar_binop!(Add, add, +);
scalar_binop!(Sub, sub, -);
scalar_binop!(Mul, mul, *);
scalar_binop!(Div, div, /);

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(-r),
            Scalar::Float(f) => Scalar::Float(-f),
        }
    }
}

impl Sum for Scalar {
    fn sum<I: Iterator<Item = Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Scalar> for Scalar {
    fn sum<I: Iterator<Item = &'a Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::zero(), |acc, x| acc + x)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(r) => write!(f, "{}", format_fraction(r)),
            Scalar::Float(x) => {
                let digits = (x.precision() as f64 * std::f64::consts::LOG10_2).ceil() as usize;
                write!(
                    f,
                    "{}@f{}",
                    format_scientific(&x.to_rational(), digits.max(1)),
                    x.precision()
                )
            }
        }
    }
}

impl FromStr for Scalar {
    type Err = Error;

    /// Accepts `a/b`, decimals such as `0.07` or `-1.5e-3`, and floats tagged
    /// with their precision such as `1.25e-1@f256`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((value, bits)) = s.split_once("@f") {
            let bits: usize = bits
                .parse()
                .map_err(|_| Error::parse(s, "bad precision tag"))?;
            if bits == 0 {
                return Err(Error::parse(s, "precision must be positive"));
            }
            let r = parse_rational(value)?;
            return Ok(Scalar::Float(HpFloat::from_rational(&r, bits)));
        }
        parse_rational(s).map(Scalar::Exact)
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct Visitor;

        impl de::Visitor<'_> for Visitor {
            type Value = Scalar;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an integer or an exact number written as a string")
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Scalar, E> {
                Ok(Scalar::from_int(v))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Scalar, E> {
                Ok(Scalar::Exact(BigRational::from_integer(v.into())))
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Scalar, E> {
                Err(E::custom(format!(
                    "fractional JSON number {v} is not exact; write it as a string"
                )))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Scalar, E> {
                v.parse().map_err(E::custom)
            }
        }

        deserializer.deserialize_any(Visitor)
    }
}

/// Parses `a/b`, an integer, or a decimal with optional exponent into an
/// exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::parse(s, "empty number"));
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| Error::parse(s, "bad numerator"))?;
        let d: BigInt = d.trim().parse().map_err(|_| Error::parse(s, "bad denominator"))?;
        if d.is_zero() {
            return Err(Error::parse(s, "zero denominator"));
        }
        return Ok(BigRational::new(n, d));
    }

    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let exp: i64 = s[pos + 1..]
                .parse()
                .map_err(|_| Error::parse(s, "bad exponent"))?;
            (&s[..pos], exp)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(Error::parse(s, "no digits"));
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(Error::parse(s, "not a number"));
    }
    let all: BigInt = format!("{int_part}{frac_part}0")
        .parse::<BigInt>()
        .expect("validated digits")
        / 10;
    let scale = exponent - frac_part.len() as i64;
    let ten = BigInt::from(10u32);
    let mut r = BigRational::from_integer(all);
    if scale >= 0 {
        r *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        r /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if negative { -r } else { r })
}

pub fn format_fraction(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Scientific notation with `digits` significant digits, rounded half up.
pub fn format_scientific(r: &BigRational, digits: usize) -> String {
    if r.is_zero() {
        return "0".to_string();
    }
    let sign = if r.is_negative() { "-" } else { "" };
    let x = r.abs();
    let ten = BigRational::from_integer(10.into());
    // Estimate the decimal exponent from bit lengths, then correct.
    let bits = x.numer().bits() as i64 - x.denom().bits() as i64;
    let mut exp = (bits as f64 * std::f64::consts::LOG10_2).floor() as i64;
    let pow10 = |e: i64| -> BigRational {
        if e >= 0 {
            num_traits::pow(ten.clone(), e as usize)
        } else {
            num_traits::pow(ten.clone(), (-e) as usize).recip()
        }
    };
    while x >= pow10(exp + 1) {
        exp += 1;
    }
    while x < pow10(exp) {
        exp -= 1;
    }
    let scaled = &x * pow10(digits as i64 - 1 - exp);
    let mut mantissa = (scaled + BigRational::new(1.into(), 2.into())).floor().to_integer();
    if mantissa >= num_traits::pow(BigInt::from(10u32), digits) {
        mantissa /= 10;
        exp += 1;
    }
    let m = mantissa.to_string();
    let (head, tail) = m.split_at(1);
    let tail = tail.trim_end_matches('0');
    if tail.is_empty() {
        format!("{sign}{head}e{exp}")
    } else {
        format!("{sign}{head}.{tail}e{exp}")
    }
}

/// Nearest f64; stays accurate when numerator and denominator overflow f64.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    let shift = r.numer().bits() as i64 - r.denom().bits() as i64;
    // Bring the ratio near 2^60 so both sides fit comfortably in f64.
    let adjust = 60 - shift;
    let scaled = if adjust >= 0 {
        (r.numer() << (adjust as usize)).div_floor(r.denom())
    } else {
        r.numer().div_floor(&(r.denom() << ((-adjust) as usize)))
    };
    scaled.to_f64().unwrap_or(f64::NAN) * 2f64.powi(-(adjust as i32))
}

/// `value` as an exact rational, failing on floats.
pub fn exact_or_err(value: &Scalar, what: &str) -> Result<BigRational> {
    value
        .as_exact()
        .cloned()
        .ok_or_else(|| Error::invalid(format!("{what} must be exact, got {value}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Scalar {
        s.parse().unwrap()
    }

    #[test]
    fn parses_exact_forms() {
        assert_eq!(q("0.07"), Scalar::ratio(7, 100));
        assert_eq!(q("-1.5e-3"), Scalar::ratio(-3, 2000));
        assert_eq!(q("3/6"), Scalar::ratio(1, 2));
        assert_eq!(q("380"), Scalar::from_int(380));
        assert_eq!(q(".5"), Scalar::ratio(1, 2));
        assert!("1/0".parse::<Scalar>().is_err());
        assert!("abc".parse::<Scalar>().is_err());
        assert!("".parse::<Scalar>().is_err());
    }

    #[test]
    fn exact_display_is_a_fraction() {
        assert_eq!(Scalar::ratio(1, 10).to_string(), "1/10");
        assert_eq!(Scalar::from_int(0).to_string(), "0");
    }

    #[test]
    fn float_round_trips_through_text() {
        let x = Scalar::Float(HpFloat::from_rational(&BigRational::new(1.into(), 3.into()), 256));
        let text = x.to_string();
        assert!(text.ends_with("@f256"), "{text}");
        let back: Scalar = text.parse().unwrap();
        assert_eq!(back.precision_bits(), Some(256));
        let diff = (back - x).abs().to_f64();
        assert!(diff < 1e-70, "{diff}");
    }

    #[test]
    fn float_precision_is_honored() {
        let third = BigRational::new(1.into(), 3.into());
        let lo = HpFloat::from_rational(&third, 64).to_rational();
        let hi = HpFloat::from_rational(&third, 256).to_rational();
        let err_lo = rational_to_f64(&(lo - &third).abs());
        let err_hi = rational_to_f64(&(hi - &third).abs());
        assert!(err_lo < 2f64.powi(-64) && err_lo > 0.0);
        assert!(err_hi < 2f64.powi(-256));
    }

    #[test]
    fn mixed_arithmetic_promotes_to_float() {
        let a = Scalar::ratio(1, 4);
        let b = Scalar::Float(HpFloat::from_f64(0.5, 128));
        let c = &a + &b;
        assert_eq!(c.precision_bits(), Some(128));
        assert_eq!(c, Scalar::ratio(3, 4));
        assert!(Scalar::ratio(1, 3) < b);
    }

    #[test]
    fn slack_applies_only_to_floats() {
        let a = Scalar::ratio(1, 2);
        let tiny = Scalar::Exact(BigRational::new(1.into(), BigInt::from(10u64).pow(15)));
        assert!(!(a.clone() - tiny.clone()).ge_within_slack(&a));
        let af = Scalar::Float(HpFloat::from_f64(0.5, 128));
        assert!((af - tiny).ge_within_slack(&a));
    }

    #[test]
    fn scientific_formatting() {
        let r = BigRational::new(1.into(), 3.into());
        assert_eq!(format_scientific(&r, 5), "3.3333e-1");
        assert_eq!(format_scientific(&BigRational::from_integer(100.into()), 3), "1e2");
        assert_eq!(format_scientific(&BigRational::new((-5).into(), 1000.into()), 2), "-5e-3");
    }

    #[test]
    fn huge_rationals_convert_to_f64() {
        let big = BigInt::from(10u32).pow(400);
        let r = BigRational::new(big.clone() * 3, big * 4);
        assert_eq!(rational_to_f64(&r), 0.75);
        let tiny = BigRational::new(1.into(), BigInt::from(10u32).pow(320));
        assert!(rational_to_f64(&tiny) > 0.0 || rational_to_f64(&tiny) == 0.0);
    }
}
