//! Exact rational scalars and the special-function ratios the moment formulas
//! reduce to: Pochhammer symbols, factorials, binomials and gamma functions at
//! half-integer arguments.
//!
//! Every value is kept in lowest terms with a positive denominator; `rug`
//! canonicalizes after each operation.

use std::cmp::Ordering;
use std::fmt;
use std::iter::{Product, Sum};
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use rug::{Float, Integer, Rational};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Arbitrary-precision fraction in lowest terms.
///
/// Serializes as `"numerator/denominator"` in decimal, or just the numerator
/// when the denominator is one (`"-7/3876"`, `"1"`).
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExactRational(Rational);

impl ExactRational {
    pub fn zero() -> Self {
        Self(Rational::new())
    }

    pub fn one() -> Self {
        Self(Rational::from(1))
    }

    pub fn from_integer(n: impl Into<Integer>) -> Self {
        Self(Rational::from(n.into()))
    }

    /// `numerator / denominator`, reduced.
    pub fn new(numerator: impl Into<Integer>, denominator: impl Into<Integer>) -> Result<Self> {
        let den = denominator.into();
        if den == 0 {
            return Err(Error::DivisionByZero);
        }
        Ok(Self(Rational::from((numerator.into(), den))))
    }

    /// Convenience for small literal fractions. Panics on a zero denominator.
    pub fn frac(numerator: i64, denominator: i64) -> Self {
        Self::new(numerator, denominator).expect("zero denominator in literal fraction")
    }

    pub fn from_rational(r: Rational) -> Self {
        Self(r)
    }

    pub fn as_rational(&self) -> &Rational {
        &self.0
    }

    pub fn into_rational(self) -> Rational {
        self.0
    }

    pub fn numer(&self) -> &Integer {
        self.0.numer()
    }

    pub fn denom(&self) -> &Integer {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.cmp0() == Ordering::Equal
    }

    pub fn is_negative(&self) -> bool {
        self.0.cmp0() == Ordering::Less
    }

    pub fn is_positive(&self) -> bool {
        self.0.cmp0() == Ordering::Greater
    }

    pub fn is_integer(&self) -> bool {
        *self.0.denom() == 1
    }

    pub fn abs(&self) -> Self {
        Self(Rational::from(self.0.abs_ref()))
    }

    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self(Rational::from(self.0.recip_ref())))
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self> {
        if rhs.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self(Rational::from(&self.0 / &rhs.0)))
    }

    /// Integer power; negative exponents invert (and fail on zero).
    pub fn pow(&self, exp: i32) -> Result<Self> {
        use rug::ops::Pow;
        if exp < 0 && self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self(Rational::from((&self.0).pow(exp))))
    }

    /// Round to a binary float with `prec` bits of mantissa.
    pub fn to_float(&self, prec: u32) -> Float {
        Float::with_val(prec, &self.0)
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }

    /// Decimal rendering with `digits` significant digits.
    pub fn to_decimal(&self, digits: usize) -> String {
        let prec = crate::bigreal::bits_for_digits(digits as u32 + 10);
        crate::bigreal::format_sig(&self.to_float(prec), digits)
    }

    /// Parses `"p/q"`, an integer, or a decimal literal with optional exponent
    /// (`"0.5"`, `"1e-30"`, `"-2.5E3"`), all exactly.
    pub fn parse_literal(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.contains('/') {
            return s.parse();
        }
        let err = || Error::Parse {
            what: "rational literal",
            input: s.to_string(),
        };
        let (mantissa, exponent) = match s.find(['e', 'E']) {
            Some(pos) => {
                let exp: i32 = s[pos + 1..].parse().map_err(|_| err())?;
                (&s[..pos], exp)
            }
            None => (s, 0),
        };
        let (negative, mantissa) = match mantissa.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
        };
        let (int_part, frac_part) = match mantissa.split_once('.') {
            Some((i, f)) => (i, f),
            None => (mantissa, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(err());
        }
        if !int_part
            .chars()
            .chain(frac_part.chars())
            .all(|c| c.is_ascii_digit())
        {
            return Err(err());
        }
        let digits = format!("{int_part}{frac_part}");
        let mut value =
            Integer::from_str(if digits.is_empty() { "0" } else { &digits }).map_err(|_| err())?;
        if negative {
            value = -value;
        }
        let scale = exponent - frac_part.len() as i32;
        let ten = Self::from_integer(10);
        Ok(Self::from_integer(value) * ten.pow(scale)?)
    }
}

impl fmt::Display for ExactRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl FromStr for ExactRational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let err = || Error::Parse {
            what: "rational",
            input: s.to_string(),
        };
        let (num, den) = match s.trim().split_once('/') {
            Some((n, d)) => (n, d),
            None => (s.trim(), "1"),
        };
        let num = Integer::from_str(num).map_err(|_| err())?;
        let den = Integer::from_str(den).map_err(|_| err())?;
        if den.cmp0() != Ordering::Greater {
            return Err(err());
        }
        Self::new(num, den)
    }
}

impl Serialize for ExactRational {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ExactRational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl From<i64> for ExactRational {
    fn from(n: i64) -> Self {
        Self::from_integer(n)
    }
}

impl From<Integer> for ExactRational {
    fn from(n: Integer) -> Self {
        Self(Rational::from(n))
    }
}

impl From<Rational> for ExactRational {
    fn from(r: Rational) -> Self {
        Self(r)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $assign_trait:ident, $assign_method:ident, $op:tt, $aop:tt) => {
        impl $trait<&ExactRational> for &ExactRational {
            type Output = ExactRational;
            fn $method(self, rhs: &ExactRational) -> ExactRational {
                ExactRational(Rational::from(&self.0 $op &rhs.0))
            }
        }
        impl $trait<ExactRational> for ExactRational {
            type Output = ExactRational;
            fn $method(mut self, rhs: ExactRational) -> ExactRational {
                self.0 $aop rhs.0;
                self
            }
        }
        impl $trait<&ExactRational> for ExactRational {
            type Output = ExactRational;
            fn $method(mut self, rhs: &ExactRational) -> ExactRational {
                self.0 $aop &rhs.0;
                self
            }
        }
        impl $trait<ExactRational> for &ExactRational {
            type Output = ExactRational;
            fn $method(self, rhs: ExactRational) -> ExactRational {
                ExactRational(Rational::from(&self.0 $op &rhs.0))
            }
        }
        impl $assign_trait<&ExactRational> for ExactRational {
            fn $assign_method(&mut self, rhs: &ExactRational) {
                self.0 $aop &rhs.0;
            }
        }
        impl $assign_trait<ExactRational> for ExactRational {
            fn $assign_method(&mut self, rhs: ExactRational) {
                self.0 $aop rhs.0;
            }
        }
    };
}

forward_binop!(Add, add, AddAssign, add_assign, +, +=);
forward_binop!(Sub, sub, SubAssign, sub_assign, -, -=);
forward_binop!(Mul, mul, MulAssign, mul_assign, *, *=);

/// Panics on division by zero, like the integer operators; use
/// [`ExactRational::checked_div`] when the divisor is not known to be nonzero.
impl Div<&ExactRational> for &ExactRational {
    type Output = ExactRational;
    fn div(self, rhs: &ExactRational) -> ExactRational {
        self.checked_div(rhs)
            .expect("ExactRational division by zero")
    }
}

impl Div<ExactRational> for ExactRational {
    type Output = ExactRational;
    fn div(self, rhs: ExactRational) -> ExactRational {
        &self / &rhs
    }
}

impl Neg for ExactRational {
    type Output = ExactRational;
    fn neg(self) -> ExactRational {
        ExactRational(-self.0)
    }
}

impl Neg for &ExactRational {
    type Output = ExactRational;
    fn neg(self) -> ExactRational {
        ExactRational(Rational::from(-&self.0))
    }
}

impl Sum for ExactRational {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a ExactRational> for ExactRational {
    fn sum<I: Iterator<Item = &'a ExactRational>>(iter: I) -> Self {
        iter.fold(Self::zero(), |acc, x| acc + x)
    }
}

impl Product for ExactRational {
    fn product<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::one(), |acc, x| acc * x)
    }
}

/// The Dyson-index-like parameter, stored as the positive integer `2α`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HalfIntegerAlpha {
    two_alpha: u32,
}

impl HalfIntegerAlpha {
    pub const REBIT: Self = Self { two_alpha: 1 };
    pub const QUBIT: Self = Self { two_alpha: 2 };
    pub const QUATERBIT: Self = Self { two_alpha: 4 };

    pub fn new(two_alpha: u32) -> Result<Self> {
        if two_alpha == 0 {
            return Err(Error::InvalidAlpha("0".into()));
        }
        Ok(Self { two_alpha })
    }

    pub fn two_alpha(self) -> u32 {
        self.two_alpha
    }

    pub fn value(self) -> ExactRational {
        ExactRational::frac(self.two_alpha as i64, 2)
    }

    /// `α + i`.
    pub fn shifted(self, i: u32) -> Self {
        Self {
            two_alpha: self.two_alpha + 2 * i,
        }
    }

    /// The 70 values `1/2, 1, …, 35`.
    pub fn sweep() -> Vec<Self> {
        (1..=70).map(|k| Self { two_alpha: k }).collect()
    }

    /// Inclusive range `start:stop:step` of half-integers, e.g. `"0.5:35:0.5"`.
    pub fn parse_range(s: &str) -> Result<Vec<Self>> {
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [single] => single.split(',').map(str::parse).collect(),
            [start, stop] | [start, stop, _] => {
                let start: Self = start.parse()?;
                let stop: Self = stop.parse()?;
                let step = match parts.get(2) {
                    Some(step) => step.parse::<Self>()?.two_alpha,
                    None => 1,
                };
                Ok((start.two_alpha..=stop.two_alpha)
                    .step_by(step as usize)
                    .map(|k| Self { two_alpha: k })
                    .collect())
            }
            _ => Err(Error::InvalidAlpha(s.to_string())),
        }
    }
}

impl fmt::Display for HalfIntegerAlpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.two_alpha.is_multiple_of(2) {
            write!(f, "{}", self.two_alpha / 2)
        } else {
            write!(f, "{}.5", self.two_alpha / 2)
        }
    }
}

/// Accepts decimal halves (`"0.5"`, `"1"`, `"1.5"`) and `"p/2"` fractions.
impl FromStr for HalfIntegerAlpha {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let invalid = || Error::InvalidAlpha(s.to_string());
        let value = ExactRational::parse_literal(s).map_err(|_| invalid())?;
        let doubled = value * ExactRational::from_integer(2);
        if !doubled.is_integer() || !doubled.is_positive() {
            return Err(invalid());
        }
        let two_alpha = doubled.numer().to_u32().ok_or_else(invalid)?;
        Self::new(two_alpha)
    }
}

/// Γ(m/2) = `rational_part · π^(sqrt_pi_exponent/2)` with exponent 0 or 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GammaHalfValue {
    pub rational_part: ExactRational,
    pub sqrt_pi_exponent: u32,
}

pub fn factorial(n: u32) -> Integer {
    Integer::from(Integer::factorial(n))
}

pub fn binomial(n: u32, k: u32) -> Integer {
    if k > n {
        return Integer::new();
    }
    Integer::from(Integer::binomial_u(n, k))
}

/// Rising factorial `x (x+1) … (x+k-1)`; one for `k = 0`.
pub fn pochhammer(x: &ExactRational, k: u32) -> ExactRational {
    // Π (p + i q) / q^k keeps the product integral until the final reduction.
    let p = x.numer();
    let q = x.denom();
    let mut num = Integer::from(1);
    let mut term = p.clone();
    for _ in 0..k {
        num *= &term;
        if num.cmp0() == Ordering::Equal {
            return ExactRational::zero();
        }
        term += q;
    }
    let den = Integer::from(rug::ops::Pow::pow(q, k));
    ExactRational::from_rational(Rational::from((num, den)))
}

/// Γ(m/2) for a positive integer `m`.
pub fn gamma_half(m: u32) -> GammaHalfValue {
    assert!(m >= 1, "gamma_half requires m >= 1");
    if m.is_multiple_of(2) {
        GammaHalfValue {
            rational_part: ExactRational::from_integer(factorial(m / 2 - 1)),
            sqrt_pi_exponent: 0,
        }
    } else {
        // (m-2)!! / 2^((m-1)/2), with (-1)!! = 1
        let double_fact = if m >= 3 {
            Integer::from(Integer::factorial_2(m - 2))
        } else {
            Integer::from(1)
        };
        let two_pow = Integer::from(Integer::u_pow_u(2, (m - 1) / 2));
        GammaHalfValue {
            rational_part: ExactRational::from_rational(Rational::from((double_fact, two_pow))),
            sqrt_pi_exponent: 1,
        }
    }
}

/// `Π Γ(n_i/2) / Π Γ(d_j/2)` for doubled arguments; the √π factors must
/// cancel so that the ratio is rational.
pub fn gamma_ratio(numerators: &[u32], denominators: &[u32]) -> Result<ExactRational> {
    let mut num = ExactRational::one();
    let mut num_exp = 0;
    for &m in numerators {
        let g = gamma_half(m);
        num *= g.rational_part;
        num_exp += g.sqrt_pi_exponent;
    }
    let mut den = ExactRational::one();
    let mut den_exp = 0;
    for &m in denominators {
        let g = gamma_half(m);
        den *= g.rational_part;
        den_exp += g.sqrt_pi_exponent;
    }
    if num_exp != den_exp {
        return Err(Error::SqrtPiMismatch {
            numerator: num_exp,
            denominator: den_exp,
        });
    }
    num.checked_div(&den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> ExactRational {
        ExactRational::frac(n, d)
    }

    #[test]
    fn pochhammer_examples() {
        assert_eq!(pochhammer(&q(1, 2), 0), ExactRational::one());
        assert_eq!(pochhammer(&q(2, 1), 2), q(6, 1));
        // (17/2)(19/2)(21/2)(23/2) = 156009/16
        let direct = Integer::from(17 * 19 * 21 * 23);
        assert_eq!(direct, 156009);
        assert_eq!(pochhammer(&q(17, 2), 4), q(156009, 16));
    }

    #[test]
    fn pochhammer_hits_zero_for_nonpositive_integers() {
        assert!(pochhammer(&q(-3, 1), 4).is_zero());
        assert_eq!(pochhammer(&q(-3, 1), 3), q(-6, 1));
    }

    #[test]
    fn gamma_half_examples() {
        assert_eq!(
            gamma_half(2),
            GammaHalfValue {
                rational_part: q(1, 1),
                sqrt_pi_exponent: 0
            }
        );
        assert_eq!(
            gamma_half(1),
            GammaHalfValue {
                rational_part: q(1, 1),
                sqrt_pi_exponent: 1
            }
        );
        assert_eq!(
            gamma_half(7),
            GammaHalfValue {
                rational_part: q(15, 8),
                sqrt_pi_exponent: 1
            }
        );
    }

    #[test]
    fn gamma_half_recursion() {
        for m in 1..=200u32 {
            let lhs = gamma_half(m + 2);
            let rhs = gamma_half(m);
            assert_eq!(lhs.sqrt_pi_exponent, rhs.sqrt_pi_exponent);
            assert_eq!(
                lhs.rational_part,
                q(m as i64, 2) * rhs.rational_part,
                "m = {m}"
            );
        }
    }

    #[test]
    fn gamma_ratio_examples() {
        // 1/((11/2)(13/2)...(21/2)) via the Pochhammer route
        let via_poch = pochhammer(&q(11, 2), 6).recip().unwrap();
        assert_eq!(via_poch, q(64, 14549535));
        assert_eq!(gamma_ratio(&[11], &[23]).unwrap(), q(64, 14549535));
        assert_eq!(gamma_ratio(&[8], &[8]).unwrap(), ExactRational::one());
        assert_eq!(gamma_ratio(&[14], &[10, 4]).unwrap(), q(30, 1));
    }

    #[test]
    fn gamma_ratio_rejects_leftover_sqrt_pi() {
        assert!(matches!(
            gamma_ratio(&[3], &[4]),
            Err(Error::SqrtPiMismatch { .. })
        ));
    }

    #[test]
    fn gamma_ratio_identity() {
        for m in 1..=100 {
            assert_eq!(gamma_ratio(&[m], &[m]).unwrap(), ExactRational::one());
        }
    }

    #[test]
    fn division_by_zero_is_an_error() {
        assert!(matches!(
            q(1, 3).checked_div(&ExactRational::zero()),
            Err(Error::DivisionByZero)
        ));
        assert!(ExactRational::zero().recip().is_err());
        assert!(ExactRational::new(1, 0).is_err());
    }

    #[test]
    fn string_format() {
        assert_eq!(q(-14, 7752).to_string(), "-7/3876");
        assert_eq!(q(4, 4).to_string(), "1");
        assert_eq!("-7/3876".parse::<ExactRational>().unwrap(), q(-7, 3876));
        assert_eq!(
            "-14/7752".parse::<ExactRational>().unwrap().to_string(),
            "-7/3876"
        );
        assert!("1/0".parse::<ExactRational>().is_err());
        assert!("1/-2".parse::<ExactRational>().is_err());
        assert!("abc".parse::<ExactRational>().is_err());
    }

    #[test]
    fn literals() {
        assert_eq!(ExactRational::parse_literal("0.5").unwrap(), q(1, 2));
        assert_eq!(ExactRational::parse_literal("-2.5E3").unwrap(), q(-2500, 1));
        let eps = ExactRational::parse_literal("1e-30").unwrap();
        assert_eq!(eps.denom().to_string(), format!("1{}", "0".repeat(30)));
        assert!(ExactRational::parse_literal("1e").is_err());
        assert!(ExactRational::parse_literal(".").is_err());
    }

    #[test]
    fn alpha_grammar() {
        assert_eq!("0.5".parse::<HalfIntegerAlpha>().unwrap().two_alpha(), 1);
        assert_eq!("1".parse::<HalfIntegerAlpha>().unwrap().two_alpha(), 2);
        assert_eq!("1.5".parse::<HalfIntegerAlpha>().unwrap().two_alpha(), 3);
        assert_eq!("35".parse::<HalfIntegerAlpha>().unwrap().two_alpha(), 70);
        for bad in ["0.25", "0", "-1", "x", "1.75"] {
            assert!(bad.parse::<HalfIntegerAlpha>().is_err(), "{bad}");
        }
        assert_eq!(HalfIntegerAlpha::new(3).unwrap().to_string(), "1.5");
        assert_eq!(HalfIntegerAlpha::new(4).unwrap().to_string(), "2");
        let sweep = HalfIntegerAlpha::parse_range("0.5:35:0.5").unwrap();
        assert_eq!(sweep, HalfIntegerAlpha::sweep());
        assert_eq!(HalfIntegerAlpha::parse_range("1,2").unwrap().len(), 2);
    }

    proptest! {
        #[test]
        fn pochhammer_step(n in -50i64..50, d in 1i64..20, k in 0u32..100) {
            let x = q(n, d);
            let next = pochhammer(&x, k + 1);
            let expected = pochhammer(&x, k) * (x.clone() + ExactRational::from_integer(k));
            prop_assert_eq!(next, expected);
        }

        #[test]
        fn results_in_lowest_terms(a in -1000i64..1000, b in 1i64..1000, c in -1000i64..1000, d in 1i64..1000) {
            let x = q(a, b);
            let y = q(c, d);
            for r in [&x + &y, &x - &y, &x * &y] {
                let g = Integer::from(r.numer().gcd_ref(r.denom()));
                prop_assert!(g == 1);
                prop_assert!(r.denom().cmp0() == Ordering::Greater);
            }
        }

        #[test]
        fn display_parse_round_trip(a in any::<i64>(), b in 1i64..i64::MAX) {
            let x = q(a, b);
            prop_assert_eq!(x.to_string().parse::<ExactRational>().unwrap(), x);
        }
    }
}
