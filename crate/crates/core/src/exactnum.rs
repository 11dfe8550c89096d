//! Exact scalar arithmetic: arbitrary-precision rationals, complex
//! rationals, triangular-sum exponents and magnitude comparisons.
//!
//! Everything here stays inside the rationals. Magnitudes are compared
//! through their squares so that complex moduli never force a square
//! root.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::Pow;
use num::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational number, always in canonical form
/// (positive denominator, reduced).
pub type Rational = BigRational;

/// Rational from an integer literal.
pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Rational `num/den` from integer literals. Panics on a zero denominator.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Renders a rational as `p` or `p/q`.
pub fn rational_to_string(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `p` or `p/q` with an optional leading sign.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    let err = |reason| Error::ParseScalar {
        token: s.to_string(),
        reason,
    };
    if t.is_empty() {
        return Err(err("empty token"));
    }
    let (num_str, den_str) = match t.split_once('/') {
        Some((n, d)) => (n, d),
        None => (t, "1"),
    };
    let num: BigInt = num_str.parse().map_err(|_| err("invalid integer"))?;
    let den: BigInt = den_str.parse().map_err(|_| err("invalid denominator"))?;
    if den.is_zero() {
        return Err(err("zero denominator"));
    }
    Ok(Rational::new(num, den))
}

/// Exact integer power of a rational; `0^0 := 1`, zero to a negative
/// power is an error.
pub fn rational_pow(r: &Rational, e: i64) -> Result<Rational> {
    if e == 0 {
        return Ok(Rational::one());
    }
    if r.is_zero() {
        if e < 0 {
            return Err(Error::ZeroToNegativePower);
        }
        return Ok(Rational::zero());
    }
    let mag = e.unsigned_abs();
    let num = Pow::pow(r.numer(), mag);
    let den = Pow::pow(r.denom(), mag);
    // powers of a canonical fraction stay canonical
    let p = Rational::new_raw(num, den);
    Ok(if e < 0 { p.recip() } else { p })
}

/// `gcd(x, base^e)` with the exponent capped at `bits(x)`: any prime
/// power dividing `x` has exponent below that, so the cap loses nothing
/// and keeps the power small when `x` is small.
fn gcd_with_power(x: &BigInt, base: &BigInt, e: u64) -> BigInt {
    use num::Integer;
    if base.is_one() {
        return BigInt::one();
    }
    let cap = e.min(x.bits().max(1));
    let p = Pow::pow(base, cap);
    // one division brings x down to p's size; the binary gcd then runs
    // on small operands
    let r = x.mod_floor(&p);
    if r.is_zero() {
        p
    } else {
        r.gcd(&p)
    }
}

/// Canonical product `w^e * s` for canonical rationals, with all gcd
/// work confined to small operands. `w`'s numerator and denominator are
/// coprime, so the only cancellations in
/// `(top^|e| * num(s)) / (bot^|e| * den(s))` run between `s`'s parts and
/// the weight powers.
pub fn rational_pow_times(w: &Rational, e: i64, s: &Rational) -> Result<Rational> {
    if e == 0 || s.is_zero() {
        return Ok(s.clone());
    }
    if w.is_zero() {
        return if e < 0 {
            Err(Error::ZeroToNegativePower)
        } else {
            Ok(Rational::zero())
        };
    }
    let mag = e.unsigned_abs();
    let (top, bot) = if e > 0 {
        (w.numer(), w.denom())
    } else {
        (w.denom(), w.numer())
    };
    let negate = w.numer().is_negative() && mag % 2 == 1;
    let top_abs = top.abs();
    let bot_abs = bot.abs();
    let a = s.numer();
    let b = s.denom();
    let ga = gcd_with_power(&a.abs(), &bot_abs, mag); // cancels num(s) against bot^e
    let gb = gcd_with_power(b, &top_abs, mag); // cancels den(s) against top^e
    let num = (Pow::pow(&top_abs, mag) / &gb) * (a / &ga);
    let den = (Pow::pow(&bot_abs, mag) / &ga) * (b / &gb);
    Ok(Rational::new_raw(if negate { -num } else { num }, den))
}

/// A scalar of the ground field: a rational or a complex rational.
///
/// A `Complex` value with zero imaginary part compares equal to the
/// corresponding `Real` value.
#[derive(Clone, Debug)]
pub enum Scalar {
    Real(Rational),
    Complex { re: Rational, im: Rational },
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        self.re() == other.re() && self.im() == other.im()
    }
}

impl Eq for Scalar {}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Real(Rational::zero())
    }

    pub fn one() -> Self {
        Scalar::Real(Rational::one())
    }

    pub fn from_int(n: i64) -> Self {
        Scalar::Real(rat_int(n))
    }

    pub fn from_rational(r: Rational) -> Self {
        Scalar::Real(r)
    }

    pub fn complex(re: Rational, im: Rational) -> Self {
        Scalar::Complex { re, im }
    }

    /// The imaginary unit.
    pub fn i() -> Self {
        Scalar::Complex {
            re: Rational::zero(),
            im: Rational::one(),
        }
    }

    pub fn re(&self) -> Rational {
        match self {
            Scalar::Real(r) => r.clone(),
            Scalar::Complex { re, .. } => re.clone(),
        }
    }

    pub fn im(&self) -> Rational {
        match self {
            Scalar::Real(_) => Rational::zero(),
            Scalar::Complex { im, .. } => im.clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Real(r) => r.is_zero(),
            Scalar::Complex { re, im } => re.is_zero() && im.is_zero(),
        }
    }

    /// True when the value lies in the real field (imaginary part zero).
    pub fn is_real_valued(&self) -> bool {
        match self {
            Scalar::Real(_) => true,
            Scalar::Complex { im, .. } => im.is_zero(),
        }
    }

    /// `|s|^2 = re^2 + im^2`, always an exact rational.
    pub fn abs_sq(&self) -> Rational {
        match self {
            Scalar::Real(r) => r * r,
            Scalar::Complex { re, im } => re * re + im * im,
        }
    }

    pub fn conj(&self) -> Scalar {
        match self {
            Scalar::Real(r) => Scalar::Real(r.clone()),
            Scalar::Complex { re, im } => Scalar::Complex {
                re: re.clone(),
                im: -im,
            },
        }
    }

    /// Exact multiplicative inverse.
    pub fn recip(&self) -> Result<Scalar> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        match self {
            Scalar::Real(r) => Ok(Scalar::Real(r.recip())),
            s => {
                let d = s.abs_sq();
                let c = s.conj();
                Ok(Scalar::Complex {
                    re: c.re() / &d,
                    im: c.im() / &d,
                })
            }
        }
    }

    pub fn div(&self, other: &Scalar) -> Result<Scalar> {
        Ok(self * &other.recip()?)
    }

    /// Exact integer power with the convention `0^0 := 1`.
    pub fn pow(&self, e: i64) -> Result<Scalar> {
        if e == 0 {
            return Ok(Scalar::one());
        }
        if self.is_zero() {
            if e < 0 {
                return Err(Error::ZeroToNegativePower);
            }
            return Ok(Scalar::zero());
        }
        if let Scalar::Real(r) = self {
            return Ok(Scalar::Real(rational_pow(r, e)?));
        }
        let mut base = self.clone();
        let mut mag = e.unsigned_abs();
        let mut acc = Scalar::one();
        while mag > 0 {
            if mag & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            mag >>= 1;
        }
        if e < 0 {
            acc.recip()
        } else {
            Ok(acc)
        }
    }

    /// Parses the scalar text format: real `p/q` or `p`; complex
    /// `p/q+r/si` with either part omitted when zero (e.g. `-1i`,
    /// `1/2+1/2i`, `2-1/3i`).
    pub fn parse(s: &str) -> Result<Scalar> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let err = |reason| Error::ParseScalar {
            token: s.to_string(),
            reason,
        };
        if t.is_empty() {
            return Err(err("empty token"));
        }
        if !t.ends_with('i') {
            return Ok(Scalar::Real(parse_rational(&t)?));
        }
        let body = &t[..t.len() - 1];
        // split at the last sign that follows a digit: that sign starts
        // the imaginary part
        let split = body
            .char_indices()
            .rev()
            .find(|&(idx, c)| {
                (c == '+' || c == '-')
                    && idx > 0
                    && body[..idx].chars().next_back().is_some_and(|p| p.is_ascii_digit())
            })
            .map(|(idx, _)| idx);
        let (re_str, im_str) = match split {
            Some(idx) => (&body[..idx], &body[idx..]),
            None => ("", body),
        };
        let re = if re_str.is_empty() {
            Rational::zero()
        } else {
            parse_rational(re_str)?
        };
        let im = match im_str {
            "" | "+" => Rational::one(),
            "-" => -Rational::one(),
            _ => parse_rational(im_str)?,
        };
        Ok(Scalar::Complex { re, im })
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let re = self.re();
        let im = self.im();
        if im.is_zero() {
            return write!(f, "{}", rational_to_string(&re));
        }
        if re.is_zero() {
            return write!(f, "{}i", rational_to_string(&im));
        }
        let sign = if im.is_negative() { "-" } else { "+" };
        write!(
            f,
            "{}{}{}i",
            rational_to_string(&re),
            sign,
            rational_to_string(&im.abs())
        )
    }
}

fn parts(s: &Scalar) -> (Rational, Rational) {
    (s.re(), s.im())
}

impl Add for &Scalar {
    type Output = Scalar;
    fn add(self, rhs: &Scalar) -> Scalar {
        match (self, rhs) {
            (Scalar::Real(a), Scalar::Real(b)) => Scalar::Real(a + b),
            _ => {
                let (ar, ai) = parts(self);
                let (br, bi) = parts(rhs);
                Scalar::Complex {
                    re: ar + br,
                    im: ai + bi,
                }
            }
        }
    }
}

impl Sub for &Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &Scalar) -> Scalar {
        self + &(-rhs)
    }
}

impl Mul for &Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        match (self, rhs) {
            (Scalar::Real(a), Scalar::Real(b)) => Scalar::Real(a * b),
            _ => {
                let (ar, ai) = parts(self);
                let (br, bi) = parts(rhs);
                Scalar::Complex {
                    re: &ar * &br - &ai * &bi,
                    im: &ar * &bi + &ai * &br,
                }
            }
        }
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Real(r) => Scalar::Real(-r),
            Scalar::Complex { re, im } => Scalar::Complex { re: -re, im: -im },
        }
    }
}

/// The triangular range `lo + (lo+1) + ... + hi`; `hi = lo-1` encodes
/// the empty sum.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TriSum {
    lo: u64,
    hi: u64,
}

impl TriSum {
    pub fn new(lo: u64, hi: u64) -> Result<Self> {
        if lo == 0 || hi + 1 < lo {
            return Err(Error::MalformedRange { lo, hi });
        }
        Ok(TriSum { lo, hi })
    }

    pub fn lo(&self) -> u64 {
        self.lo
    }

    pub fn hi(&self) -> u64 {
        self.hi
    }

    pub fn is_empty(&self) -> bool {
        self.hi + 1 == self.lo
    }

    /// `(hi(hi+1) - (lo-1)lo) / 2`, exactly.
    pub fn value(&self) -> Result<u64> {
        let hi = self.hi as u128;
        let lo = self.lo as u128;
        let v = (hi * (hi + 1) - (lo - 1) * lo) / 2;
        u64::try_from(v).map_err(|_| Error::RangeTooLarge {
            lo: self.lo,
            hi: self.hi,
        })
    }
}

/// The exponent sum `Σ_{t=lo}^{hi} t`. Empty (`hi = lo-1`) yields 0.
pub fn trisum(lo: u64, hi: u64) -> Result<u64> {
    TriSum::new(lo, hi)?.value()
}

/// Exact power of a scalar (identical to [`Scalar::pow`]).
pub fn scalar_pow(s: &Scalar, e: i64) -> Result<Scalar> {
    s.pow(e)
}

/// Squared magnitude of a scalar (identical to [`Scalar::abs_sq`]).
pub fn abs_sq(s: &Scalar) -> Rational {
    s.abs_sq()
}

/// Decides `|w|^exponent >= threshold` exactly, with `|w|` given through
/// its squared magnitude (`base_abs_sq > 1` required). A nonpositive
/// threshold is trivially dominated.
pub fn log_mag_lower_bound(
    base_abs_sq: &Rational,
    exponent: i64,
    threshold: &Rational,
) -> Result<bool> {
    if *base_abs_sq <= Rational::one() {
        return Err(Error::BaseNotExpanding {
            got: rational_to_string(base_abs_sq),
        });
    }
    if threshold.is_zero() || threshold.is_negative() {
        return Ok(true);
    }
    // |w|^E >= c  <=>  (|w|^2)^E >= c^2  for c > 0
    let lhs = rational_pow(base_abs_sq, exponent)?;
    Ok(lhs >= threshold * threshold)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn trisum_examples() {
        assert_eq!(trisum(1, 3).unwrap(), 6);
        assert_eq!(trisum(5, 4).unwrap(), 0); // empty sum
        assert_eq!(trisum(2, 4).unwrap(), 9);
    }

    #[test]
    fn trisum_rejects_malformed_ranges() {
        assert!(trisum(0, 3).is_err());
        assert!(trisum(4, 2).is_err());
    }

    #[test]
    fn scalar_pow_examples() {
        let two = Scalar::from_int(2);
        assert_eq!(two.pow(-3).unwrap(), Scalar::from_rational(rat(1, 8)));
        assert_eq!(Scalar::zero().pow(0).unwrap(), Scalar::one());
        assert_eq!(Scalar::i().pow(2).unwrap(), Scalar::from_int(-1));
        assert!(Scalar::zero().pow(-1).is_err());
    }

    #[test]
    fn abs_sq_examples() {
        assert_eq!(Scalar::from_rational(rat(3, 2)).abs_sq(), rat(9, 4));
        assert_eq!(Scalar::complex(rat_int(1), rat_int(1)).abs_sq(), rat_int(2));
        assert_eq!(Scalar::zero().abs_sq(), rat_int(0));
    }

    #[test]
    fn log_mag_examples() {
        assert!(log_mag_lower_bound(&rat_int(4), 3, &rat_int(8)).unwrap());
        assert!(!log_mag_lower_bound(&rat_int(4), 2, &rat_int(5)).unwrap());
        assert!(log_mag_lower_bound(&rat(9, 4), 2, &rat_int(2)).unwrap());
        assert!(log_mag_lower_bound(&rat_int(4), -1, &rat_int(0)).unwrap());
        assert!(log_mag_lower_bound(&rat_int(1), 2, &rat_int(2)).is_err());
    }

    #[test]
    fn mixed_real_complex_equality() {
        let a = Scalar::from_rational(rat(3, 2));
        let b = Scalar::complex(rat(3, 2), rat_int(0));
        assert_eq!(a, b);
        assert_eq!(&a * &Scalar::i(), &b * &Scalar::i());
    }

    #[test]
    fn parse_and_display_round_trip_examples() {
        for text in ["2", "3/2", "1/2+1/2i", "-1i", "2-1/3i", "0"] {
            let s = Scalar::parse(text).unwrap();
            assert_eq!(s.to_string(), text);
        }
        assert_eq!(Scalar::parse("-5/3").unwrap(), Scalar::from_rational(rat(-5, 3)));
        assert_eq!(Scalar::parse("i").unwrap(), Scalar::i());
        assert!(Scalar::parse("1.5").is_err());
        assert!(Scalar::parse("2/0").is_err());
        assert!(Scalar::parse("").is_err());
    }

    fn arb_rational() -> impl Strategy<Value = Rational> {
        (-40i64..40, 1i64..20).prop_map(|(n, d)| rat(n, d))
    }

    fn arb_scalar() -> impl Strategy<Value = Scalar> {
        prop_oneof![
            arb_rational().prop_map(Scalar::from_rational),
            (arb_rational(), arb_rational()).prop_map(|(re, im)| Scalar::complex(re, im)),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn trisum_split_identity(lo in 1u64..60, len in 0u64..60) {
            let hi = lo + len;
            let whole = trisum(1, hi).unwrap();
            let head = trisum(1, lo - 1).unwrap();
            prop_assert_eq!(trisum(lo, hi).unwrap(), whole - head);
        }

        #[test]
        fn scalar_pow_is_additive(s in arb_scalar(), a in -6i64..6, b in -6i64..6) {
            prop_assume!(!s.is_zero() || (a >= 0 && b >= 0));
            let lhs = s.pow(a + b).unwrap();
            let rhs = &s.pow(a).unwrap() * &s.pow(b).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn abs_sq_is_multiplicative(s in arb_scalar(), t in arb_scalar()) {
            prop_assert_eq!((&s * &t).abs_sq(), s.abs_sq() * t.abs_sq());
        }

        #[test]
        fn display_parse_round_trip(s in arb_scalar()) {
            let round = Scalar::parse(&s.to_string()).unwrap();
            prop_assert_eq!(round, s);
        }

        #[test]
        fn pow_times_matches_naive_product(
            wn in -20i64..20, wd in 1i64..20, e in -30i64..30,
            sn in -50i64..50, sd in 1i64..20,
        ) {
            prop_assume!(wn != 0);
            let w = rat(wn, wd);
            let s = rat(sn, sd);
            let fast = rational_pow_times(&w, e, &s).unwrap();
            let naive = rational_pow(&w, e).unwrap() * &s;
            prop_assert_eq!(&fast, &naive);
            // canonical: parts coprime, denominator positive
            use num::Integer;
            prop_assert!(fast.numer().gcd(fast.denom()).is_one() || fast.numer().is_zero());
            prop_assert!(fast.denom() > &BigInt::from(0));
        }
    }
}
