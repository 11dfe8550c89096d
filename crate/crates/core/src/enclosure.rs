//! Certified rational enclosures for the few irrational quantities the
//! crate has to report (norms and magnitudes). Endpoints are exact
//! rationals; an enclosure `[lo, hi]` is a guarantee, not an estimate.

use num::bigint::BigInt;
use num::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exactnum::{rational_pow, Rational, Scalar};

/// Default relative precision (in bits) for enclosure endpoints.
pub const DEFAULT_REL_BITS: u32 = 64;

/// A closed interval of rationals guaranteed to contain an exact real
/// quantity.
#[derive(Clone, Debug, PartialEq)]
pub struct Enclosure {
    pub lo: Rational,
    pub hi: Rational,
}

impl Enclosure {
    pub fn new(lo: Rational, hi: Rational) -> Self {
        debug_assert!(lo <= hi);
        Enclosure { lo, hi }
    }

    /// Degenerate enclosure of an exactly known value.
    pub fn point(v: Rational) -> Self {
        Enclosure {
            lo: v.clone(),
            hi: v,
        }
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, v: &Rational) -> bool {
        self.lo <= *v && *v <= self.hi
    }

    pub fn add(&self, other: &Enclosure) -> Enclosure {
        Enclosure {
            lo: &self.lo + &other.lo,
            hi: &self.hi + &other.hi,
        }
    }
}

fn pow2(bits: u32) -> Rational {
    Rational::from_integer(BigInt::one() << bits)
}

/// Exact n-th root when the radicand is a perfect n-th power.
pub fn try_exact_nth_root(r: &Rational, n: u32) -> Option<Rational> {
    if r.is_negative() {
        return None;
    }
    let num = r.numer().nth_root(n);
    let den = r.denom().nth_root(n);
    if &num.clone().pow(n) == r.numer() && &den.clone().pow(n) == r.denom() {
        Some(Rational::new_raw(num, den))
    } else {
        None
    }
}

/// Encloses `r^{1/n}` for `r >= 0` with relative width `2^-rel_bits`.
pub fn nth_root_enclosure(r: &Rational, n: u32, rel_bits: u32) -> Result<Enclosure> {
    if r.is_negative() {
        return Err(Error::NegativeRoot);
    }
    assert!(n >= 1, "root order must be positive");
    if r.is_zero() {
        return Ok(Enclosure::point(Rational::zero()));
    }
    if n == 1 {
        return Ok(Enclosure::point(r.clone()));
    }
    if let Some(v) = try_exact_nth_root(r, n) {
        return Ok(Enclosure::point(v));
    }
    let one = Rational::one();
    let (mut lo, mut hi) = if *r >= one {
        (one.clone(), r.clone())
    } else {
        (r.clone(), one.clone())
    };
    let scale = pow2(rel_bits);
    // bisection; monotone, so each step halves the width
    while (&hi - &lo) * &scale > hi {
        let mid = (&lo + &hi) / Rational::from_integer(BigInt::from(2));
        if rational_pow(&mid, n as i64).expect("positive base") <= *r {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Enclosure::new(lo, hi))
}

pub fn sqrt_enclosure(r: &Rational, rel_bits: u32) -> Result<Enclosure> {
    nth_root_enclosure(r, 2, rel_bits)
}

/// Encloses `r^{num/den}` for `r >= 0`.
pub fn pow_frac_enclosure(r: &Rational, num: u64, den: u32, rel_bits: u32) -> Result<Enclosure> {
    let powed = rational_pow(r, num as i64)?;
    nth_root_enclosure(&powed, den, rel_bits)
}

/// Encloses `|s|` (the true modulus, not its square).
pub fn abs_enclosure(s: &Scalar, rel_bits: u32) -> Enclosure {
    sqrt_enclosure(&s.abs_sq(), rel_bits).expect("squared magnitude is nonnegative")
}

/// A rational `u` with `1 < u <= |s|`; requires `|s| > 1`.
pub fn abs_lower_above_one(s: &Scalar) -> Result<Rational> {
    let s2 = s.abs_sq();
    if s2 <= Rational::one() {
        return Err(Error::BaseNotExpanding {
            got: crate::exactnum::rational_to_string(&s2),
        });
    }
    let mut bits = 32;
    loop {
        let e = sqrt_enclosure(&s2, bits)?;
        if e.lo > Rational::one() {
            return Ok(e.lo);
        }
        bits *= 2;
    }
}
