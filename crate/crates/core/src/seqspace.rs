//! Sequence-space model: the spaces `l_p` (1 <= p < oo) and `c_0`,
//! finite-support sequences, closed-form infinite sequences carrying
//! decay certificates, and certified norm computation.
//!
//! Norms that are exactly rational are reported exactly (possibly as an
//! exact p-th power); everything else is reported as a certified
//! enclosure. No floating point anywhere.

use std::fmt;
use std::sync::Arc;

use num::{One, Signed, Zero};
use serde::Serialize;

use crate::enclosure::{
    nth_root_enclosure, pow_frac_enclosure, sqrt_enclosure, try_exact_nth_root, Enclosure,
    DEFAULT_REL_BITS,
};
use crate::error::{Error, Result};
use crate::exactnum::{rational_pow, rational_to_string, trisum, Rational, Scalar};

/// The ambient Banach space: `l_p` with `p >= 1`, or `c_0` under the
/// supremum norm.
#[derive(Clone, Debug, PartialEq)]
pub enum Space {
    Lp(Rational),
    C0,
}

impl Space {
    /// `l_p` with validated exponent.
    pub fn lp(p: Rational) -> Result<Space> {
        if p < Rational::one() {
            return Err(Error::InvalidExponent {
                got: rational_to_string(&p),
            });
        }
        if *p.numer() > 1_000_000.into() || *p.denom() > 10_000.into() {
            return Err(Error::InvalidExponent {
                got: rational_to_string(&p),
            });
        }
        Ok(Space::Lp(p))
    }

    pub fn l1() -> Space {
        Space::Lp(Rational::one())
    }

    pub fn l2() -> Space {
        Space::Lp(crate::exactnum::rat_int(2))
    }

    pub fn c0() -> Space {
        Space::C0
    }

    pub fn label(&self) -> String {
        match self {
            Space::Lp(p) => format!("lp({})", rational_to_string(p)),
            Space::C0 => "c0".to_string(),
        }
    }

    /// `p = a/b` as machine integers. Panics on an exponent that did not
    /// come through [`Space::lp`].
    fn p_parts(&self) -> Option<(u64, u32)> {
        match self {
            Space::C0 => None,
            Space::Lp(p) => {
                let a = u64::try_from(p.numer().clone()).expect("lp exponent validated");
                let b = u32::try_from(p.denom().clone()).expect("lp exponent validated");
                Some((a, b))
            }
        }
    }
}

/// An eventually-zero sequence stored as its finite prefix, indexed from
/// 1 and kept canonical (no trailing zeros).
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct FiniteSequence {
    entries: Vec<Scalar>,
}

impl FiniteSequence {
    pub fn new(mut entries: Vec<Scalar>) -> Self {
        while entries.last().is_some_and(Scalar::is_zero) {
            entries.pop();
        }
        FiniteSequence { entries }
    }

    pub fn zero() -> Self {
        FiniteSequence { entries: Vec::new() }
    }

    /// The standard basis vector `e_k` (`k >= 1`).
    pub fn unit(k: u64) -> Self {
        assert!(k >= 1, "basis vectors are indexed from 1");
        let mut entries = vec![Scalar::zero(); (k - 1) as usize];
        entries.push(Scalar::one());
        FiniteSequence { entries }
    }

    /// Parses a comma-separated list of scalar texts, e.g. `"1,0,3"`.
    pub fn parse_list(s: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for token in s.split(',') {
            entries.push(Scalar::parse(token)?);
        }
        Ok(FiniteSequence::new(entries))
    }

    pub fn entries(&self) -> &[Scalar] {
        &self.entries
    }

    pub fn entry_strings(&self) -> Vec<String> {
        self.entries.iter().map(|s| s.to_string()).collect()
    }

    /// Entry at 1-based index `k`; zero beyond the stored prefix.
    pub fn entry(&self, k: u64) -> Scalar {
        assert!(k >= 1, "sequences are indexed from 1");
        self.entries
            .get((k - 1) as usize)
            .cloned()
            .unwrap_or_else(Scalar::zero)
    }

    /// Index of the last nonzero entry (0 for the zero sequence).
    pub fn support(&self) -> u64 {
        self.entries.len() as u64
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn all_real(&self) -> bool {
        self.entries.iter().all(Scalar::is_real_valued)
    }

    pub fn max_abs_sq(&self) -> Rational {
        let mut m = Rational::zero();
        for s in &self.entries {
            let a = s.abs_sq();
            if a > m {
                m = a;
            }
        }
        m
    }

    pub fn add(&self, other: &FiniteSequence) -> FiniteSequence {
        let len = self.entries.len().max(other.entries.len());
        let mut out = Vec::with_capacity(len);
        for k in 1..=len as u64 {
            out.push(&self.entry(k) + &other.entry(k));
        }
        FiniteSequence::new(out)
    }

    pub fn sub(&self, other: &FiniteSequence) -> FiniteSequence {
        let len = self.entries.len().max(other.entries.len());
        let mut out = Vec::with_capacity(len);
        for k in 1..=len as u64 {
            out.push(&self.entry(k) - &other.entry(k));
        }
        FiniteSequence::new(out)
    }

    pub fn scale(&self, c: &Scalar) -> FiniteSequence {
        FiniteSequence::new(self.entries.iter().map(|s| c * s).collect())
    }

    pub fn to_closed_form(&self, weight_abs_sq: Rational) -> Result<ClosedFormSequence> {
        ClosedFormSequence::from_finite(self, weight_abs_sq)
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Repr {
            kind: &'static str,
            entries: Vec<String>,
        }
        serde_json::to_string(&Repr {
            kind: "finite",
            entries: self.entry_strings(),
        })
        .expect("serializable")
    }
}

/// Triangular decay certificate: for every `k >= start`,
/// `|x_k| <= C * beta^k * |w|^{-T(1,k-1)}`, stored through the squares
/// `C^2` and `beta^2` so everything stays rational.
#[derive(Clone, Debug, PartialEq)]
pub struct DecayCert {
    c2: Rational,
    beta2: Rational,
    start: u64,
}

impl DecayCert {
    pub fn new(c2: Rational, beta2: Rational, start: u64) -> Result<Self> {
        if c2.is_negative() {
            return Err(Error::InvalidCertificate { reason: "C^2 < 0" });
        }
        if beta2.is_negative() {
            return Err(Error::InvalidCertificate {
                reason: "beta^2 < 0",
            });
        }
        if start == 0 {
            return Err(Error::InvalidCertificate { reason: "start = 0" });
        }
        Ok(DecayCert { c2, beta2, start })
    }

    /// Certificate of the zero sequence.
    pub fn zero() -> Self {
        DecayCert {
            c2: Rational::zero(),
            beta2: Rational::zero(),
            start: 1,
        }
    }

    pub fn c2(&self) -> &Rational {
        &self.c2
    }

    pub fn beta2(&self) -> &Rational {
        &self.beta2
    }

    pub fn start(&self) -> u64 {
        self.start
    }

    /// Certificate for `c * x` given `|c|^2`; `C^2` picks up the factor.
    pub fn scale(&self, factor_abs_sq: &Rational) -> Result<DecayCert> {
        if factor_abs_sq.is_negative() {
            return Err(Error::NegativeValue {
                what: "scaling factor |c|^2",
            });
        }
        Ok(DecayCert {
            c2: &self.c2 * factor_abs_sq,
            beta2: self.beta2.clone(),
            start: self.start,
        })
    }

    /// Certificate valid for the sum (or difference) of two certified
    /// sequences: `C = C_1 + C_2`, `beta = max`, `start = max`.
    pub fn combine_sum(&self, other: &DecayCert, rel_bits: u32) -> DecayCert {
        let c_hi =
            sqrt_enclosure(&self.c2, rel_bits).expect("C^2 >= 0").hi
                + sqrt_enclosure(&other.c2, rel_bits).expect("C^2 >= 0").hi;
        DecayCert {
            c2: &c_hi * &c_hi,
            beta2: self.beta2.clone().max(other.beta2.clone()),
            start: self.start.max(other.start),
        }
    }

    /// Squared certificate bound at index `k`:
    /// `C^2 * (beta^2)^k * (|w|^2)^{-T(1,k-1)}`.
    pub fn bound_sq_at(&self, k: u64, weight_abs_sq: &Rational) -> Rational {
        assert!(k >= 1);
        if self.c2.is_zero() {
            return Rational::zero();
        }
        let bk = rational_pow(&self.beta2, k as i64).expect("nonnegative base");
        if bk.is_zero() {
            return Rational::zero();
        }
        let t = trisum(1, k - 1).expect("valid range") as i64;
        let wt = rational_pow(weight_abs_sq, -t).expect("expanding weight");
        &self.c2 * bk * wt
    }
}

/// Certificate scaling, exposed as a free function mirroring the other
/// certificate operations.
pub fn cert_scale(cert: &DecayCert, factor_abs_sq: &Rational) -> Result<DecayCert> {
    cert.scale(factor_abs_sq)
}

type TermRule = Arc<dyn Fn(u64) -> Scalar + Send + Sync>;

/// An infinite sequence given by a pure term rule together with a decay
/// certificate relative to a fixed weight `|w|^2 > 1`.
#[derive(Clone)]
pub struct ClosedFormSequence {
    term: TermRule,
    cert: DecayCert,
    weight_abs_sq: Rational,
}

impl fmt::Debug for ClosedFormSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ClosedFormSequence")
            .field("cert", &self.cert)
            .field("weight_abs_sq", &rational_to_string(&self.weight_abs_sq))
            .finish_non_exhaustive()
    }
}

impl ClosedFormSequence {
    pub fn new(term: TermRule, cert: DecayCert, weight_abs_sq: Rational) -> Result<Self> {
        if weight_abs_sq <= Rational::one() {
            return Err(Error::WeightNotExpanding {
                abs_sq: rational_to_string(&weight_abs_sq),
            });
        }
        Ok(ClosedFormSequence {
            term,
            cert,
            weight_abs_sq,
        })
    }

    /// Wraps a finite sequence; beyond its support the certificate is the
    /// zero bound.
    pub fn from_finite(x: &FiniteSequence, weight_abs_sq: Rational) -> Result<Self> {
        let entries: Vec<Scalar> = x.entries().to_vec();
        let cert = DecayCert::new(Rational::zero(), Rational::zero(), x.support() + 1)?;
        ClosedFormSequence::new(
            Arc::new(move |k: u64| {
                entries
                    .get((k - 1) as usize)
                    .cloned()
                    .unwrap_or_else(Scalar::zero)
            }),
            cert,
            weight_abs_sq,
        )
    }

    pub fn term(&self, k: u64) -> Scalar {
        assert!(k >= 1, "sequences are indexed from 1");
        (self.term)(k)
    }

    pub fn prefix(&self, first: u64) -> Vec<Scalar> {
        (1..=first).map(|k| self.term(k)).collect()
    }

    pub fn cert(&self) -> &DecayCert {
        &self.cert
    }

    pub fn weight_abs_sq(&self) -> &Rational {
        &self.weight_abs_sq
    }

    pub fn term_rule(&self) -> TermRule {
        Arc::clone(&self.term)
    }

    /// Identical object (same term rule, certificate and weight).
    pub fn same_instance(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.term, &other.term)
            && self.cert == other.cert
            && self.weight_abs_sq == other.weight_abs_sq
    }

    /// Termwise difference with the combined certificate.
    pub fn difference(&self, other: &Self) -> Result<ClosedFormSequence> {
        if self.weight_abs_sq != other.weight_abs_sq {
            return Err(Error::CertWeightMismatch {
                cert: rational_to_string(&other.weight_abs_sq),
                op: rational_to_string(&self.weight_abs_sq),
            });
        }
        let a = Arc::clone(&self.term);
        let b = Arc::clone(&other.term);
        ClosedFormSequence::new(
            Arc::new(move |k: u64| &a(k) - &b(k)),
            self.cert.combine_sum(&other.cert, 96),
            self.weight_abs_sq.clone(),
        )
    }

    /// Termwise scaling by a fixed scalar.
    pub fn scale(&self, c: &Scalar) -> ClosedFormSequence {
        let inner = Arc::clone(&self.term);
        let c = c.clone();
        let cert = self.cert.scale(&c.abs_sq()).expect("|c|^2 >= 0");
        ClosedFormSequence {
            term: Arc::new(move |k: u64| &c * &inner(k)),
            cert,
            weight_abs_sq: self.weight_abs_sq.clone(),
        }
    }

    pub fn to_json(&self, first: u64) -> String {
        #[derive(Serialize)]
        struct CertRepr {
            #[serde(rename = "C2")]
            c2: String,
            beta2: String,
            start: u64,
        }
        #[derive(Serialize)]
        struct Repr {
            kind: &'static str,
            first: Vec<String>,
            cert: CertRepr,
        }
        serde_json::to_string(&Repr {
            kind: "closed-form",
            first: self.prefix(first).iter().map(|s| s.to_string()).collect(),
            cert: CertRepr {
                c2: rational_to_string(&self.cert.c2),
                beta2: rational_to_string(&self.cert.beta2),
                start: self.cert.start,
            },
        })
        .expect("serializable")
    }
}

/// A computed norm: exact, exact as a p-th power, or a certified
/// enclosure.
#[derive(Clone, Debug, PartialEq)]
pub enum NormValue {
    /// The norm itself, exactly.
    Exact(Rational),
    /// `value = ||x||^p` exactly, for an integer `p >= 1`.
    Power { p: u64, value: Rational },
    /// Certified enclosure of the norm.
    Enclosure(Enclosure),
}

impl NormValue {
    pub fn enclosure(&self, rel_bits: u32) -> Enclosure {
        match self {
            NormValue::Exact(v) => Enclosure::point(v.clone()),
            NormValue::Power { p, value } => {
                nth_root_enclosure(value, *p as u32, rel_bits).expect("norm power >= 0")
            }
            NormValue::Enclosure(e) => e.clone(),
        }
    }

    pub fn lo(&self, rel_bits: u32) -> Rational {
        self.enclosure(rel_bits).lo
    }

    pub fn hi(&self, rel_bits: u32) -> Rational {
        self.enclosure(rel_bits).hi
    }

    /// Sound one-sided comparison: `true` implies the norm is `<= bound`.
    pub fn certifies_le(&self, bound: &Rational) -> bool {
        match self {
            NormValue::Exact(v) => v <= bound,
            NormValue::Power { p, value } => {
                !bound.is_negative()
                    && *value <= rational_pow(bound, *p as i64).expect("nonnegative bound")
            }
            NormValue::Enclosure(e) => e.hi <= *bound,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            NormValue::Exact(v) => v.is_zero(),
            NormValue::Power { value, .. } => value.is_zero(),
            NormValue::Enclosure(e) => e.hi.is_zero(),
        }
    }
}

fn upgrade_power(p: u64, value: Rational) -> NormValue {
    if p == 1 {
        return NormValue::Exact(value);
    }
    match try_exact_nth_root(&value, p as u32) {
        Some(v) => NormValue::Exact(v),
        None => NormValue::Power { p, value },
    }
}

/// Running sum of p-th powers, exact for as long as possible.
enum Acc {
    Exact(Rational),
    Interval(Rational, Rational),
}

impl Acc {
    fn new() -> Self {
        Acc::Exact(Rational::zero())
    }

    fn add_exact(&mut self, v: Rational) {
        match self {
            Acc::Exact(s) => *s += v,
            Acc::Interval(lo, hi) => {
                *lo += &v;
                *hi += v;
            }
        }
    }

    fn add_interval(&mut self, elo: Rational, ehi: Rational) {
        match self {
            Acc::Exact(s) => *self = Acc::Interval(&*s + elo, &*s + ehi),
            Acc::Interval(lo, hi) => {
                *lo += elo;
                *hi += ehi;
            }
        }
    }

    fn bounds(self) -> (Rational, Rational, bool) {
        match self {
            Acc::Exact(s) => (s.clone(), s, true),
            Acc::Interval(lo, hi) => (lo, hi, false),
        }
    }
}

/// Adds `|s|^p` (`p = a/b`) to the accumulator, exactly when exactness
/// is available.
fn add_term_pow(acc: &mut Acc, s: &Scalar, a: u64, b: u32, rel_bits: u32) {
    if s.is_zero() {
        return;
    }
    if b == 1 && a % 2 == 0 {
        let v = rational_pow(&s.abs_sq(), (a / 2) as i64).expect("nonnegative");
        acc.add_exact(v);
    } else if b == 1 && s.is_real_valued() {
        let v = rational_pow(&s.re().abs(), a as i64).expect("nonnegative");
        acc.add_exact(v);
    } else {
        // |s|^{a/b} = (|s|^2)^{a/(2b)}
        let e = pow_frac_enclosure(&s.abs_sq(), a, 2 * b, rel_bits).expect("nonnegative");
        acc.add_interval(e.lo, e.hi);
    }
}

fn ceil_log2(n: u64) -> u32 {
    64 - n.max(1).leading_zeros() as u32
}

/// Norm of a finite sequence. Exact rationals and exact norm powers are
/// preferred; the general case is a certified enclosure of relative
/// width `2^-rel_bits`.
pub fn norm_finite(x: &FiniteSequence, sp: &Space) -> NormValue {
    norm_finite_bits(x, sp, DEFAULT_REL_BITS)
}

pub fn norm_finite_bits(x: &FiniteSequence, sp: &Space, rel_bits: u32) -> NormValue {
    if x.is_zero() {
        return NormValue::Exact(Rational::zero());
    }
    match sp {
        Space::C0 => {
            if x.all_real() {
                let mut sup = Rational::zero();
                for s in x.entries() {
                    let a = s.re().abs();
                    if a > sup {
                        sup = a;
                    }
                }
                NormValue::Exact(sup)
            } else {
                upgrade_power(2, x.max_abs_sq())
            }
        }
        Space::Lp(_) => {
            let (a, b) = sp.p_parts().expect("lp");
            let bits = rel_bits + 16 + ceil_log2(x.support() + 1);
            let mut acc = Acc::new();
            for s in x.entries() {
                add_term_pow(&mut acc, s, a, b, bits);
            }
            let (lo_p, hi_p, exact) = acc.bounds();
            if exact && b == 1 {
                return upgrade_power(a, lo_p);
            }
            // ||x|| = S^{1/p} = S^{b/a}
            let lo = pow_frac_enclosure(&lo_p, b as u64, a as u32, bits)
                .expect("nonnegative")
                .lo;
            let hi = pow_frac_enclosure(&hi_p, b as u64, a as u32, bits)
                .expect("nonnegative")
                .hi;
            NormValue::Enclosure(Enclosure::new(lo, hi))
        }
    }
}

/// Certified enclosure of the norm of a closed-form sequence.
///
/// The head is summed over `k <= K*` where `K* >= max(K, cert.start)` is
/// the first index from which consecutive certificate bounds shrink by a
/// factor of at least 2; the tail beyond `K*` is then dominated by a
/// geometric series. The certificate is verified exactly on every index
/// the head touches; a violated bound reports the failing index.
pub fn norm_closed_form(x: &ClosedFormSequence, sp: &Space, k: u64) -> Result<Enclosure> {
    norm_closed_form_bits(x, sp, k, DEFAULT_REL_BITS)
}

pub fn norm_closed_form_bits(
    x: &ClosedFormSequence,
    sp: &Space,
    k: u64,
    rel_bits: u32,
) -> Result<Enclosure> {
    let w2 = x.weight_abs_sq().clone();
    let cert = x.cert().clone();

    // K*: domination index (ratio beta*|w|^{-k} <= 1/2 from K* on)
    let mut kstar = k.max(cert.start()).max(1);
    let four_beta2 = crate::exactnum::rat_int(4) * cert.beta2();
    let mut w2k = rational_pow(&w2, kstar as i64)?;
    while four_beta2 > w2k {
        kstar += 1;
        w2k *= &w2;
    }

    // exact certificate check on the touched prefix
    {
        let start = cert.start();
        let mut pw = rational_pow(&w2, trisum(1, start - 1)? as i64)?; // (|w|^2)^{T(1,k-1)}
        let mut step = rational_pow(&w2, (start - 1) as i64)?; // (|w|^2)^{k-1}
        let mut bk = rational_pow(cert.beta2(), start as i64)?; // (beta^2)^k
        for idx in start..=kstar {
            if x.term(idx).abs_sq() * &pw > cert.c2() * &bk {
                return Err(Error::CertViolation { index: idx });
            }
            step *= &w2;
            pw = &pw * &step;
            bk *= cert.beta2();
        }
    }

    let tail_sq = cert.bound_sq_at(kstar + 1, &w2);
    let bits = rel_bits + 16 + ceil_log2(kstar + 1);

    match sp {
        Space::C0 => {
            let mut all_real = true;
            let mut sup = Rational::zero();
            let mut msq = Rational::zero();
            for idx in 1..=kstar {
                let t = x.term(idx);
                if !t.is_real_valued() {
                    all_real = false;
                }
                let a2 = t.abs_sq();
                if a2 > msq {
                    msq = a2;
                }
                if all_real {
                    let a = t.re().abs();
                    if a > sup {
                        sup = a;
                    }
                }
            }
            if all_real {
                let hi_sq_tail = sqrt_enclosure(&tail_sq, bits)?.hi;
                let hi = if hi_sq_tail > sup { hi_sq_tail } else { sup.clone() };
                Ok(Enclosure::new(sup, hi))
            } else {
                let lo = sqrt_enclosure(&msq, bits)?.lo;
                let m = if tail_sq > msq { tail_sq } else { msq };
                let hi = sqrt_enclosure(&m, bits)?.hi;
                Ok(Enclosure::new(lo, hi))
            }
        }
        Space::Lp(_) => {
            let (a, b) = sp.p_parts().expect("lp");
            let mut acc = Acc::new();
            for idx in 1..=kstar {
                add_term_pow(&mut acc, &x.term(idx), a, b, bits);
            }
            // sum_{j > K*} bound_j^p <= bound_{K*+1}^p / (1 - 2^{-p}) <= 2 * bound_{K*+1}^p
            let tail_p_hi = if tail_sq.is_zero() {
                Rational::zero()
            } else {
                crate::exactnum::rat_int(2) * pow_frac_enclosure(&tail_sq, a, 2 * b, bits)?.hi
            };
            let (lo_p, hi_p, _) = acc.bounds();
            let hi_p = hi_p + tail_p_hi;
            let lo = pow_frac_enclosure(&lo_p, b as u64, a as u32, bits)?.lo;
            let hi = pow_frac_enclosure(&hi_p, b as u64, a as u32, bits)?.hi;
            Ok(Enclosure::new(lo, hi))
        }
    }
}

/// Exact-where-possible distance between finite sequences.
pub fn distance_finite(x: &FiniteSequence, y: &FiniteSequence, sp: &Space) -> NormValue {
    norm_finite(&x.sub(y), sp)
}

/// Certified distance between closed-form sequences sharing a weight.
pub fn distance_closed(
    x: &ClosedFormSequence,
    y: &ClosedFormSequence,
    sp: &Space,
    k: u64,
) -> Result<Enclosure> {
    if x.same_instance(y) {
        return Ok(Enclosure::point(Rational::zero()));
    }
    norm_closed_form(&x.difference(y)?, sp, k)
}

/// Distance of a closed-form sequence to a finite one.
pub fn distance_closed_finite(
    x: &ClosedFormSequence,
    y: &FiniteSequence,
    sp: &Space,
    k: u64,
) -> Result<Enclosure> {
    let yc = y.to_closed_form(x.weight_abs_sq().clone())?;
    distance_closed(x, &yc, sp, k)
}
