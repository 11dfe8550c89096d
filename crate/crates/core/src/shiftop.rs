//! The weighted backward shift `A x = (w^k x_{k+1})_k` with `|w| > 1`,
//! its bounded right inverse `B`, closed-form powers of both, maximal
//! domain certification and the unboundedness witness.

use std::sync::Arc;

use num::{One, Signed};

use crate::error::{Error, Result};
use crate::exactnum::{rational_to_string, scalar_pow, trisum, Rational, Scalar};
use crate::seqspace::{norm_closed_form, ClosedFormSequence, DecayCert, FiniteSequence, Space};

/// Ground field of the ambient space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Field {
    Real,
    Complex,
}

impl Field {
    pub fn label(&self) -> &'static str {
        match self {
            Field::Real => "real",
            Field::Complex => "complex",
        }
    }

    /// Whether a scalar lies in the field.
    pub fn contains(&self, s: &Scalar) -> bool {
        match self {
            Field::Real => s.is_real_valued(),
            Field::Complex => true,
        }
    }
}

/// The operator data: weight `w` with `|w| > 1`, ambient space and field.
#[derive(Clone, Debug)]
pub struct ShiftOperator {
    w: Scalar,
    w_abs_sq: Rational,
    space: Space,
    field: Field,
}

/// Outcome of a certificate-based membership check. `Unknown` is not a
/// "no": a finite procedure can only certify membership positively.
#[derive(Clone, Debug, PartialEq)]
pub enum CertifiedVerdict {
    Certified { norm_hi: Rational },
    Unknown { failing_index: u64 },
}

impl CertifiedVerdict {
    pub fn is_certified(&self) -> bool {
        matches!(self, CertifiedVerdict::Certified { .. })
    }
}

impl ShiftOperator {
    pub fn new(w: Scalar, space: Space, field: Field) -> Result<Self> {
        let w_abs_sq = w.abs_sq();
        if w_abs_sq <= Rational::one() {
            return Err(Error::WeightNotExpanding {
                abs_sq: rational_to_string(&w_abs_sq),
            });
        }
        if !field.contains(&w) {
            return Err(Error::FieldMismatch {
                what: "weight w does not lie in the declared field",
            });
        }
        Ok(ShiftOperator {
            w,
            w_abs_sq,
            space,
            field,
        })
    }

    /// Real-weight operator over the real field.
    pub fn real(w: Rational, space: Space) -> Result<Self> {
        ShiftOperator::new(Scalar::from_rational(w), space, Field::Real)
    }

    pub fn weight(&self) -> &Scalar {
        &self.w
    }

    pub fn weight_abs_sq(&self) -> &Rational {
        &self.w_abs_sq
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn field(&self) -> Field {
        self.field
    }

    /// `A x`: entry `k` of the image is `w^k x_{k+1}`.
    pub fn apply_a(&self, x: &FiniteSequence) -> FiniteSequence {
        let n = x.support();
        if n <= 1 {
            return FiniteSequence::zero();
        }
        let mut out = Vec::with_capacity((n - 1) as usize);
        let mut wk = Scalar::one();
        for k in 1..n {
            wk = &wk * &self.w; // w^k
            out.push(&wk * &x.entry(k + 1));
        }
        FiniteSequence::new(out)
    }

    /// `A^n x` through the closed-form exponents
    /// `(A^n x)_k = w^{T(k, k+n-1)} x_{k+n}`; `A^0 = I`.
    pub fn apply_a_pow(&self, n: u64, x: &FiniteSequence) -> FiniteSequence {
        if n == 0 {
            return x.clone();
        }
        let support = x.support();
        if support <= n {
            return FiniteSequence::zero();
        }
        let len = support - n;
        let mut out = Vec::with_capacity(len as usize);
        for k in 1..=len {
            let e = trisum(k, k + n - 1).expect("valid range") as i64;
            let coeff = scalar_pow(&self.w, e).expect("nonzero weight");
            out.push(&coeff * &x.entry(k + n));
        }
        FiniteSequence::new(out)
    }

    /// `B^n x`: `n` leading zeros, then entry `k+n` is
    /// `w^{-T(k, k+n-1)} x_k`; `B^0 = I`.
    pub fn apply_b_pow(&self, n: u64, x: &FiniteSequence) -> FiniteSequence {
        if n == 0 || x.is_zero() {
            return x.clone();
        }
        let support = x.support();
        let mut out = vec![Scalar::zero(); (support + n) as usize];
        for k in 1..=support {
            let e = trisum(k, k + n - 1).expect("valid range") as i64;
            let coeff = scalar_pow(&self.w, -e).expect("nonzero weight");
            out[(k + n - 1) as usize] = &coeff * &x.entry(k);
        }
        FiniteSequence::new(out)
    }

    /// `A^n` on a closed-form sequence; the certificate transforms as
    /// `C -> C beta^n` because `T(1, k+n-1) = T(1, k-1) + T(k, k+n-1)`.
    pub fn apply_a_closed(&self, n: u64, x: &ClosedFormSequence) -> Result<ClosedFormSequence> {
        if *x.weight_abs_sq() != self.w_abs_sq {
            return Err(Error::CertWeightMismatch {
                cert: rational_to_string(x.weight_abs_sq()),
                op: rational_to_string(&self.w_abs_sq),
            });
        }
        if n == 0 {
            return Ok(x.clone());
        }
        let w = self.w.clone();
        let inner = x.term_rule();
        let term = Arc::new(move |k: u64| {
            let e = trisum(k, k + n - 1).expect("valid range") as i64;
            let coeff = scalar_pow(&w, e).expect("nonzero weight");
            &coeff * &inner(k + n)
        });
        let old = x.cert();
        let c2 = old.c2()
            * crate::exactnum::rational_pow(old.beta2(), n as i64).expect("nonnegative");
        let start = old.start().saturating_sub(n).max(1);
        let cert = DecayCert::new(c2, old.beta2().clone(), start)?;
        ClosedFormSequence::new(term, cert, self.w_abs_sq.clone())
    }

    /// Certificate-based membership of `x` in `D(A^n)`: `Certified` when
    /// the image's norm enclosure is finite, `Unknown` (never a false
    /// "no") when the certificate fails on the inspected prefix.
    pub fn in_domain(
        &self,
        n: u64,
        x: &ClosedFormSequence,
        k: u64,
    ) -> Result<CertifiedVerdict> {
        let image = self.apply_a_closed(n, x)?;
        match norm_closed_form(&image, &self.space, k) {
            Ok(enc) => Ok(CertifiedVerdict::Certified { norm_hi: enc.hi }),
            Err(Error::CertViolation { index }) => Ok(CertifiedVerdict::Unknown {
                failing_index: index,
            }),
            Err(e) => Err(e),
        }
    }

    /// Exact check of `A^n B^n x = x`.
    pub fn right_inverse_check(&self, n: u64, x: &FiniteSequence) -> bool {
        self.apply_a_pow(n, &self.apply_b_pow(n, x)) == *x
    }

    /// Least `k` with `||A e_{k+1}|| / ||e_{k+1}|| = |w|^k > bound`,
    /// returned with the exact ratio square `|w|^{2k}`.
    pub fn unboundedness_witness(&self, bound: &Rational) -> Result<(u64, Rational)> {
        if !bound.is_positive() {
            return Err(Error::NonPositiveBound {
                got: rational_to_string(bound),
            });
        }
        let bound_sq = bound * bound;
        // exponential search then binary search for the least k
        let mut hi: u64 = 1;
        while crate::exactnum::rational_pow(&self.w_abs_sq, hi as i64)? <= bound_sq {
            hi *= 2;
        }
        let mut lo: u64 = hi / 2; // invariant: |w|^{2 lo} <= bound^2 < |w|^{2 hi}
        if hi == 1 {
            lo = 0;
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if crate::exactnum::rational_pow(&self.w_abs_sq, mid as i64)? <= bound_sq {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let ratio_sq = crate::exactnum::rational_pow(&self.w_abs_sq, hi as i64)?;
        Ok((hi, ratio_sq))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{rat, rat_int};
    use crate::seqspace::norm_closed_form;
    use proptest::prelude::*;

    fn op2() -> ShiftOperator {
        ShiftOperator::real(rat_int(2), Space::l1()).unwrap()
    }

    fn seq(v: &[i64]) -> FiniteSequence {
        FiniteSequence::new(v.iter().map(|&n| Scalar::from_int(n)).collect())
    }

    #[test]
    fn construction_rejects_small_weights() {
        assert!(ShiftOperator::real(rat_int(1), Space::l1()).is_err());
        assert!(ShiftOperator::real(rat(1, 2), Space::l1()).is_err());
        assert!(ShiftOperator::real(rat_int(-2), Space::l1()).is_ok());
        // complex weight in a real field is rejected
        assert!(ShiftOperator::new(
            Scalar::complex(rat_int(1), rat_int(1)),
            Space::l1(),
            Field::Real
        )
        .is_err());
        assert!(ShiftOperator::new(
            Scalar::complex(rat_int(1), rat_int(1)),
            Space::l1(),
            Field::Complex
        )
        .is_ok());
    }

    #[test]
    fn apply_a_examples() {
        let op = op2();
        assert_eq!(op.apply_a(&FiniteSequence::unit(2)), seq(&[2]));
        assert!(op.apply_a(&FiniteSequence::unit(1)).is_zero());
        let op3 = ShiftOperator::real(rat_int(3), Space::l1()).unwrap();
        assert_eq!(op3.apply_a(&seq(&[0, 0, 5])), seq(&[0, 45]));
    }

    #[test]
    fn apply_a_pow_examples() {
        let op = op2();
        assert_eq!(op.apply_a_pow(2, &FiniteSequence::unit(3)), seq(&[8]));
        let x = seq(&[7, -3, 2]);
        assert_eq!(op.apply_a_pow(0, &x), x);
        assert!(op.apply_a_pow(3, &FiniteSequence::unit(2)).is_zero());
    }

    #[test]
    fn apply_b_pow_examples() {
        let op = op2();
        let b1 = op.apply_b_pow(1, &FiniteSequence::unit(1));
        assert_eq!(
            b1,
            FiniteSequence::new(vec![Scalar::zero(), Scalar::from_rational(rat(1, 2))])
        );
        let b2 = op.apply_b_pow(2, &FiniteSequence::unit(1));
        assert_eq!(
            b2,
            FiniteSequence::new(vec![
                Scalar::zero(),
                Scalar::zero(),
                Scalar::from_rational(rat(1, 8))
            ])
        );
        let x = seq(&[4, 1]);
        assert_eq!(op.apply_b_pow(0, &x), x);
    }

    #[test]
    fn right_inverse_examples() {
        let op = op2();
        assert!(op.right_inverse_check(1, &FiniteSequence::unit(1)));
        let op32 = ShiftOperator::real(rat(3, 2), Space::l1()).unwrap();
        assert!(op32.right_inverse_check(4, &seq(&[1, 2, 3])));
        assert!(op.right_inverse_check(0, &seq(&[5, -1])));
    }

    #[test]
    fn b_is_not_a_left_inverse() {
        let op = op2();
        let e1 = FiniteSequence::unit(1);
        let ba = op.apply_b_pow(1, &op.apply_a(&e1));
        assert!(ba.is_zero());
        assert_ne!(ba, e1);
    }

    #[test]
    fn unboundedness_witness_examples() {
        let op = op2();
        let (k, ratio_sq) = op.unboundedness_witness(&rat_int(1_000_000)).unwrap();
        assert_eq!(k, 20);
        assert_eq!(ratio_sq, crate::exactnum::rational_pow(&rat_int(2), 40).unwrap());
        assert_eq!(op.unboundedness_witness(&rat_int(1)).unwrap().0, 1);
        let op32 = ShiftOperator::real(rat(3, 2), Space::l1()).unwrap();
        assert_eq!(op32.unboundedness_witness(&rat_int(2)).unwrap().0, 2);
        assert!(op.unboundedness_witness(&rat_int(0)).is_err());
    }

    #[test]
    fn apply_a_closed_matches_finite() {
        let op = op2();
        let x = seq(&[3, -1, 0, 7]);
        let xc = x.to_closed_form(op.weight_abs_sq().clone()).unwrap();
        for n in 0..4u64 {
            let via_closed = op.apply_a_closed(n, &xc).unwrap();
            let via_finite = op.apply_a_pow(n, &x);
            for k in 1..=8u64 {
                assert_eq!(via_closed.term(k), via_finite.entry(k), "n={n} k={k}");
            }
            // the transformed certificate remains valid
            assert!(norm_closed_form(&via_closed, &Space::l1(), 4).is_ok());
        }
    }

    #[test]
    fn in_domain_examples() {
        let op = op2();
        // finite sequences are always in D(A^n)
        let x = seq(&[1, 2, 3]).to_closed_form(rat_int(4)).unwrap();
        for n in 0..5u64 {
            assert!(op.in_domain(n, &x, 8).unwrap().is_certified());
        }
        // growth with an invalid certificate is Unknown, never "no"
        let bad = ClosedFormSequence::new(
            Arc::new(|k: u64| {
                scalar_pow(&Scalar::from_int(2), trisum(1, k - 1).unwrap() as i64).unwrap()
            }),
            DecayCert::new(rat_int(1), rat_int(1), 1).unwrap(),
            rat_int(4),
        )
        .unwrap();
        match op.in_domain(1, &bad, 4).unwrap() {
            CertifiedVerdict::Unknown { failing_index } => assert!(failing_index >= 1),
            v => panic!("expected Unknown, got {v:?}"),
        }
        // weight mismatch is an error
        let other = seq(&[1]).to_closed_form(rat_int(9)).unwrap();
        assert!(op.in_domain(1, &other, 4).is_err());
    }

    fn arb_seq() -> impl Strategy<Value = FiniteSequence> {
        proptest::collection::vec((-9i64..10, 1i64..9), 0..7).prop_map(|v| {
            FiniteSequence::new(
                v.into_iter()
                    .map(|(n, d)| Scalar::from_rational(rat(n, d)))
                    .collect(),
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn semigroup_laws(x in arb_seq(), n in 0u64..5, m in 0u64..5) {
            let op = op2();
            prop_assert_eq!(
                op.apply_a_pow(n + m, &x),
                op.apply_a_pow(n, &op.apply_a_pow(m, &x))
            );
            prop_assert_eq!(
                op.apply_b_pow(n + m, &x),
                op.apply_b_pow(n, &op.apply_b_pow(m, &x))
            );
        }

        #[test]
        fn right_inverse_law(x in arb_seq(), n in 0u64..6) {
            let op = ShiftOperator::real(rat(3, 2), Space::l2()).unwrap();
            prop_assert!(op.right_inverse_check(n, &x));
        }

        #[test]
        fn apply_a_is_linear(x in arb_seq(), y in arb_seq(), a in -5i64..6, b in -5i64..6) {
            let op = op2();
            let sa = Scalar::from_int(a);
            let sb = Scalar::from_int(b);
            let lhs = op.apply_a(&x.scale(&sa).add(&y.scale(&sb)));
            let rhs = op.apply_a(&x).scale(&sa).add(&op.apply_a(&y).scale(&sb));
            prop_assert_eq!(lhs, rhs);
        }
    }
}
