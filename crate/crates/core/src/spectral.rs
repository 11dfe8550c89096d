//! Eigenvalue analysis: for every scalar `lambda` the closed-form
//! eigenvector normalized to `x_1 = 1`, exact residual verification of
//! `A x = lambda x`, certified membership in `D(A)`, the finite-depth
//! one-dimensionality check, and grid probes reported as machine-readable
//! evidence.

use std::sync::Arc;

use num::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactnum::{rational_pow, rational_to_string, scalar_pow, trisum, Rational, Scalar};
use crate::seqspace::{ClosedFormSequence, DecayCert, Space};
use crate::shiftop::ShiftOperator;

/// An eigenvalue with its canonical eigenvector
/// `x_k = lambda^{k-1} w^{-T(1,k-1)}` (so `x_1 = 1`; for `lambda = 0`
/// the convention `0^0 := 1` makes the vector `e_1`).
#[derive(Clone, Debug)]
pub struct EigenPair {
    lambda: Scalar,
    w: Scalar,
    vector: ClosedFormSequence,
    /// test hook: term `k` is scaled by the factor when present
    mutation: Option<(u64, Scalar)>,
}

impl EigenPair {
    pub fn lambda(&self) -> &Scalar {
        &self.lambda
    }

    pub fn weight(&self) -> &Scalar {
        &self.w
    }

    pub fn vector(&self) -> &ClosedFormSequence {
        &self.vector
    }

    /// Entry at 1-based index `k`.
    pub fn term(&self, k: u64) -> Scalar {
        let v = self.vector.term(k);
        match &self.mutation {
            Some((idx, factor)) if *idx == k => &v * factor,
            _ => v,
        }
    }

    pub fn prefix(&self, first: u64) -> Vec<Scalar> {
        (1..=first).map(|k| self.term(k)).collect()
    }

    /// Test hook: a copy with term `k` scaled by `factor`, breaking the
    /// eigen identity on purpose.
    #[doc(hidden)]
    pub fn with_term_scaled(mut self, k: u64, factor: Scalar) -> Self {
        self.mutation = Some((k, factor));
        self
    }
}

/// Builds the canonical eigenvector of `lambda` for the operator.
pub fn eigenvector(op: &ShiftOperator, lambda: Scalar) -> Result<EigenPair> {
    if !op.field().contains(&lambda) {
        return Err(Error::FieldMismatch {
            what: "lambda does not lie in the operator's field",
        });
    }
    let w = op.weight().clone();
    let l2 = lambda.abs_sq();
    // |x_k| = |lambda|^{k-1} |w|^{-T(1,k-1)}: for lambda != 0 the tight
    // certificate is C = 1/|lambda|, beta = |lambda|; for lambda = 0 the
    // vector is e_1 and the zero bound applies from k = 2 on.
    let cert = if lambda.is_zero() {
        DecayCert::new(Rational::one(), Rational::zero(), 2)?
    } else {
        DecayCert::new(l2.recip(), l2, 1)?
    };
    let tl = lambda.clone();
    let tw = w.clone();
    let vector = ClosedFormSequence::new(
        Arc::new(move |k: u64| {
            let lp = scalar_pow(&tl, (k - 1) as i64).expect("nonnegative exponent");
            let e = trisum(1, k - 1).expect("valid range") as i64;
            let wp = scalar_pow(&tw, -e).expect("nonzero weight");
            &lp * &wp
        }),
        cert,
        op.weight_abs_sq().clone(),
    )?;
    Ok(EigenPair {
        lambda,
        w,
        vector,
        mutation: None,
    })
}

/// Exact check of `w^k x_{k+1} = lambda x_k` for all `k <= upto`.
pub fn eigen_residual_check(ep: &EigenPair, upto: u64) -> bool {
    let mut wk = Scalar::one();
    let mut current = ep.term(1);
    for k in 1..=upto {
        wk = &wk * &ep.w; // w^k
        let next = ep.term(k + 1);
        if &wk * &next != &ep.lambda * &current {
            return false;
        }
        current = next;
    }
    true
}

/// Result of the membership certification.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenMembership {
    /// least `k` with `|lambda| / |w|^{k/2} <= 1/2`, i.e.
    /// `4 |lambda|^2 <= |w|^k`
    pub k0: u64,
    /// `|x_k|^2 <= (1/4)^{k-1}` verified exactly for `k0 <= k <= checked_upto`
    pub certified: bool,
    pub checked_upto: u64,
}

/// Certifies that the eigenvector decays like `(1/2)^{k-1}` from its
/// decay index on, hence lies in the space and in `D(A)`.
pub fn eigen_membership(ep: &EigenPair, _sp: &Space, check_upto: u64) -> EigenMembership {
    let w2 = ep.w.abs_sq();
    // 4 |lambda|^2 <= |w|^k, squared to stay rational:
    // 16 |lambda|^4 <= (|w|^2)^k
    let l2 = ep.lambda.abs_sq();
    let lhs = crate::exactnum::rat_int(16) * &l2 * &l2;
    let mut k0 = 1u64;
    let mut w2k = w2.clone();
    while lhs > w2k {
        k0 += 1;
        w2k *= &w2;
    }
    let upto = check_upto.max(k0);
    let mut certified = true;
    // (1/4)^{k-1} comparison kept rational: |x_k|^2 * 4^{k-1} <= 1
    let mut four_pow = rational_pow(&crate::exactnum::rat_int(4), (k0 - 1) as i64)
        .expect("nonnegative exponent");
    for k in k0..=upto {
        if ep.term(k).abs_sq() * &four_pow > Rational::one() {
            certified = false;
            break;
        }
        four_pow *= crate::exactnum::rat_int(4);
    }
    EigenMembership {
        k0,
        certified,
        checked_upto: upto,
    }
}

/// Finite-depth one-dimensionality: the recursion `w^k x_{k+1} =
/// lambda x_k` propagates `x_1 = 0` to zero and `x_1 = 1` to the
/// canonical eigenvector, so every solution is `x_1 * (canonical)`.
pub fn eigenspace_dimension_check(
    op: &ShiftOperator,
    lambda: &Scalar,
    upto: u64,
) -> Result<bool> {
    let ep = eigenvector(op, lambda.clone())?;
    let upto = upto.max(2);
    let w = op.weight();
    // x_1 = 0 forces x_k = 0
    let mut x = Scalar::zero();
    for k in 1..upto {
        let wk = scalar_pow(w, k as i64)?;
        x = (&(lambda * &x)).div(&wk)?;
        if !x.is_zero() {
            return Ok(false);
        }
    }
    // x_1 = 1 reproduces the closed form
    let mut x = Scalar::one();
    if x != ep.term(1) {
        return Ok(false);
    }
    for k in 1..upto {
        let wk = scalar_pow(w, k as i64)?;
        x = (&(lambda * &x)).div(&wk)?;
        if x != ep.term(k + 1) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Per-lambda outcome of a spectrum probe.
#[derive(Clone, Debug, Serialize)]
pub struct SpectrumCell {
    pub lambda: String,
    pub residual_ok: bool,
    pub membership_k0: Option<u64>,
    pub dim_ok: bool,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Aggregated report over a grid of eigenvalue candidates. A full pass
/// is finite grid evidence, not a proof about the whole plane.
#[derive(Clone, Debug, Serialize)]
pub struct SpectrumReport {
    pub w: String,
    pub space: String,
    #[serde(rename = "K")]
    pub k: u64,
    pub cells: Vec<SpectrumCell>,
}

impl SpectrumReport {
    pub fn all_pass(&self) -> bool {
        self.cells.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }

    /// CSV projection `lambda_re,lambda_im,k0,pass`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("# rolewicz-schema v1\nlambda_re,lambda_im,k0,pass\n");
        for c in &self.cells {
            let lam = Scalar::parse(&c.lambda).expect("round trip");
            let k0 = c.membership_k0.map_or(String::new(), |v| v.to_string());
            out.push_str(&format!(
                "{},{},{k0},{}\n",
                rational_to_string(&lam.re()),
                rational_to_string(&lam.im()),
                c.pass
            ));
        }
        out
    }
}

/// Runs the full eigen suite on every grid point, isolating per-lambda
/// failures.
pub fn spectrum_probe(op: &ShiftOperator, grid: &[Scalar], upto: u64) -> SpectrumReport {
    let cells = grid
        .iter()
        .map(|lambda| match eigenvector(op, lambda.clone()) {
            Ok(ep) => {
                let residual_ok = eigen_residual_check(&ep, upto);
                let mem = eigen_membership(&ep, op.space(), upto);
                let dim_ok = eigenspace_dimension_check(op, lambda, upto).unwrap_or(false);
                SpectrumCell {
                    lambda: lambda.to_string(),
                    residual_ok,
                    membership_k0: Some(mem.k0),
                    dim_ok,
                    pass: residual_ok && mem.certified && dim_ok,
                    error: None,
                }
            }
            Err(e) => SpectrumCell {
                lambda: lambda.to_string(),
                residual_ok: false,
                membership_k0: None,
                dim_ok: false,
                pass: false,
                error: Some(e.to_string()),
            },
        })
        .collect();
    SpectrumReport {
        w: op.weight().to_string(),
        space: op.space().label(),
        k: upto,
        cells,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{rat, rat_int};
    use crate::seqspace::{norm_closed_form, FiniteSequence};
    use crate::shiftop::Field;

    fn op2() -> ShiftOperator {
        ShiftOperator::real(rat_int(2), Space::l1()).unwrap()
    }

    fn op2c() -> ShiftOperator {
        ShiftOperator::new(Scalar::from_int(2), Space::l1(), Field::Complex).unwrap()
    }

    #[test]
    fn zero_lambda_gives_e1() {
        let ep = eigenvector(&op2(), Scalar::zero()).unwrap();
        assert_eq!(ep.term(1), Scalar::one());
        for k in 2..=20u64 {
            assert!(ep.term(k).is_zero());
        }
        assert!(eigen_residual_check(&ep, 100));
        let e1 = FiniteSequence::unit(1);
        for k in 1..=10u64 {
            assert_eq!(ep.term(k), e1.entry(k));
        }
    }

    #[test]
    fn lambda_two_entries() {
        let ep = eigenvector(&op2(), Scalar::from_int(2)).unwrap();
        assert_eq!(
            ep.prefix(4),
            vec![
                Scalar::one(),
                Scalar::one(),
                Scalar::from_rational(rat(1, 2)),
                Scalar::from_rational(rat(1, 8)),
            ]
        );
    }

    #[test]
    fn complex_lambda_entries() {
        let ep = eigenvector(&op2c(), Scalar::complex(rat_int(1), rat_int(1))).unwrap();
        assert_eq!(ep.term(2), Scalar::complex(rat(1, 2), rat(1, 2)));
        assert_eq!(ep.term(3), Scalar::complex(rat_int(0), rat(1, 4)));
        assert!(eigen_residual_check(&ep, 60));
    }

    #[test]
    fn field_mismatch_is_rejected() {
        assert!(eigenvector(&op2(), Scalar::i()).is_err());
        assert!(eigenvector(&op2c(), Scalar::from_int(3)).is_ok());
    }

    #[test]
    fn residual_catches_mutations() {
        let ep = eigenvector(&op2(), Scalar::from_int(3)).unwrap();
        assert!(eigen_residual_check(&ep, 100));
        let bad = ep.with_term_scaled(5, Scalar::from_int(2));
        assert!(!eigen_residual_check(&bad, 10));
        assert!(eigen_residual_check(&bad, 3)); // mutation sits beyond depth 3
    }

    #[test]
    fn membership_decay_index_examples() {
        let sp = Space::l1();
        let m = eigen_membership(&eigenvector(&op2(), Scalar::one()).unwrap(), &sp, 64);
        assert_eq!(m.k0, 2);
        assert!(m.certified);
        let m = eigen_membership(&eigenvector(&op2(), Scalar::zero()).unwrap(), &sp, 64);
        assert_eq!(m.k0, 1);
        assert!(m.certified);
        let m = eigen_membership(&eigenvector(&op2(), Scalar::from_int(16)).unwrap(), &sp, 64);
        assert_eq!(m.k0, 10);
        assert!(m.certified);
    }

    #[test]
    fn eigenvector_is_certified_in_domain() {
        let op = op2();
        for lambda in [Scalar::zero(), Scalar::from_int(3), Scalar::from_rational(rat(-7, 3))] {
            let ep = eigenvector(&op, lambda).unwrap();
            assert!(op.in_domain(1, ep.vector(), 16).unwrap().is_certified());
            assert!(norm_closed_form(ep.vector(), &Space::c0(), 8).is_ok());
        }
    }

    #[test]
    fn dimension_check_examples() {
        assert!(eigenspace_dimension_check(&op2(), &Scalar::from_int(5), 60).unwrap());
        assert!(eigenspace_dimension_check(&op2(), &Scalar::zero(), 60).unwrap());
        let op32 = ShiftOperator::real(rat(3, 2), Space::l1()).unwrap();
        assert!(eigenspace_dimension_check(&op32, &Scalar::from_rational(rat(-7, 3)), 60).unwrap());
    }

    #[test]
    fn scaled_eigenvectors_still_solve_the_recursion() {
        let ep = eigenvector(&op2(), Scalar::from_rational(rat(5, 3))).unwrap();
        let c = Scalar::from_rational(rat(-7, 2));
        let scaled = ep.vector().scale(&c);
        let w = Scalar::from_int(2);
        for k in 1..=40u64 {
            let wk = scalar_pow(&w, k as i64).unwrap();
            assert_eq!(
                &wk * &scaled.term(k + 1),
                &Scalar::from_rational(rat(5, 3)) * &scaled.term(k)
            );
        }
    }

    #[test]
    fn distinct_lambdas_are_independent() {
        // determinant of the (1,2)-minor is (mu - lambda)/w != 0
        let op = op2c();
        let l = Scalar::complex(rat_int(1), rat_int(1));
        let m = Scalar::from_rational(rat(1, 3));
        let el = eigenvector(&op, l.clone()).unwrap();
        let em = eigenvector(&op, m.clone()).unwrap();
        let det = &(&el.term(1) * &em.term(2)) - &(&em.term(1) * &el.term(2));
        let expected = (&(&m - &l)).div(&Scalar::from_int(2)).unwrap();
        assert_eq!(det, expected);
        assert!(!det.is_zero());
    }

    #[test]
    fn lambda_equal_weight_closed_form() {
        // for lambda = w: x_k = w^{-T(1,k-2)} for k >= 2
        let ep = eigenvector(&op2(), Scalar::from_int(2)).unwrap();
        for k in 2..=30u64 {
            let e = trisum(1, k - 2).unwrap() as i64;
            assert_eq!(ep.term(k), scalar_pow(&Scalar::from_int(2), -e).unwrap());
        }
    }

    #[test]
    fn decay_bound_holds_in_squared_magnitudes() {
        let ep = eigenvector(&op2c(), Scalar::complex(rat_int(2), rat_int(-1))).unwrap();
        let m = eigen_membership(&ep, &Space::l1(), 80);
        assert!(m.certified);
        let mut four_pow = rational_pow(&rat_int(4), (m.k0 - 1) as i64).unwrap();
        for k in m.k0..=80 {
            assert!(ep.term(k).abs_sq() * &four_pow <= Rational::one(), "k={k}");
            four_pow *= rat_int(4);
        }
    }

    #[test]
    fn spectrum_probe_grid() {
        let op = op2c();
        let mut grid = Vec::new();
        for a in -2i64..=2 {
            for b in -2i64..=2 {
                grid.push(Scalar::complex(rat_int(a), rat_int(b)));
            }
        }
        let report = spectrum_probe(&op, &grid, 64);
        assert_eq!(report.cells.len(), 25);
        assert!(report.all_pass());
        let json = report.to_json();
        assert!(json.starts_with(r#"{"w":"2","space":"lp(1)","K":64,"cells":["#));
        let csv = report.to_csv();
        assert!(csv.starts_with("# rolewicz-schema v1\nlambda_re,lambda_im,k0,pass\n"));
        assert_eq!(csv.lines().count(), 27);
    }

    #[test]
    fn spectrum_probe_isolates_field_mismatches() {
        let op = op2(); // real field
        let grid = vec![Scalar::from_int(1), Scalar::i(), Scalar::from_int(-1)];
        let report = spectrum_probe(&op, &grid, 32);
        assert!(report.cells[0].pass);
        assert!(!report.cells[1].pass);
        assert!(report.cells[1].error.is_some());
        assert!(report.cells[2].pass);
    }
}
