//! Exact periodic points of every period: the block construction
//! `x_{k+N} = w^{-T(k, k+N-1)} x_k`, termwise verification of
//! `A^N x = x`, and the quantitative density estimate against finite
//! targets.

use std::sync::{Arc, Mutex};

use num::{One, Zero};
use serde::Serialize;

use crate::enclosure::{abs_lower_above_one, Enclosure};
use crate::error::{Error, Result};
use crate::exactnum::{rational_pow, rational_pow_times, scalar_pow, trisum, Rational, Scalar};
use crate::seqspace::{
    distance_closed_finite, norm_finite, ClosedFormSequence, DecayCert, FiniteSequence,
};
use crate::shiftop::ShiftOperator;

/// A periodic point of `A` with period `N`, generated from its seed by
/// the one-step recurrence `x_{k+N} = w^{-T(k, k+N-1)} x_k`. Entries are
/// memoized; the point is immutable after construction.
#[derive(Clone, Debug)]
pub struct PeriodicPoint {
    w: Scalar,
    w_abs_sq: Rational,
    period: u64,
    seed: Vec<Scalar>,
    memo: Arc<Mutex<Vec<Scalar>>>,
    /// test hook: entry `k` is scaled by the factor when present
    mutation: Option<(u64, Scalar)>,
}

/// `w^e * s`; entries grow to tens of kilobits, so the real-weight case
/// goes through the small-gcd product.
fn weight_pow_times(w: &Scalar, e: i64, s: &Scalar) -> Scalar {
    match (w, s) {
        (Scalar::Real(wr), Scalar::Real(sr)) => {
            Scalar::Real(rational_pow_times(wr, e, sr).expect("nonzero weight"))
        }
        _ => &scalar_pow(w, e).expect("nonzero weight") * s,
    }
}

impl PeriodicPoint {
    pub fn period(&self) -> u64 {
        self.period
    }

    pub fn seed(&self) -> &[Scalar] {
        &self.seed
    }

    pub fn weight(&self) -> &Scalar {
        &self.w
    }

    /// Entry at 1-based index `k`.
    pub fn entry(&self, k: u64) -> Scalar {
        assert!(k >= 1, "sequences are indexed from 1");
        let mut memo = self.memo.lock().expect("memo lock");
        while (memo.len() as u64) < k {
            let next = memo.len() as u64 + 1;
            let v = if next <= self.period {
                self.seed[(next - 1) as usize].clone()
            } else {
                let base = &memo[(next - self.period - 1) as usize];
                let e = trisum(next - self.period, next - 1).expect("valid range") as i64;
                weight_pow_times(&self.w, -e, base)
            };
            memo.push(v);
        }
        let v = memo[(k - 1) as usize].clone();
        match &self.mutation {
            Some((idx, factor)) if *idx == k => &v * factor,
            _ => v,
        }
    }

    pub fn prefix(&self, first: u64) -> Vec<Scalar> {
        (1..=first).map(|k| self.entry(k)).collect()
    }

    /// Decay certificate: `beta = 1` and
    /// `C^2 = max_i |seed_i|^2 |w|^{2 T(1, i-1)}`.
    pub fn decay_cert(&self) -> DecayCert {
        let mut c2 = Rational::zero();
        for (i, s) in self.seed.iter().enumerate() {
            let t = trisum(1, i as u64).expect("valid range") as i64;
            let v = s.abs_sq() * rational_pow(&self.w_abs_sq, t).expect("expanding weight");
            if v > c2 {
                c2 = v;
            }
        }
        DecayCert::new(c2, Rational::one(), 1).expect("valid certificate")
    }

    pub fn to_closed_form(&self) -> ClosedFormSequence {
        let point = self.clone();
        ClosedFormSequence::new(
            Arc::new(move |k: u64| point.entry(k)),
            self.decay_cert(),
            self.w_abs_sq.clone(),
        )
        .expect("expanding weight")
    }

    /// Test hook: a copy with entry `k` scaled by `factor`, breaking the
    /// periodicity identity on purpose.
    #[doc(hidden)]
    pub fn with_entry_scaled(mut self, k: u64, factor: Scalar) -> Self {
        self.mutation = Some((k, factor));
        self
    }

    /// `{"N":..., "seed":[...], "entries_prefix":[...], "verified_upto":...}`
    pub fn to_json(&self, prefix_len: u64, verified_upto: u64) -> String {
        #[derive(Serialize)]
        struct Repr {
            #[serde(rename = "N")]
            n: u64,
            seed: Vec<String>,
            entries_prefix: Vec<String>,
            verified_upto: u64,
        }
        serde_json::to_string(&Repr {
            n: self.period,
            seed: self.seed.iter().map(|s| s.to_string()).collect(),
            entries_prefix: self.prefix(prefix_len).iter().map(|s| s.to_string()).collect(),
            verified_upto,
        })
        .expect("serializable")
    }
}

/// Periodic point from an arbitrary seed `(x_1, ..., x_N)`.
pub fn make_periodic(op: &ShiftOperator, seed: Vec<Scalar>) -> Result<PeriodicPoint> {
    if seed.is_empty() {
        return Err(Error::EmptySeed);
    }
    if !seed.iter().all(|s| op.field().contains(s)) {
        return Err(Error::FieldMismatch {
            what: "seed entry does not lie in the operator's field",
        });
    }
    Ok(PeriodicPoint {
        w: op.weight().clone(),
        w_abs_sq: op.weight_abs_sq().clone(),
        period: seed.len() as u64,
        seed,
        memo: Arc::new(Mutex::new(Vec::new())),
        mutation: None,
    })
}

/// Exact check of `(A^N x)_k = x_k` for all `k <= upto`, i.e.
/// `w^{T(k, k+N-1)} x_{k+N} = x_k`.
pub fn verify_periodicity(p: &PeriodicPoint, upto: u64) -> bool {
    verified_prefix(p, upto) == upto
}

/// Largest `v <= upto` such that the periodicity identity holds for all
/// `k <= v`.
pub fn verified_prefix(p: &PeriodicPoint, upto: u64) -> u64 {
    for k in 1..=upto {
        if !periodicity_holds_at(p, k) {
            return k - 1;
        }
    }
    upto
}

/// The single identity `w^{T(k, k+N-1)} x_{k+N} = x_k` at index `k`.
pub fn periodicity_holds_at(p: &PeriodicPoint, k: u64) -> bool {
    let n = p.period();
    let e = trisum(k, k + n - 1).expect("valid range") as i64;
    weight_pow_times(p.weight(), e, &p.entry(k + n)) == p.entry(k)
}

/// A periodic point close to a finite target, with the certified
/// distance and the geometric bound `||y|| |w|^{-N} / (1 - |w|^{-N})`.
#[derive(Clone, Debug)]
pub struct PeriodicApproximation {
    pub point: PeriodicPoint,
    pub dist: Enclosure,
    pub paper_bound: Rational,
    pub within_bound: bool,
}

/// Seeds a period-`N` point with `y` padded by zeros (`N >= support(y)`)
/// and encloses `||y - x||`.
pub fn periodic_approximation(
    op: &ShiftOperator,
    y: &FiniteSequence,
    period: u64,
) -> Result<PeriodicApproximation> {
    let support = y.support();
    if support == 0 {
        return Err(Error::ZeroSequence);
    }
    if period < support {
        return Err(Error::PeriodTooShort { period, support });
    }
    let mut seed = y.entries().to_vec();
    seed.resize(period as usize, Scalar::zero());
    let point = make_periodic(op, seed)?;

    let dist = distance_closed_finite(&point.to_closed_form(), y, op.space(), period + 40)?;

    // ||y|| |w|^{-N} / (1 - |w|^{-N}) = ||y|| / (|w|^N - 1)
    let norm_hi = norm_finite(y, op.space()).hi(80);
    let u = abs_lower_above_one(op.weight())?;
    let un = rational_pow(&u, period as i64)?;
    let paper_bound = norm_hi / (un - Rational::one());
    let within_bound = dist.hi <= paper_bound;
    Ok(PeriodicApproximation {
        point,
        dist,
        paper_bound,
        within_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{rat, rat_int};
    use crate::seqspace::Space;
    use crate::shiftop::Field;

    fn op2() -> ShiftOperator {
        ShiftOperator::real(rat_int(2), Space::l1()).unwrap()
    }

    /// Block-formula oracle: entry `jN + i` equals
    /// `w^{-T(i, jN+i-1)} seed_i`.
    fn block_entry(p: &PeriodicPoint, k: u64) -> Scalar {
        let n = p.period();
        let i = (k - 1) % n + 1;
        if k <= n {
            return p.seed()[(i - 1) as usize].clone();
        }
        let e = trisum(i, k - 1).unwrap() as i64;
        let coeff = scalar_pow(p.weight(), -e).unwrap();
        &coeff * &p.seed()[(i - 1) as usize]
    }

    #[test]
    fn period_one_entries() {
        let p = make_periodic(&op2(), vec![Scalar::one()]).unwrap();
        // entry(k) = 2^{-k(k-1)/2}
        assert_eq!(
            p.prefix(4),
            vec![
                Scalar::one(),
                Scalar::from_rational(rat(1, 2)),
                Scalar::from_rational(rat(1, 8)),
                Scalar::from_rational(rat(1, 64)),
            ]
        );
        for k in 1..=30u64 {
            let e = trisum(1, k - 1).unwrap() as i64;
            assert_eq!(p.entry(k), scalar_pow(&Scalar::from_int(2), -e).unwrap());
        }
    }

    #[test]
    fn period_two_entries() {
        let p = make_periodic(&op2(), vec![Scalar::one(), Scalar::one()]).unwrap();
        assert_eq!(
            p.prefix(4),
            vec![
                Scalar::one(),
                Scalar::one(),
                Scalar::from_rational(rat(1, 8)),
                Scalar::from_rational(rat(1, 32)),
            ]
        );
        for k in 1..=40u64 {
            assert_eq!(p.entry(k), block_entry(&p, k), "k={k}");
        }
    }

    #[test]
    fn zero_seed_is_the_zero_fixed_point() {
        let p = make_periodic(&op2(), vec![Scalar::zero(), Scalar::zero()]).unwrap();
        assert!(p.prefix(12).iter().all(Scalar::is_zero));
        assert!(verify_periodicity(&p, 30));
    }

    #[test]
    fn make_periodic_rejects_bad_seeds() {
        assert!(make_periodic(&op2(), vec![]).is_err());
        // complex seed on a real-field operator
        assert!(make_periodic(&op2(), vec![Scalar::i()]).is_err());
        let opc = ShiftOperator::new(Scalar::from_int(2), Space::l1(), Field::Complex).unwrap();
        assert!(make_periodic(&opc, vec![Scalar::i()]).is_ok());
    }

    #[test]
    fn periodicity_holds_exactly() {
        let p = make_periodic(&op2(), vec![Scalar::one()]).unwrap();
        assert!(verify_periodicity(&p, 50));

        let op32 = ShiftOperator::real(rat(3, 2), Space::l1()).unwrap();
        let p = make_periodic(
            &op32,
            vec![Scalar::from_int(2), Scalar::from_rational(rat(-1, 3))],
        )
        .unwrap();
        assert!(verify_periodicity(&p, 40));
    }

    #[test]
    fn mutation_breaks_periodicity() {
        let p = make_periodic(&op2(), vec![Scalar::one()]).unwrap();
        let bad = p.with_entry_scaled(3, Scalar::from_int(2));
        assert!(!verify_periodicity(&bad, 10));
        assert!(verified_prefix(&bad, 10) < 3);
    }

    #[test]
    fn linearity_of_the_construction() {
        let op = op2();
        let s = vec![Scalar::one(), Scalar::from_rational(rat(1, 2))];
        let t = vec![Scalar::from_int(-3), Scalar::from_int(2)];
        let a = Scalar::from_rational(rat(2, 3));
        let b = Scalar::from_int(5);
        let combined: Vec<Scalar> = s
            .iter()
            .zip(&t)
            .map(|(x, y)| &(&a * x) + &(&b * y))
            .collect();
        let ps = make_periodic(&op, s).unwrap();
        let pt = make_periodic(&op, t).unwrap();
        let pc = make_periodic(&op, combined).unwrap();
        for k in 1..=30u64 {
            let want = &(&a * &ps.entry(k)) + &(&b * &pt.entry(k));
            assert_eq!(pc.entry(k), want, "k={k}");
        }
    }

    #[test]
    fn approximation_bound_period_one() {
        let op = op2();
        let y = FiniteSequence::unit(1);
        let approx = periodic_approximation(&op, &y, 1).unwrap();
        // bound = 1 * (1/2) / (1/2) = 1
        assert_eq!(approx.paper_bound, rat_int(1));
        assert!(approx.within_bound);
        // dist encloses sum_{k>=2} 2^{-k(k-1)/2}; sum enough terms that
        // the oracle exceeds every head the enclosure may have used
        let mut oracle = Rational::zero();
        for k in 2..=100u64 {
            oracle += approx.point.entry(k).re();
        }
        assert!(approx.dist.lo <= oracle && oracle <= approx.dist.hi);
    }

    #[test]
    fn approximation_bound_shrinks_with_period() {
        let op = op2();
        let y = FiniteSequence::unit(1);
        let n4 = periodic_approximation(&op, &y, 4).unwrap();
        assert_eq!(n4.paper_bound, rat(1, 15)); // 2^-4 / (1 - 2^-4)
        assert!(n4.within_bound);

        let mut last_bound: Option<Rational> = None;
        let mut last_dist: Option<Rational> = None;
        for period in 1..=8u64 {
            let a = periodic_approximation(&op, &y, period).unwrap();
            if let Some(prev) = last_bound {
                assert!(a.paper_bound < prev);
            }
            if let Some(prev) = last_dist {
                assert!(a.dist.hi < prev);
            }
            last_bound = Some(a.paper_bound);
            last_dist = Some(a.dist.hi);
        }
    }

    #[test]
    fn approximation_rejects_short_periods() {
        let op = op2();
        let y = FiniteSequence::new(vec![Scalar::one(), Scalar::one(), Scalar::one()]);
        assert!(periodic_approximation(&op, &y, 2).is_err());
        assert!(periodic_approximation(&op, &FiniteSequence::zero(), 3).is_err());
    }

    #[test]
    fn membership_in_every_power_domain() {
        let op = op2();
        let p = make_periodic(&op, vec![Scalar::one(), Scalar::from_rational(rat(-2, 3))])
            .unwrap();
        let cf = p.to_closed_form();
        for n in 0..=5u64 {
            assert!(
                op.in_domain(n, &cf, 8).unwrap().is_certified(),
                "not certified for n={n}"
            );
        }
    }

    #[test]
    fn json_shape() {
        let p = make_periodic(&op2(), vec![Scalar::one()]).unwrap();
        let json = p.to_json(3, 10);
        assert_eq!(
            json,
            r#"{"N":1,"seed":["1"],"entries_prefix":["1","1/2","1/8"],"verified_upto":10}"#
        );
    }
}
