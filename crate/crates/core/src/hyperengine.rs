//! Constructive hypercyclicity machinery: a canonical enumeration of the
//! dense set of nonzero rational finite sequences, the inductive
//! schedule of shift exponents, exact partial sums of the hypercyclic
//! series and the orbit-approach error checks.

use std::cmp::Ordering;

use num::integer::gcd;
use num::{One, Signed, Zero};
use serde::Serialize;

use crate::enclosure::{abs_lower_above_one, Enclosure};
use crate::error::{Error, Result};
use crate::exactnum::{
    log_mag_lower_bound, rational_pow, rational_to_string, trisum, Rational, Scalar,
};
use crate::seqspace::{distance_finite, norm_finite, FiniteSequence};
use crate::shiftop::{Field, ShiftOperator};

/// Cost of a canonical rational `a/b`: `|a| + b`, so 0 costs 1 and the
/// cheapest nonzero entries cost 2.
fn rational_cost(r: &Rational) -> u64 {
    let num: u64 = r.numer().abs().try_into().unwrap_or(u64::MAX);
    let den: u64 = r.denom().clone().try_into().unwrap_or(u64::MAX);
    num + den
}

fn scalar_cost(s: &Scalar, field: Field) -> u64 {
    match field {
        Field::Real => rational_cost(&s.re()),
        Field::Complex => rational_cost(&s.re()) + rational_cost(&s.im()),
    }
}

/// Complexity of a target: support plus the cost of every entry. The
/// canonical enumeration lists targets by increasing complexity with
/// lexicographic tie-breaking.
pub fn complexity(y: &FiniteSequence, field: Field) -> u64 {
    y.support() + y.entries().iter().map(|s| scalar_cost(s, field)).sum::<u64>()
}

/// Fixed enumeration order on rationals: by (|num|, den), nonnegative
/// before negative.
fn cmp_rational_enum(a: &Rational, b: &Rational) -> Ordering {
    let key = |r: &Rational| (r.numer().abs(), r.denom().clone(), u8::from(r.is_negative()));
    key(a).cmp(&key(b))
}

fn cmp_scalar_enum(a: &Scalar, b: &Scalar) -> Ordering {
    cmp_rational_enum(&a.re(), &b.re()).then_with(|| cmp_rational_enum(&a.im(), &b.im()))
}

fn cmp_target(a: &FiniteSequence, b: &FiniteSequence) -> Ordering {
    a.support().cmp(&b.support()).then_with(|| {
        for (x, y) in a.entries().iter().zip(b.entries()) {
            let c = cmp_scalar_enum(x, y);
            if c != Ordering::Equal {
                return c;
            }
        }
        Ordering::Equal
    })
}

/// All canonical rationals of the given cost, in enumeration order.
/// Cost 1 is `{0}`; cost `t >= 2` is `{±a/b : a + b = t, gcd(a,b) = 1}`.
fn rationals_of_cost(t: u64) -> Vec<Rational> {
    if t == 1 {
        return vec![Rational::zero()];
    }
    let mut out = Vec::new();
    for a in 1..t {
        let b = t - a;
        if gcd(a, b) == 1 {
            out.push(crate::exactnum::rat(a as i64, b as i64));
            out.push(crate::exactnum::rat(-(a as i64), b as i64));
        }
    }
    out.sort_by(cmp_rational_enum);
    out
}

fn entries_of_cost(t: u64, field: Field) -> Vec<Scalar> {
    match field {
        Field::Real => rationals_of_cost(t)
            .into_iter()
            .map(Scalar::from_rational)
            .collect(),
        Field::Complex => {
            let mut out = Vec::new();
            for u in 1..t {
                let v = t - u;
                for re in rationals_of_cost(u) {
                    for im in rationals_of_cost(v) {
                        out.push(Scalar::complex(re.clone(), im));
                    }
                }
            }
            out.sort_by(cmp_scalar_enum);
            out
        }
    }
}

/// Deterministic enumeration of all nonzero eventually-zero sequences
/// with rational (or complex rational) entries, ordered by complexity
/// with lexicographic tie-breaking.
#[derive(Clone, Debug)]
pub struct DenseTargetStream {
    field: Field,
    cache: Vec<FiniteSequence>,
    next_level: u64,
}

impl DenseTargetStream {
    pub fn new(field: Field) -> Self {
        DenseTargetStream {
            field,
            cache: Vec::new(),
            next_level: 2,
        }
    }

    pub fn field(&self) -> Field {
        self.field
    }

    /// The `m`-th target (1-indexed).
    pub fn get(&mut self, m: u64) -> Result<FiniteSequence> {
        if m == 0 {
            return Err(Error::EnumerationIndex);
        }
        while (self.cache.len() as u64) < m {
            let level = self.next_level;
            self.next_level += 1;
            let mut batch = self.generate_level(level);
            batch.sort_by(cmp_target);
            self.cache.extend(batch);
            if level > 512 {
                return Err(Error::DepthLimit { limit: 512 });
            }
        }
        Ok(self.cache[(m - 1) as usize].clone())
    }

    /// All sequences of exactly the given complexity.
    fn generate_level(&self, c: u64) -> Vec<FiniteSequence> {
        let (min_entry, min_nonzero) = match self.field {
            Field::Real => (1u64, 2u64),
            Field::Complex => (2u64, 3u64),
        };
        let mut out = Vec::new();
        let mut support = 1u64;
        while support + (support - 1) * min_entry + min_nonzero <= c {
            let budget = c - support;
            let mut prefix = Vec::new();
            self.fill_slots(
                support as usize,
                budget,
                min_entry,
                min_nonzero,
                &mut prefix,
                &mut out,
            );
            support += 1;
        }
        out
    }

    fn fill_slots(
        &self,
        slots_left: usize,
        budget: u64,
        min_entry: u64,
        min_nonzero: u64,
        prefix: &mut Vec<Scalar>,
        out: &mut Vec<FiniteSequence>,
    ) {
        if slots_left == 1 {
            if budget < min_nonzero {
                return;
            }
            for s in entries_of_cost(budget, self.field) {
                if !s.is_zero() {
                    prefix.push(s);
                    out.push(FiniteSequence::new(prefix.clone()));
                    prefix.pop();
                }
            }
            return;
        }
        let reserve = (slots_left as u64 - 2) * min_entry + min_nonzero;
        let mut t = min_entry;
        while t + reserve <= budget {
            for s in entries_of_cost(t, self.field) {
                prefix.push(s);
                self.fill_slots(slots_left - 1, budget - t, min_entry, min_nonzero, prefix, out);
                prefix.pop();
            }
            t += 1;
        }
    }
}

/// The `m`-th canonical target on a fresh stream.
pub fn enumerate_y(field: Field, m: u64) -> Result<FiniteSequence> {
    DenseTargetStream::new(field).get(m)
}

/// Index of the last nonzero entry of a nonzero target.
pub fn compute_k(y: &FiniteSequence) -> Result<u64> {
    if y.is_zero() {
        return Err(Error::ZeroSequence);
    }
    Ok(y.support())
}

/// One row of the schedule: target, its last-support index, the shift
/// exponent and a rational upper bound on its norm.
#[derive(Clone, Debug)]
pub struct ScheduleEntry {
    pub y: FiniteSequence,
    pub k: u64,
    pub n: u64,
    pub norm_hi: Rational,
}

/// The increasing sequence of shift exponents built inductively so that
/// every pair `j < m` satisfies both schedule inequalities.
#[derive(Clone, Debug, Default)]
pub struct HypercyclicSchedule {
    entries: Vec<ScheduleEntry>,
}

impl HypercyclicSchedule {
    pub fn new() -> Self {
        HypercyclicSchedule::default()
    }

    pub fn depth(&self) -> u64 {
        self.entries.len() as u64
    }

    pub fn entries(&self) -> &[ScheduleEntry] {
        &self.entries
    }

    pub fn exponents(&self) -> Vec<u64> {
        self.entries.iter().map(|e| e.n).collect()
    }

    /// Exact re-check of both schedule conditions for every pair, plus
    /// `n_1 = 1` and strict monotonicity.
    pub fn validate(&self, op: &ShiftOperator) -> Result<()> {
        let w2 = op.weight_abs_sq();
        for (mi, em) in self.entries.iter().enumerate() {
            let m = (mi + 1) as u64;
            if m == 1 && em.n != 1 {
                return Err(Error::ScheduleInvalid { j: 0, m });
            }
            for (ji, ej) in self.entries.iter().enumerate().take(mi) {
                let j = (ji + 1) as u64;
                if em.n <= ej.n {
                    return Err(Error::ScheduleInvalid { j, m });
                }
                if !pair_conditions_hold(w2, m, &em.norm_hi, ej, em.n)? {
                    return Err(Error::ScheduleInvalid { j, m });
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Row {
            m: u64,
            y: Vec<String>,
            k: u64,
            n: u64,
            norm_hi: String,
        }
        let rows: Vec<Row> = self
            .entries
            .iter()
            .enumerate()
            .map(|(i, e)| Row {
                m: (i + 1) as u64,
                y: e.y.entry_strings(),
                k: e.k,
                n: e.n,
                norm_hi: rational_to_string(&e.norm_hi),
            })
            .collect();
        serde_json::to_string(&rows).expect("serializable")
    }
}

/// Both inequalities for the pair `(j, m)` at candidate exponent `n_m`:
/// (i)  `n_m - n_j >= max(m, k_j)`;
/// (ii) `|w|^{T(1, n_m - n_j)} >= |w|^m ||y^(m)||`, checked through the
///      squared magnitudes against the norm upper bound.
fn pair_conditions_hold(
    w2: &Rational,
    m: u64,
    norm_hi_m: &Rational,
    ej: &ScheduleEntry,
    candidate_n: u64,
) -> Result<bool> {
    let d = candidate_n - ej.n;
    if d < m.max(ej.k) {
        return Ok(false);
    }
    let t = trisum(1, d)? as i64;
    log_mag_lower_bound(w2, t - m as i64, norm_hi_m)
}

/// Appends the next target with the minimal valid exponent (`n_1 = 1`).
pub fn extend_schedule(
    op: &ShiftOperator,
    schedule: &mut HypercyclicSchedule,
    y: FiniteSequence,
) -> Result<()> {
    let k = compute_k(&y)?;
    if !y.entries().iter().all(|s| op.field().contains(s)) {
        return Err(Error::FieldMismatch {
            what: "target entry does not lie in the operator's field",
        });
    }
    let norm_hi = norm_finite(&y, op.space()).hi(80);
    let m = schedule.depth() + 1;
    let n = if m == 1 {
        1
    } else {
        let w2 = op.weight_abs_sq();
        let mut candidate = schedule.entries.last().expect("nonempty").n + 1;
        loop {
            let mut ok = true;
            for ej in &schedule.entries {
                if !pair_conditions_hold(w2, m, &norm_hi, ej, candidate)? {
                    ok = false;
                    break;
                }
            }
            if ok {
                break candidate;
            }
            candidate += 1;
        }
    };
    schedule.entries.push(ScheduleEntry { y, k, n, norm_hi });
    Ok(())
}

/// Builds a schedule from explicit targets.
pub fn build_schedule(
    op: &ShiftOperator,
    targets: impl IntoIterator<Item = FiniteSequence>,
) -> Result<HypercyclicSchedule> {
    let mut s = HypercyclicSchedule::new();
    for y in targets {
        extend_schedule(op, &mut s, y)?;
    }
    Ok(s)
}

/// Builds a schedule from the first `m` canonical targets of the
/// operator's field.
pub fn build_schedule_from_stream(op: &ShiftOperator, m: u64) -> Result<HypercyclicSchedule> {
    let mut stream = DenseTargetStream::new(op.field());
    let mut s = HypercyclicSchedule::new();
    for i in 1..=m {
        extend_schedule(op, &mut s, stream.get(i)?)?;
    }
    Ok(s)
}

/// Rational upper bound on the geometric tail `Σ_{j>m} |w|^{-j}
/// = |w|^{-m} / (|w| - 1)`.
pub fn geom_tail_upper(w: &Scalar, m: u64) -> Result<Rational> {
    let u = abs_lower_above_one(w)?;
    let um = rational_pow(&u, -(m as i64))?;
    Ok(um / (u - Rational::one()))
}

/// The exact partial sum `x_M = Σ_{m<=M} B^{n_m} y^(m)` together with a
/// certified bound on the omitted tail `Σ_{m>M} |w|^{-m}`.
#[derive(Clone, Debug)]
pub struct HypercyclicPartialSum {
    pub schedule: HypercyclicSchedule,
    pub x: FiniteSequence,
    pub tail_bound_hi: Rational,
}

pub fn partial_hypercyclic_vector(
    op: &ShiftOperator,
    schedule: &HypercyclicSchedule,
) -> Result<HypercyclicPartialSum> {
    let mut x = FiniteSequence::zero();
    for e in schedule.entries() {
        x = x.add(&op.apply_b_pow(e.n, &e.y));
    }
    let tail_bound_hi = geom_tail_upper(op.weight(), schedule.depth())?;
    Ok(HypercyclicPartialSum {
        schedule: schedule.clone(),
        x,
        tail_bound_hi,
    })
}

/// Exactly computed orbit-approach error at stage `k` against the
/// quantitative bound of the construction.
#[derive(Clone, Debug)]
pub struct OrbitError {
    pub k: u64,
    pub n: u64,
    pub err: Enclosure,
    pub paper_bound: Rational,
    pub within_bound: bool,
}

/// Encloses `||y^(k) - A^{n_k} x_M||` exactly on the finite partial sum
/// and compares it against `Σ_{m>k} |w|^{-m}` plus the truncation tail.
pub fn orbit_approach_error(
    op: &ShiftOperator,
    partial: &HypercyclicPartialSum,
    k: u64,
) -> Result<OrbitError> {
    let depth = partial.schedule.depth();
    if k == 0 || k > depth {
        return Err(Error::ScheduleIndex { index: k, depth });
    }
    let entry = &partial.schedule.entries()[(k - 1) as usize];
    let image = op.apply_a_pow(entry.n, &partial.x);
    let err = distance_finite(&entry.y, &image, op.space()).enclosure(96);
    let paper_bound = geom_tail_upper(op.weight(), k)? + &partial.tail_bound_hi;
    let within_bound = err.hi <= paper_bound;
    Ok(OrbitError {
        k,
        n: entry.n,
        err,
        paper_bound,
        within_bound,
    })
}
