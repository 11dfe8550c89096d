//! Exact-arithmetic toolkit for the unbounded weighted backward shifts
//! `A x = (w^k x_{k+1})_k` with `|w| > 1` on the sequence spaces `l_p`
//! (`1 <= p < oo`) and `c_0`.
//!
//! The crate verifies, at desk scale and in exact rational arithmetic,
//! the quantitative structure of these operators: the right-inverse and
//! power laws, the inductive schedule behind a hypercyclic vector and
//! its orbit-approach error bounds, exact periodic points of every
//! period with their density estimates, and the closed-form eigenvector
//! family (every scalar is an eigenvalue with a one-dimensional
//! eigenspace).
//!
//! Design rules:
//! * all identities (`A^N x = x`, `A y = lambda y`, `A^n B^n = I`) are
//!   checked exactly on big rationals, never with floating point;
//! * magnitudes are compared through their squares so complex moduli
//!   stay rational;
//! * irrational norms are reported as exact norm powers or certified
//!   enclosures `[lo, hi]`.

pub mod enclosure;
pub mod error;
pub mod exactnum;
pub mod hyperengine;
pub mod periodic;
pub mod seqspace;
pub mod shiftop;
pub mod spectral;

pub use enclosure::{Enclosure, DEFAULT_REL_BITS};
pub use error::{Error, Result};
pub use exactnum::{Rational, Scalar, TriSum};
pub use seqspace::{ClosedFormSequence, DecayCert, FiniteSequence, NormValue, Space};
pub use shiftop::{CertifiedVerdict, Field, ShiftOperator};
