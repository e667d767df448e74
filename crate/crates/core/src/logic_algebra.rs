//! Scalar conjunction, disjunction, negation and implication on `[-1, 1]`.
//!
//! These are the two-operand forms of the averaging robustness combinators.
//! They form a commutative, monotone, idempotent structure with De Morgan
//! duality, but not a distributive lattice; see the tests for a witness.

use std::fmt;

use crate::error::{Error, Result};

/// `[v]_+`: `v` if positive, else `0`.
#[inline]
pub fn positive_part(v: f64) -> f64 {
    if v > 0.0 {
        v
    } else {
        0.0
    }
}

/// `[v]_-`: `v` if negative, else `0`. Always `-positive_part(-v)`.
#[inline]
pub fn negative_part(v: f64) -> f64 {
    if v < 0.0 {
        v
    } else {
        0.0
    }
}

/// A robustness value known to lie in `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ScoreScalar(f64);

impl ScoreScalar {
    pub fn new(value: f64) -> Result<Self> {
        if (-1.0..=1.0).contains(&value) {
            Ok(Self(value))
        } else {
            Err(Error::ScoreDomain(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    fn clamped(v: f64) -> Self {
        Self(v.clamp(-1.0, 1.0))
    }
}

impl TryFrom<f64> for ScoreScalar {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Self::new(value)
    }
}

impl From<ScoreScalar> for f64 {
    fn from(s: ScoreScalar) -> f64 {
        s.0
    }
}

impl fmt::Display for ScoreScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

// sqrt((1+x)(1+y)) - 1, written around the smaller operand so that equal
// operands return that operand bit-for-bit.
fn shifted_geometric_mean(x: f64, y: f64) -> f64 {
    let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
    let base = 1.0 + lo;
    lo + base * (0.5 * ((hi - lo) / base).ln_1p()).exp_m1()
}

/// Conjunction: geometric mean when both operands are positive,
/// otherwise the mean of the negative parts.
pub fn conj(x: ScoreScalar, y: ScoreScalar) -> ScoreScalar {
    let (x, y) = (x.0, y.0);
    if x > 0.0 && y > 0.0 {
        ScoreScalar::clamped(shifted_geometric_mean(x, y))
    } else {
        ScoreScalar((negative_part(x) + negative_part(y)) / 2.0)
    }
}

/// Disjunction: mean of the positive parts when either operand is positive,
/// otherwise `1 - sqrt((1-x)(1-y))`.
pub fn disj(x: ScoreScalar, y: ScoreScalar) -> ScoreScalar {
    let (x, y) = (x.0, y.0);
    if x > 0.0 || y > 0.0 {
        ScoreScalar((positive_part(x) + positive_part(y)) / 2.0)
    } else {
        ScoreScalar::clamped(-shifted_geometric_mean(-x, -y))
    }
}

pub fn neg(x: ScoreScalar) -> ScoreScalar {
    ScoreScalar(-x.0)
}

/// `x ▷ y = disj(-x, y)`.
pub fn implies(x: ScoreScalar, y: ScoreScalar) -> ScoreScalar {
    disj(neg(x), y)
}
