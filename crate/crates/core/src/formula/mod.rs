//! Abstract syntax for bounded Signal Temporal Logic and its textual form.
//!
//! Formulas are built over predicates on named channels of a normalized
//! [`Trace`](crate::signal::Trace). Time bounds are sample indices. Boolean
//! conjunction and disjunction keep all of their operands: `a && b && c` is a
//! single three-way [`Formula::And`], because the averaging semantics is not
//! associative.

mod parser;
mod region;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

pub use parser::{parse, parse_with_regions};
pub use region::{AxisBound, Region, RegionTable};

use crate::error::{Error, ParseError, Result};

/// Comparison direction of an atomic predicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    /// `s > π`, scored as `s - π`.
    GreaterThan,
    /// `s < π`, scored as `π - s`.
    LessThan,
}

/// Atomic comparison of one channel against a threshold in normalized units.
#[derive(Debug, Clone, PartialEq)]
pub struct Predicate {
    pub channel: String,
    pub direction: Direction,
    pub threshold: f64,
}

impl Predicate {
    pub fn new(channel: impl Into<String>, direction: Direction, threshold: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&threshold) {
            return Err(Error::InvalidFormula(format!(
                "predicate threshold {threshold} outside [-1, 1]"
            )));
        }
        Ok(Self {
            channel: channel.into(),
            direction,
            threshold,
        })
    }

    pub fn gt(channel: impl Into<String>, threshold: f64) -> Result<Self> {
        Self::new(channel, Direction::GreaterThan, threshold)
    }

    pub fn lt(channel: impl Into<String>, threshold: f64) -> Result<Self> {
        Self::new(channel, Direction::LessThan, threshold)
    }

    /// Signed margin `s - π` (or `π - s`) for a sample value `s`.
    #[inline]
    pub fn margin(&self, value: f64) -> f64 {
        match self.direction {
            Direction::GreaterThan => value - self.threshold,
            Direction::LessThan => self.threshold - value,
        }
    }
}

/// Closed window `[a, b]` of sample offsets with `b > a >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Interval {
    a: usize,
    b: usize,
}

impl Interval {
    pub fn new(a: usize, b: usize) -> Result<Self> {
        if b <= a {
            return Err(Error::InvalidFormula(format!(
                "interval [{a},{b}] must satisfy b > a"
            )));
        }
        Ok(Self { a, b })
    }

    pub fn start(&self) -> usize {
        self.a
    }

    pub fn end(&self) -> usize {
        self.b
    }

    /// Number of sample points in the window.
    pub fn len(&self) -> usize {
        self.b - self.a + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Absolute sample indices covered when the window is anchored at `t`.
    pub fn shifted(&self, t: usize) -> std::ops::RangeInclusive<usize> {
        (t + self.a)..=(t + self.b)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    True,
    False,
    Predicate(Predicate),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Globally {
        interval: Interval,
        sub: Box<Formula>,
    },
    Eventually {
        interval: Interval,
        sub: Box<Formula>,
    },
    Until {
        interval: Interval,
        lhs: Box<Formula>,
        rhs: Box<Formula>,
    },
}

impl Formula {
    pub fn predicate(p: Predicate) -> Self {
        Formula::Predicate(p)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(sub: Formula) -> Self {
        Formula::Not(Box::new(sub))
    }

    pub fn and(subs: Vec<Formula>) -> Result<Self> {
        if subs.len() < 2 {
            return Err(Error::InvalidFormula(
                "conjunction needs at least two operands".into(),
            ));
        }
        Ok(Formula::And(subs))
    }

    pub fn or(subs: Vec<Formula>) -> Result<Self> {
        if subs.len() < 2 {
            return Err(Error::InvalidFormula(
                "disjunction needs at least two operands".into(),
            ));
        }
        Ok(Formula::Or(subs))
    }

    /// `lhs -> rhs`, stored as `!lhs || rhs`.
    pub fn implies(lhs: Formula, rhs: Formula) -> Self {
        Formula::Or(vec![Formula::not(lhs), rhs])
    }

    pub fn globally(a: usize, b: usize, sub: Formula) -> Result<Self> {
        Ok(Formula::Globally {
            interval: Interval::new(a, b)?,
            sub: Box::new(sub),
        })
    }

    pub fn eventually(a: usize, b: usize, sub: Formula) -> Result<Self> {
        Ok(Formula::Eventually {
            interval: Interval::new(a, b)?,
            sub: Box::new(sub),
        })
    }

    pub fn until(a: usize, b: usize, lhs: Formula, rhs: Formula) -> Result<Self> {
        Ok(Formula::Until {
            interval: Interval::new(a, b)?,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        })
    }

    /// Largest sample offset (relative to the evaluation time) that evaluation reads.
    pub fn horizon(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Predicate(_) => 0,
            Formula::Not(sub) => sub.horizon(),
            Formula::And(subs) | Formula::Or(subs) => {
                subs.iter().map(Formula::horizon).max().unwrap_or(0)
            }
            Formula::Globally { interval, sub } | Formula::Eventually { interval, sub } => {
                interval.end() + sub.horizon()
            }
            Formula::Until { interval, lhs, rhs } => {
                interval.end() + lhs.horizon().max(rhs.horizon())
            }
        }
    }

    /// Immediate subformulas, in order.
    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::True | Formula::False | Formula::Predicate(_) => Vec::new(),
            Formula::Not(sub)
            | Formula::Globally { sub, .. }
            | Formula::Eventually { sub, .. } => vec![sub.as_ref()],
            Formula::And(subs) | Formula::Or(subs) => subs.iter().collect(),
            Formula::Until { lhs, rhs, .. } => vec![lhs.as_ref(), rhs.as_ref()],
        }
    }

    pub fn depth(&self) -> usize {
        1 + self
            .children()
            .into_iter()
            .map(Formula::depth)
            .max()
            .unwrap_or(0)
    }

    /// Names of every channel referenced by a predicate.
    pub fn channels(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_channels(&mut out);
        out
    }

    fn collect_channels<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        if let Formula::Predicate(p) = self {
            out.insert(p.channel.as_str());
        }
        for child in self.children() {
            child.collect_channels(out);
        }
    }

    pub fn contains_until(&self) -> bool {
        matches!(self, Formula::Until { .. }) || self.children().iter().any(|c| c.contains_until())
    }

    /// True when a `true`/`false` literal appears anywhere.
    pub fn contains_constant(&self) -> bool {
        matches!(self, Formula::True | Formula::False)
            || self.children().iter().any(|c| c.contains_constant())
    }

    fn is_atomic(&self) -> bool {
        matches!(self, Formula::True | Formula::False | Formula::Predicate(_))
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.direction {
            Direction::GreaterThan => '>',
            Direction::LessThan => '<',
        };
        write!(f, "{} {} {}", self.channel, op, self.threshold)
    }
}

struct Operand<'a>(&'a Formula);

impl fmt::Display for Operand<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_atomic() || matches!(self.0, Formula::And(_) | Formula::Or(_)) {
            write!(f, "{}", self.0)
        } else {
            write!(f, "({})", self.0)
        }
    }
}

fn join(f: &mut fmt::Formatter<'_>, subs: &[Formula], op: &str) -> fmt::Result {
    f.write_str("(")?;
    for (i, sub) in subs.iter().enumerate() {
        if i > 0 {
            write!(f, " {op} ")?;
        }
        write!(f, "{}", Operand(sub))?;
    }
    f.write_str(")")
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => f.write_str("true"),
            Formula::False => f.write_str("false"),
            Formula::Predicate(p) => write!(f, "{p}"),
            Formula::Not(sub) => write!(f, "!{}", Operand(sub)),
            Formula::And(subs) => join(f, subs, "&&"),
            Formula::Or(subs) => join(f, subs, "||"),
            Formula::Globally { interval, sub } => {
                write!(f, "G[{},{}] {}", interval.a, interval.b, Operand(sub))
            }
            Formula::Eventually { interval, sub } => {
                write!(f, "F[{},{}] {}", interval.a, interval.b, Operand(sub))
            }
            Formula::Until { interval, lhs, rhs } => write!(
                f,
                "({} U[{},{}] {})",
                Operand(lhs),
                interval.a,
                interval.b,
                Operand(rhs)
            ),
        }
    }
}

impl FromStr for Formula {
    type Err = ParseError;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        parse(s)
    }
}
