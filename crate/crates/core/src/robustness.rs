//! Quantitative semantics of bounded STL over discrete traces.
//!
//! Three semantics share one recursion and differ only in how they combine
//! operand scores:
//!
//! * traditional: `min`/`max`, exact and non-smooth;
//! * smooth: log-sum-exp soft `min`/`max` with sharpness `beta`;
//! * AGM: arithmetic and geometric means of clipped scores, bounded in
//!   `[-1, 1]` and sign-consistent with the traditional score.
//!
//! A window operator `G[a,b]` is the conjunction of its operand over the
//! window and `F[a,b]` the disjunction, so the combinators below serve both.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formula::{Formula, Predicate};
use crate::logic_algebra::{negative_part, positive_part};
use crate::signal::Trace;

/// How atomic AGM scores are derived from predicate margins.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PredicateScale {
    /// `(s - π) / 2`, which always lies in `[-1, 1]` for normalized inputs.
    #[default]
    Half,
    /// `s - π`, clipped to `[-1, 1]`.
    Unit,
}

impl PredicateScale {
    #[inline]
    fn apply(self, margin: f64) -> f64 {
        match self {
            PredicateScale::Half => 0.5 * margin,
            PredicateScale::Unit => margin.clamp(-1.0, 1.0),
        }
    }
}

/// Sharpness of the soft `min`/`max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothConfig {
    beta: f64,
}

impl SmoothConfig {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "beta must be finite and positive, got {beta}"
            )));
        }
        Ok(Self { beta })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// Score assigned to `true` by the traditional and smooth semantics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TopRobustness(f64);

impl TopRobustness {
    pub fn new(rho_top: f64) -> Result<Self> {
        if rho_top.is_nan() || rho_top <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "maximum robustness must be positive, got {rho_top}"
            )));
        }
        Ok(Self(rho_top))
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

impl Default for TopRobustness {
    fn default() -> Self {
        Self(f64::INFINITY)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Semantics {
    Traditional,
    Smooth(SmoothConfig),
    Agm(PredicateScale),
}

impl Semantics {
    pub fn agm() -> Self {
        Semantics::Agm(PredicateScale::Half)
    }

    pub fn smooth(beta: f64) -> Result<Self> {
        Ok(Semantics::Smooth(SmoothConfig::new(beta)?))
    }
}

impl fmt::Display for Semantics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Semantics::Traditional => f.write_str("traditional"),
            Semantics::Smooth(cfg) => write!(f, "smooth(beta={})", cfg.beta),
            Semantics::Agm(PredicateScale::Half) => f.write_str("agm"),
            Semantics::Agm(PredicateScale::Unit) => f.write_str("agm(unit)"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Status {
    Sat,
    Violated,
    Inconclusive,
}

impl Status {
    /// Sign of a score; exactly zero is inconclusive.
    pub fn of_score(score: f64) -> Status {
        if score > 0.0 {
            Status::Sat
        } else if score < 0.0 {
            Status::Violated
        } else {
            Status::Inconclusive
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Sat => "sat",
            Status::Violated => "violated",
            Status::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Verdict {
    pub score: f64,
    pub status: Status,
    pub semantics: Semantics,
}

impl Verdict {
    fn new(score: f64, semantics: Semantics) -> Self {
        Self {
            score,
            status: Status::of_score(score),
            semantics,
        }
    }
}

/// Soft maximum `(1/β) ln Σ exp(β a_i)`, evaluated with a max shift.
pub fn smooth_max(values: &[f64], beta: f64) -> f64 {
    let m = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m.is_infinite() {
        return m;
    }
    let sum: f64 = values.iter().map(|&a| (beta * (a - m)).exp()).sum();
    m + sum.ln() / beta
}

/// Soft minimum `-(1/β) ln Σ exp(-β a_i)`.
pub fn smooth_min(values: &[f64], beta: f64) -> f64 {
    let m = values.iter().copied().fold(f64::INFINITY, f64::min);
    if m.is_infinite() {
        return m;
    }
    let sum: f64 = values.iter().map(|&a| (-beta * (a - m)).exp()).sum();
    m - sum.ln() / beta
}

/// `(Π (1 + v_i))^(1/n) - 1`.
///
/// Computed relative to the smallest operand in log space, so a constant
/// input is returned unchanged and long windows do not underflow. A factor
/// `1 + v_i` of zero makes the product zero and the result `-1`.
pub fn shifted_geometric_mean(values: &[f64]) -> f64 {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let base = 1.0 + lo;
    if base <= 0.0 {
        return -1.0;
    }
    let n = values.len() as f64;
    let mean_log: f64 = values.iter().map(|&v| ((v - lo) / base).ln_1p()).sum::<f64>() / n;
    lo + base * mean_log.exp_m1()
}

/// AGM conjunction of `m` scores (also `G` over a window of `m` samples).
pub fn agm_and(values: &[f64]) -> f64 {
    if values.iter().all(|&v| v > 0.0) {
        shifted_geometric_mean(values).min(1.0)
    } else {
        values.iter().copied().map(negative_part).sum::<f64>() / values.len() as f64
    }
}

/// AGM disjunction of `m` scores (also `F` over a window of `m` samples).
pub fn agm_or(values: &[f64]) -> f64 {
    if values.iter().any(|&v| v > 0.0) {
        values.iter().copied().map(positive_part).sum::<f64>() / values.len() as f64
    } else {
        let flipped: Vec<f64> = values.iter().map(|v| -v).collect();
        (-shifted_geometric_mean(&flipped)).max(-1.0)
    }
}

trait Combinator {
    fn atom(&self, p: &Predicate, value: f64) -> f64;
    fn top(&self) -> f64;
    fn and(&self, values: &[f64]) -> f64;
    fn or(&self, values: &[f64]) -> f64;
}

struct Exact(f64);

impl Combinator for Exact {
    fn atom(&self, p: &Predicate, value: f64) -> f64 {
        p.margin(value)
    }
    fn top(&self) -> f64 {
        self.0
    }
    fn and(&self, values: &[f64]) -> f64 {
        values.iter().copied().fold(f64::INFINITY, f64::min)
    }
    fn or(&self, values: &[f64]) -> f64 {
        values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

struct Soft {
    beta: f64,
    top: f64,
}

impl Combinator for Soft {
    fn atom(&self, p: &Predicate, value: f64) -> f64 {
        p.margin(value)
    }
    fn top(&self) -> f64 {
        self.top
    }
    fn and(&self, values: &[f64]) -> f64 {
        smooth_min(values, self.beta)
    }
    fn or(&self, values: &[f64]) -> f64 {
        smooth_max(values, self.beta)
    }
}

struct Agm(PredicateScale);

impl Combinator for Agm {
    fn atom(&self, p: &Predicate, value: f64) -> f64 {
        self.0.apply(p.margin(value))
    }
    fn top(&self) -> f64 {
        1.0
    }
    fn and(&self, values: &[f64]) -> f64 {
        agm_and(values)
    }
    fn or(&self, values: &[f64]) -> f64 {
        agm_or(values)
    }
}

fn eval<C: Combinator>(c: &C, phi: &Formula, s: &Trace, t: usize) -> Result<f64> {
    Ok(match phi {
        Formula::True => c.top(),
        Formula::False => -c.top(),
        Formula::Predicate(p) => {
            let ch = s
                .channel_index(&p.channel)
                .ok_or_else(|| Error::UnknownChannel(p.channel.clone()))?;
            c.atom(p, s.value(t, ch))
        }
        Formula::Not(sub) => -eval(c, sub, s, t)?,
        Formula::And(subs) => {
            let v = subs.iter().map(|f| eval(c, f, s, t)).collect::<Result<Vec<_>>>()?;
            c.and(&v)
        }
        Formula::Or(subs) => {
            let v = subs.iter().map(|f| eval(c, f, s, t)).collect::<Result<Vec<_>>>()?;
            c.or(&v)
        }
        Formula::Globally { interval, sub } => {
            let v = interval
                .shifted(t)
                .map(|k| eval(c, sub, s, k))
                .collect::<Result<Vec<_>>>()?;
            c.and(&v)
        }
        Formula::Eventually { interval, sub } => {
            let v = interval
                .shifted(t)
                .map(|k| eval(c, sub, s, k))
                .collect::<Result<Vec<_>>>()?;
            c.or(&v)
        }
        Formula::Until { .. } => return Err(Error::UntilUnsupported),
    })
}

fn check_window(phi: &Formula, s: &Trace, t: usize) -> Result<()> {
    if phi.contains_until() {
        return Err(Error::UntilUnsupported);
    }
    let needed = phi.horizon() + 1;
    if t + needed > s.len() {
        return Err(Error::HorizonExceedsTrace {
            t,
            needed,
            available: s.len(),
        });
    }
    Ok(())
}

fn check_normalized(phi: &Formula, s: &Trace, t: usize) -> Result<()> {
    let last = t + phi.horizon();
    for name in phi.channels() {
        let ch = s
            .channel_index(name)
            .ok_or_else(|| Error::UnknownChannel(name.to_string()))?;
        for step in t..=last {
            let v = s.value(step, ch);
            if !(-1.0..=1.0).contains(&v) {
                return Err(Error::OutOfRange {
                    channel: name.to_string(),
                    step,
                    value: v,
                    min: -1.0,
                    max: 1.0,
                });
            }
        }
    }
    Ok(())
}

/// Evaluates a formula under a chosen semantics at sample `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluator {
    pub semantics: Semantics,
    pub top: TopRobustness,
}

impl Evaluator {
    pub fn new(semantics: Semantics) -> Self {
        Self {
            semantics,
            top: TopRobustness::default(),
        }
    }

    pub fn with_top(mut self, top: TopRobustness) -> Self {
        self.top = top;
        self
    }

    pub fn score(&self, phi: &Formula, s: &Trace, t: usize) -> Result<f64> {
        check_window(phi, s, t)?;
        match self.semantics {
            Semantics::Traditional => eval(&Exact(self.top.0), phi, s, t),
            Semantics::Smooth(cfg) => eval(
                &Soft {
                    beta: cfg.beta,
                    top: self.top.0,
                },
                phi,
                s,
                t,
            ),
            Semantics::Agm(scale) => {
                check_normalized(phi, s, t)?;
                eval(&Agm(scale), phi, s, t)
            }
        }
    }

    pub fn evaluate(&self, phi: &Formula, s: &Trace, t: usize) -> Result<Verdict> {
        Ok(Verdict::new(self.score(phi, s, t)?, self.semantics))
    }
}

/// Traditional min/max robustness with `ρ_⊤ = +∞`.
pub fn traditional(phi: &Formula, s: &Trace, t: usize) -> Result<Verdict> {
    Evaluator::new(Semantics::Traditional).evaluate(phi, s, t)
}

/// Log-sum-exp robustness with `ρ_⊤ = +∞`.
pub fn smooth(phi: &Formula, s: &Trace, t: usize, cfg: SmoothConfig) -> Result<Verdict> {
    Evaluator::new(Semantics::Smooth(cfg)).evaluate(phi, s, t)
}

/// AGM robustness with half-scaled predicates.
pub fn agm(phi: &Formula, s: &Trace, t: usize) -> Result<Verdict> {
    Evaluator::new(Semantics::agm()).evaluate(phi, s, t)
}

pub fn agm_scaled(phi: &Formula, s: &Trace, t: usize, scale: PredicateScale) -> Result<Verdict> {
    Evaluator::new(Semantics::Agm(scale)).evaluate(phi, s, t)
}

pub fn evaluate(phi: &Formula, s: &Trace, t: usize, semantics: Semantics) -> Result<Verdict> {
    Evaluator::new(semantics).evaluate(phi, s, t)
}

/// Three-valued satisfaction from the sign of the chosen score.
pub fn satisfies(phi: &Formula, s: &Trace, t: usize, semantics: Semantics) -> Result<Status> {
    Ok(evaluate(phi, s, t, semantics)?.status)
}
