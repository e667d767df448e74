#![allow(dead_code)]

use agmstl::formula::{Direction, Formula, Predicate};
use agmstl::Trace;
use proptest::prelude::*;

pub const CHANNELS: [&str; 2] = ["a", "b"];

/// Thresholds on a coarse grid so printed formulas stay short.
fn threshold() -> impl Strategy<Value = f64> {
    (-18i32..=18).prop_map(|k| k as f64 / 20.0)
}

fn predicate() -> impl Strategy<Value = Formula> {
    (0..CHANNELS.len(), any::<bool>(), threshold()).prop_map(|(c, gt, pi)| {
        let dir = if gt { Direction::GreaterThan } else { Direction::LessThan };
        Formula::Predicate(Predicate::new(CHANNELS[c], dir, pi).unwrap())
    })
}

fn window() -> impl Strategy<Value = (usize, usize)> {
    (0usize..3, 1usize..4).prop_map(|(a, len)| (a, a + len))
}

/// Until-free, constant-free formulas of depth at most `depth`.
pub fn formula(depth: u32) -> impl Strategy<Value = Formula> {
    predicate().prop_recursive(depth, 24, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            prop::collection::vec(inner.clone(), 2..4).prop_map(|v| Formula::and(v).unwrap()),
            prop::collection::vec(inner.clone(), 2..4).prop_map(|v| Formula::or(v).unwrap()),
            (window(), inner.clone()).prop_map(|((a, b), f)| Formula::globally(a, b, f).unwrap()),
            (window(), inner).prop_map(|((a, b), f)| Formula::eventually(a, b, f).unwrap()),
        ]
    })
}

pub fn trace(len: usize) -> impl Strategy<Value = Trace> {
    prop::collection::vec(prop::collection::vec(-1.0f64..=1.0, CHANNELS.len()), len).prop_map(|rows| {
        Trace::new(CHANNELS.iter().map(|s| s.to_string()).collect(), rows).unwrap()
    })
}

/// A formula with a trace long enough to evaluate it at time 0.
pub fn formula_and_trace(depth: u32) -> impl Strategy<Value = (Formula, Trace)> {
    (formula(depth), 0usize..3).prop_flat_map(|(f, extra)| {
        let len = f.horizon() + 1 + extra;
        (Just(f), trace(len))
    })
}

fn value(p: &Predicate, s: &Trace, t: usize) -> f64 {
    s.value(t, s.channel_index(&p.channel).unwrap())
}

/// Direct min/max recursion, written independently of the library.
pub fn naive_traditional(f: &Formula, s: &Trace, t: usize) -> f64 {
    match f {
        Formula::True => f64::INFINITY,
        Formula::False => f64::NEG_INFINITY,
        Formula::Predicate(p) => match p.direction {
            Direction::GreaterThan => value(p, s, t) - p.threshold,
            Direction::LessThan => p.threshold - value(p, s, t),
        },
        Formula::Not(g) => -naive_traditional(g, s, t),
        Formula::And(v) => v.iter().map(|g| naive_traditional(g, s, t)).fold(f64::INFINITY, f64::min),
        Formula::Or(v) => v.iter().map(|g| naive_traditional(g, s, t)).fold(f64::NEG_INFINITY, f64::max),
        Formula::Globally { interval, sub } => interval
            .shifted(t)
            .map(|k| naive_traditional(sub, s, k))
            .fold(f64::INFINITY, f64::min),
        Formula::Eventually { interval, sub } => interval
            .shifted(t)
            .map(|k| naive_traditional(sub, s, k))
            .fold(f64::NEG_INFINITY, f64::max),
        Formula::Until { .. } => unreachable!(),
    }
}

/// `(Π (1 + v_i))^(1/n) - 1` by plain products.
fn gm(values: &[f64]) -> f64 {
    let p: f64 = values.iter().map(|v| 1.0 + v).product();
    p.powf(1.0 / values.len() as f64) - 1.0
}

fn naive_and(v: &[f64]) -> f64 {
    if v.iter().all(|&x| x > 0.0) {
        gm(v)
    } else {
        v.iter().map(|&x| x.min(0.0)).sum::<f64>() / v.len() as f64
    }
}

fn naive_or(v: &[f64]) -> f64 {
    if v.iter().any(|&x| x > 0.0) {
        v.iter().map(|&x| x.max(0.0)).sum::<f64>() / v.len() as f64
    } else {
        let flipped: Vec<f64> = v.iter().map(|x| -x).collect();
        -gm(&flipped)
    }
}

/// AGM from the branch definitions with half-scaled predicates.
pub fn naive_agm(f: &Formula, s: &Trace, t: usize) -> f64 {
    let sub = |g: &Formula, k: usize| naive_agm(g, s, k);
    match f {
        Formula::True => 1.0,
        Formula::False => -1.0,
        Formula::Predicate(_) => naive_traditional(f, s, t) / 2.0,
        Formula::Not(g) => -sub(g, t),
        Formula::And(v) => naive_and(&v.iter().map(|g| sub(g, t)).collect::<Vec<_>>()),
        Formula::Or(v) => naive_or(&v.iter().map(|g| sub(g, t)).collect::<Vec<_>>()),
        Formula::Globally { interval, sub: g } => {
            naive_and(&interval.shifted(t).map(|k| sub(g, k)).collect::<Vec<_>>())
        }
        Formula::Eventually { interval, sub: g } => {
            naive_or(&interval.shifted(t).map(|k| sub(g, k)).collect::<Vec<_>>())
        }
        Formula::Until { .. } => unreachable!(),
    }
}
