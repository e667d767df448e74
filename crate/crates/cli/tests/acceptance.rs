//! Acceptance checks. Runs as a plain binary so every criterion prints a line.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::path::PathBuf;
use std::time::{Duration, Instant};

use agmstl::disturbance::failure_rate;
use agmstl::formula::{parse, Formula, Region};
use agmstl::logic_algebra::{conj, disj, implies, neg, ScoreScalar};
use agmstl::robustness::{agm, agm_scaled, smooth_max, smooth_min, traditional, Evaluator};
use agmstl::synthesis::{central_difference, gradient_ascent};
use agmstl::{PredicateScale, Semantics, Trace};
use agmstl_cli::{Problem, ProblemConfig};
use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::TestRunner;

// Tolerances and sample sizes, pinned from the acceptance criteria.
const CONJ_02_1: f64 = 0.549;
const CONJ_02_1_TOL: f64 = 0.005;
const FIG1_TOL: f64 = 1e-9;
const FIG1_G_TOL: f64 = 0.005;
const SOUNDNESS_CASES: usize = 10_000;
const SOUNDNESS_ZERO_BAND: f64 = 1e-9;
const LAW_POINTS: usize = 1_000;
const SMOOTH_NESTED_CASES: usize = 100;
const GRADIENT_POINTS: usize = 100;
const GRADIENT_H: f64 = 1e-4;
const GRADIENT_REL_TOL: f64 = 1e-3;
const P3_SEEDS: u64 = 20;
const P3_MIN_FEASIBLE: usize = 16;
const P3_BUDGET: Duration = Duration::from_secs(30);
const P12_MAX_RESTARTS: usize = 5;
const DISTURB_RUNS: usize = 100;
const DISTURB_BETA: f64 = 10.0;
const DISTURB_MIN_WINS: usize = 2;
const DISTURB_BUDGET: Duration = Duration::from_secs(60);

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn s(v: f64) -> ScoreScalar {
    ScoreScalar::new(v).unwrap()
}

fn config(name: &str) -> ProblemConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    ProblemConfig::load(path).unwrap()
}

fn boolean_examples() -> Check {
    let d = disj(s(1.0), s(0.2)).value();
    let c = conj(s(0.2), s(1.0)).value();
    let i = conj(s(0.2), s(0.2)).value();
    ensure(d == 0.6, || format!("disj(1, 0.2) = {d}"))?;
    ensure((c - CONJ_02_1).abs() <= CONJ_02_1_TOL, || format!("conj(0.2, 1) = {c}"))?;
    ensure(i == 0.2, || format!("conj(0.2, 0.2) = {i}"))?;
    Ok(format!("disj(1,0.2)={d} conj(0.2,1)={c:.4} conj(0.2,0.2)={i}"))
}

fn signal_family() -> Check {
    let left = [
        [0.0, 1.0, 1.0, 1.0, 1.0],
        [0.0, 1.0, 1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0, 0.0],
    ];
    let right = [
        [1.0, 1.0, 1.0, 1.0, 1.0],
        [1.0, 1.0, 1.0, 1.0, 0.6],
        [0.6, 0.6, 0.6, 0.6, 0.6],
    ];
    let phi1 = parse("F[1,4] s > 0.5").unwrap();
    let phi2 = parse("G[0,4] s > 0.5").unwrap();
    let score = |phi: &Formula, v: &[f64], scale| agm_scaled(phi, &Trace::from_samples("s", v), 0, scale).unwrap().score;
    let rho = |phi: &Formula, v: &[f64]| traditional(phi, &Trace::from_samples("s", v), 0).unwrap().score;

    let eta1: Vec<f64> = left.iter().map(|v| score(&phi1, v, PredicateScale::Unit)).collect();
    for (got, want) in eta1.iter().zip([0.5, 0.25, 0.125]) {
        ensure((got - want).abs() <= FIG1_TOL, || format!("eta(phi1) {eta1:?}"))?;
    }
    let eta2: Vec<f64> = right.iter().map(|v| score(&phi2, v, PredicateScale::Unit)).collect();
    for (got, want, tol) in [(eta2[0], 0.5, FIG1_TOL), (eta2[1], 0.41, FIG1_G_TOL), (eta2[2], 0.1, FIG1_TOL)] {
        ensure((got - want).abs() <= tol, || format!("eta(phi2) {eta2:?}"))?;
    }
    let rho1: Vec<f64> = left.iter().map(|v| rho(&phi1, v)).collect();
    let rho2: Vec<f64> = right.iter().map(|v| rho(&phi2, v)).collect();
    for (got, want) in rho1.iter().chain(&rho2).zip([0.5, 0.5, 0.5, 0.5, 0.1, 0.1]) {
        ensure((got - want).abs() <= FIG1_TOL, || format!("rho {rho1:?} {rho2:?}"))?;
    }
    for (phi, signals) in [(&phi1, &left), (&phi2, &right)] {
        let h: Vec<f64> = signals.iter().map(|v| score(phi, v, PredicateScale::Half)).collect();
        ensure(h[0] > h[1] && h[1] > h[2], || format!("half-scale ordering {h:?}"))?;
    }
    Ok(format!("F: {eta1:?}  G: [{:.1}, {:.4}, {:.1}]", eta2[0], eta2[1], eta2[2]))
}

fn soundness() -> Check {
    let mut runner = TestRunner::deterministic();
    let strategy = common::formula(4)
        .prop_filter("horizon fits a 20-sample trace", |f| f.horizon() < 20)
        .prop_flat_map(|f| {
            let len = (f.horizon() + 1)..=20;
            (proptest::strategy::Just(f), len)
        })
        .prop_flat_map(|(f, len)| (proptest::strategy::Just(f), common::trace(len)));
    let (mut checked, mut skipped) = (0, 0);
    while checked + skipped < SOUNDNESS_CASES {
        let (f, trace) = strategy.new_tree(&mut runner).unwrap().current();
        let rho = traditional(&f, &trace, 0).unwrap().score;
        let eta = agm(&f, &trace, 0).unwrap().score;
        if rho.abs() <= SOUNDNESS_ZERO_BAND {
            skipped += 1;
            continue;
        }
        ensure((rho > 0.0) == (eta > 0.0), || format!("rho {rho} eta {eta} for {f}"))?;
        checked += 1;
    }
    Ok(format!("{checked} sign agreements, {skipped} within the zero band, 0 violations"))
}

fn laws() -> Check {
    let mut runner = TestRunner::deterministic();
    let unit = -1.0f64..=1.0;
    let open = -0.999_999f64..0.999_999;
    let mut draw = |r: std::ops::RangeInclusive<f64>| r.new_tree(&mut runner).unwrap().current();
    let mut pts = Vec::with_capacity(LAW_POINTS);
    while pts.len() < LAW_POINTS {
        let (x, y, u, v) = (draw(unit.clone()), draw(unit.clone()), draw(unit.clone()), draw(unit.clone()));
        if x != 0.0 && y != 0.0 {
            pts.push((x, y, u, v));
        }
    }
    let mut interior = Vec::with_capacity(LAW_POINTS);
    {
        let mut runner = TestRunner::deterministic();
        for _ in 0..LAW_POINTS {
            interior.push(open.clone().new_tree(&mut runner).unwrap().current());
        }
    }
    let mut count = 0;
    for &(x, y, u, v) in &pts {
        let (sx, sy) = (s(x), s(y));
        let fail = |law: &str| format!("{law} fails at x={x} y={y} u={u} v={v}");
        ensure(conj(sx, sy) == conj(sy, sx) && disj(sx, sy) == disj(sy, sx), || fail("commutativity"))?;
        let (lo_x, hi_x) = (x.min(u), x.max(u));
        let (lo_y, hi_y) = (y.min(v), y.max(v));
        ensure(
            conj(s(lo_x), s(lo_y)).value() <= conj(s(hi_x), s(hi_y)).value()
                && disj(s(lo_x), s(lo_y)).value() <= disj(s(hi_x), s(hi_y)).value(),
            || fail("monotonicity"),
        )?;
        ensure(conj(sx, sx).value() == x && disj(sx, sx).value() == x, || fail("idempotence"))?;
        ensure(disj(sx, sy).value() == -conj(neg(sx), neg(sy)).value(), || fail("DeMorgan"))?;
        ensure(neg(neg(sx)).value() == x, || fail("double negation"))?;
        ensure(conj(sx, neg(sx)).value() < 0.0, || fail("non-contradiction"))?;
        ensure(disj(sx, neg(sx)).value() > 0.0, || fail("excluded middle"))?;
        if implies(sx, sy).value() > 0.0 && x > 0.0 {
            ensure(y > 0.0, || fail("modus ponens"))?;
        }
        ensure(conj(sx, neg(sx)).value() <= disj(sy, neg(sy)).value(), || fail("Kleene"))?;
        count += 1;
    }
    for &x in &interior {
        ensure(conj(s(x), s(-1.0)).value() < 0.0 && disj(s(x), s(1.0)).value() > 0.0, || {
            format!("weak absorption fails at {x}")
        })?;
    }
    // Distributivity fails: x ∧ (y ∨ z) differs from (x ∧ y) ∨ (x ∧ z).
    let (x, y, z) = (s(0.5), s(0.5), s(-0.5));
    let lhs = conj(x, disj(y, z)).value();
    let rhs = disj(conj(x, y), conj(x, z)).value();
    ensure((lhs - rhs).abs() > 1e-3, || format!("distributivity unexpectedly holds: {lhs} {rhs}"))?;
    Ok(format!(
        "{count} pairs x 9 laws, {} weak-absorption points, distributivity counterexample {lhs:.4} != {rhs:.4}",
        interior.len()
    ))
}

fn smooth_bounds() -> Check {
    let mut runner = TestRunner::deterministic();
    for m in [2usize, 5, 10] {
        for beta in [1.0, 10.0, 100.0] {
            for _ in 0..200 {
                let v = proptest::collection::vec(-1.0f64..=1.0, m).new_tree(&mut runner).unwrap().current();
                let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let min = v.iter().copied().fold(f64::INFINITY, f64::min);
                let bound = (m as f64).ln() / beta + 1e-12;
                ensure((smooth_max(&v, beta) - max).abs() <= bound, || format!("max m={m} beta={beta} {v:?}"))?;
                ensure((smooth_min(&v, beta) - min).abs() <= bound, || format!("min m={m} beta={beta} {v:?}"))?;
            }
        }
    }
    let strategy = common::formula_and_trace(3).prop_filter("nested", |(f, _)| f.depth() >= 2);
    let sm = |beta: f64| Evaluator::new(Semantics::smooth(beta).unwrap());
    let mut worse = Vec::new();
    for _ in 0..SMOOTH_NESTED_CASES {
        let (f, trace) = strategy.new_tree(&mut runner).unwrap().current();
        let rho = traditional(&f, &trace, 0).unwrap().score;
        let e1 = (sm(1.0).score(&f, &trace, 0).unwrap() - rho).abs();
        let e100 = (sm(100.0).score(&f, &trace, 0).unwrap() - rho).abs();
        if e100 > e1 {
            worse.push(format!("{f}: beta=1 err {e1:.3e}, beta=100 err {e100:.3e}"));
        }
    }
    ensure(worse.is_empty(), || format!("{} nested cases worse at beta=100, e.g. {}", worse.len(), worse[0]))?;
    Ok(format!("1800 vectors within ln(m)/beta; {SMOOTH_NESTED_CASES} nested formulas tighter at beta=100"))
}

/// Every (subformula, time) score is clear of the branch switch at zero.
fn clear_of_kinks(f: &Formula, trace: &Trace, margin: f64) -> bool {
    let mut stack = vec![f];
    while let Some(g) = stack.pop() {
        for t in 0..trace.len().saturating_sub(g.horizon()) {
            if agm(g, trace, t).unwrap().score.abs() <= margin {
                return false;
            }
        }
        stack.extend(g.children());
    }
    true
}

fn gradients() -> Check {
    let mut runner = TestRunner::deterministic();
    let strategy = common::formula_and_trace(3);
    let (mut accepted, mut attempts) = (0, 0);
    let mut worst: f64 = 0.0;
    while accepted < GRADIENT_POINTS {
        attempts += 1;
        ensure(attempts < 100 * GRADIENT_POINTS, || format!("only {accepted} usable points"))?;
        let (f, trace) = strategy.new_tree(&mut runner).unwrap().current();
        let cols = trace.channels().to_vec();
        let flat: Vec<f64> = trace.rows().flatten().map(|v| v.clamp(-0.95, 0.95)).collect();
        let rows: Vec<Vec<f64>> = flat.chunks(cols.len()).map(<[f64]>::to_vec).collect();
        let trace = Trace::new(cols.clone(), rows).unwrap();
        if !clear_of_kinks(&f, &trace, 1e-2) {
            continue;
        }
        let eval = |x: &[f64]| {
            let rows = x.chunks(cols.len()).map(<[f64]>::to_vec).collect();
            agm(&f, &Trace::new(cols.clone(), rows).unwrap(), 0).map(|v| v.score)
        };
        let (lo, hi) = (vec![-1.0; flat.len()], vec![1.0; flat.len()]);
        let g1 = central_difference(eval, &flat, GRADIENT_H, &lo, &hi).unwrap();
        let g2 = central_difference(eval, &flat, GRADIENT_H / 10.0, &lo, &hi).unwrap();
        let norm = g1.iter().map(|v| v * v).sum::<f64>().sqrt();
        let diff = g1.iter().zip(&g2).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        ensure(norm > 0.0, || format!("zero gradient for {f}"))?;
        let rel = diff / norm;
        ensure(rel <= GRADIENT_REL_TOL, || format!("h/10 drift {rel:.3e} for {f}"))?;
        worst = worst.max(rel);
        accepted += 1;
    }
    Ok(format!("{accepted} points (of {attempts} drawn), worst relative drift {worst:.2e}"))
}

fn inside(region: &Region, q: &[f64]) -> bool {
    region.contains(&[("x", q[0]), ("y", q[1])])
}

/// Closed rectangle membership, so touching the boundary counts as a hit.
fn touches(region: &Region, q: &[f64]) -> bool {
    region.bounds.iter().all(|b| {
        let v = if b.channel == "x" { q[0] } else { q[1] };
        (b.min..=b.max).contains(&v)
    })
}

fn visits(p: &Problem, name: &str, traj: &[Vec<f64>], window: std::ops::RangeInclusive<usize>) -> bool {
    let r = p.regions.get(name).unwrap();
    window.into_iter().any(|k| inside(r, &traj[k]))
}

fn synthesis() -> Check {
    let cfg3 = config("problem3.json");
    let p3 = cfg3.build().unwrap();
    let start = Instant::now();
    let mut feasible = 0;
    for seed in 0..P3_SEEDS {
        let mut oc = cfg3.optimizer.clone();
        oc.seed = seed;
        oc.restarts = 0;
        oc.max_iters = 300;
        if gradient_ascent(&p3.synthesis, &oc).unwrap().feasible {
            feasible += 1;
        }
    }
    let elapsed = start.elapsed();
    ensure(feasible >= P3_MIN_FEASIBLE, || format!("problem 3 feasible in {feasible}/{P3_SEEDS} seeds"))?;
    ensure(elapsed < P3_BUDGET, || format!("problem 3 took {elapsed:?}"))?;

    let mut notes = vec![format!("P3 {feasible}/{P3_SEEDS} seeds in {:.1}s", elapsed.as_secs_f64())];
    for (file, windows) in [
        ("problem1.json", vec![("reg1", 6..=10), ("reg2", 11..=15)]),
        ("problem2.json", vec![("reg3", 6..=10)]),
    ] {
        let cfg = config(file);
        let p = cfg.build().unwrap();
        let res = gradient_ascent(&p.synthesis, &cfg.optimizer).unwrap();
        ensure(res.feasible, || format!("{file}: infeasible, best {}", res.score))?;
        ensure(res.restarts <= P12_MAX_RESTARTS, || format!("{file}: {} restarts", res.restarts))?;
        let traj = &res.trajectory;
        let obs = p.regions.get("obs").unwrap();
        ensure(traj.iter().all(|q| !touches(obs, q)), || format!("{file}: trajectory touches Obs"))?;
        for (name, w) in windows {
            ensure(visits(&p, name, traj, w.clone()), || format!("{file}: no {name} visit in {w:?}"))?;
        }
        if file == "problem1.json" {
            let init = p.regions.get("init").unwrap();
            ensure((1..=5).all(|k| inside(init, &traj[k])), || "problem1: left Init during [1,5]".into())?;
        } else {
            ensure(
                visits(&p, "reg1", traj, 1..=5) || visits(&p, "reg2", traj, 1..=5),
                || "problem2: neither Reg1 nor Reg2 in [1,5]".into(),
            )?;
        }
        notes.push(format!("{file} eta={:.3} restarts={}", res.score, res.restarts));
    }
    Ok(notes.join("; "))
}

fn disturbance() -> Check {
    let start = Instant::now();
    let cfg = config("problem3.json");
    let p_agm = cfg.build().unwrap();
    let p_smooth = cfg.build_with(Semantics::smooth(DISTURB_BETA).unwrap()).unwrap();
    let u_agm = gradient_ascent(&p_agm.synthesis, &cfg.optimizer).unwrap();
    let u_smooth = gradient_ascent(&p_smooth.synthesis, &cfg.optimizer).unwrap();
    ensure(u_agm.feasible && u_smooth.feasible, || "a training run was infeasible".into())?;
    let mut wins = 0;
    let mut cells = Vec::new();
    for sigma in cfg.sigmas(&p_agm.model) {
        let mut d = cfg.disturbance_for(sigma);
        d.n_runs = DISTURB_RUNS;
        let ra = failure_rate(&p_agm.synthesis, &u_agm.u_star, &d).unwrap().rate;
        let rs = failure_rate(&p_agm.synthesis, &u_smooth.u_star, &d).unwrap().rate;
        if ra < rs {
            wins += 1;
        }
        cells.push(format!("sigma={sigma:.3} agm {:.0}% smooth {:.0}%", 100.0 * ra, 100.0 * rs));
    }
    let elapsed = start.elapsed();
    let summary = format!("{} ({wins}/3 lower, {:.1}s)", cells.join(", "), elapsed.as_secs_f64());
    ensure(elapsed < DISTURB_BUDGET, || format!("took {elapsed:?}"))?;
    ensure(wins >= DISTURB_MIN_WINS, || summary.clone())?;
    Ok(summary)
}

fn margin() -> Check {
    let phi = parse("F[1,4] s > 0.9").unwrap();
    let all_window = [0.0, 1.0, 1.0, 1.0, 1.0];
    let single = [0.0, 1.0, 0.0, 0.0, 0.0];
    let rho = |v: &[f64]| traditional(&phi, &Trace::from_samples("s", v), 0).unwrap().score;
    let eta = |v: &[f64]| agm_scaled(&phi, &Trace::from_samples("s", v), 0, PredicateScale::Unit).unwrap().score;
    ensure((rho(&single) - 0.1).abs() < 1e-12 && (eta(&all_window) - 0.1).abs() < 1e-12, || {
        format!("scores rho(single)={} eta(all)={}", rho(&single), eta(&all_window))
    })?;
    for d in [0.1 + 1e-9, 0.15, 0.5, 1.0] {
        let hit = |v: &[f64]| {
            let mut w = v.to_vec();
            w[1] -= d;
            w
        };
        ensure(rho(&hit(&single)) < 0.0, || format!("single-point signal survives d={d}"))?;
        ensure(rho(&hit(&all_window)) > 0.0 && eta(&hit(&all_window)) > 0.0, || {
            format!("four-point signal fails at d={d}")
        })?;
    }
    Ok("single-point signal flips for d>0.1, four-point signal stays satisfied".into())
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("worked boolean examples", boolean_examples),
        ("signal-family scores", signal_family),
        ("soundness fuzz", soundness),
        ("logic-algebra laws", laws),
        ("smooth approximation error", smooth_bounds),
        ("gradient stability", gradients),
        ("synthesis regression", synthesis),
        ("disturbance failure rates", disturbance),
        ("margin construction", margin),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("acceptance {}: PASS {name} ({secs:.2}s) {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("acceptance {}: FAIL {name} ({secs:.2}s) {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
