//! Robustness-maximizing control synthesis.
//!
//! The decision variable is the whole input sequence `u[0..T]`. It is
//! optimized in box-normalized coordinates `z ∈ [-1, 1]^(T·m)` by projected
//! sub-gradient ascent: central finite-difference gradients, a normalized
//! step of length `α0 / sqrt(i + 1)`, and clamping onto the box after every
//! step. Rollouts that leave the state box score `-∞`.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{SystemModel, Trajectory};
use crate::error::{Error, Result};
use crate::formula::Formula;
use crate::robustness::{Evaluator, Semantics};

/// User-supplied stage cost taking `(u[k], q[k+1])`.
pub type StageCost = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;

/// Stage cost `J(u[k], q[k+1])`.
#[derive(Clone, Default)]
pub enum Cost {
    /// `‖u[k]‖²`.
    #[default]
    Quadratic,
    Custom(StageCost),
}

impl Cost {
    pub fn stage(&self, u: &[f64], q_next: &[f64]) -> f64 {
        match self {
            Cost::Quadratic => u.iter().map(|v| v * v).sum(),
            Cost::Custom(f) => f(u, q_next),
        }
    }
}

impl fmt::Debug for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cost::Quadratic => f.write_str("Quadratic"),
            Cost::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthesisProblem {
    model: SystemModel,
    spec: Formula,
    horizon: usize,
    lambda: f64,
    cost: Cost,
    evaluator: Evaluator,
}

impl SynthesisProblem {
    /// `horizon` is the number of inputs `T`; the rollout has `T + 1` states.
    pub fn new(
        model: SystemModel,
        spec: Formula,
        horizon: usize,
        lambda: f64,
        semantics: Semantics,
    ) -> Result<Self> {
        if spec.contains_until() {
            return Err(Error::UntilUnsupported);
        }
        let needed = spec.horizon();
        if horizon < needed {
            return Err(Error::InvalidConfig(format!(
                "horizon {horizon} is shorter than the formula horizon {needed}"
            )));
        }
        if horizon == 0 {
            return Err(Error::InvalidConfig("horizon must be at least 1".into()));
        }
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "lambda must be finite and non-negative, got {lambda}"
            )));
        }
        if !matches!(semantics, Semantics::Agm(_)) && spec.contains_constant() {
            return Err(Error::InvalidConfig(
                "true/false literals have infinite robustness under this semantics and cannot be optimized".into(),
            ));
        }
        for ch in spec.channels() {
            if !model.outputs().iter().any(|o| o.channel == ch) {
                return Err(Error::UnknownChannel(ch.to_string()));
            }
        }
        Ok(Self {
            model,
            spec,
            horizon,
            lambda,
            cost: Cost::Quadratic,
            evaluator: Evaluator::new(semantics),
        })
    }

    pub fn with_cost(mut self, cost: Cost) -> Self {
        self.cost = cost;
        self
    }

    pub fn model(&self) -> &SystemModel {
        &self.model
    }

    pub fn spec(&self) -> &Formula {
        &self.spec
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn semantics(&self) -> Semantics {
        self.evaluator.semantics
    }

    /// Number of scalar decision variables, `T · m`.
    pub fn dimension(&self) -> usize {
        self.horizon * self.model.input_dim()
    }

    /// Robustness of the rollout minus `λ Σ J`; `-∞` if the rollout leaves the state box.
    pub fn objective(&self, u_flat: &[f64]) -> Result<f64> {
        if u_flat.len() != self.dimension() {
            return Err(Error::InvalidConfig(format!(
                "expected {} input values, got {}",
                self.dimension(),
                u_flat.len()
            )));
        }
        let traj = self.model.simulate_flat(u_flat)?;
        let trace = match self.model.to_trace(&traj) {
            Ok(t) => t,
            Err(Error::StateOutOfBox { .. }) => return Ok(f64::NEG_INFINITY),
            Err(e) => return Err(e),
        };
        let rob = self.evaluator.score(&self.spec, &trace, 0)?;
        if self.lambda == 0.0 {
            return Ok(rob);
        }
        let m = self.model.input_dim();
        let cost: f64 = u_flat
            .chunks(m)
            .zip(&traj[1..])
            .map(|(u, q)| self.cost.stage(u, q))
            .sum();
        Ok(rob - self.lambda * cost)
    }

    fn to_physical(&self, z: &[f64]) -> Vec<f64> {
        let bx = self.model.input_box();
        let m = bx.len();
        z.iter()
            .enumerate()
            .map(|(i, &zi)| {
                let r = &bx[i % m];
                (r.center() + r.half_width() * zi).clamp(r.min, r.max)
            })
            .collect()
    }

    fn to_normalized(&self, u: &[f64]) -> Vec<f64> {
        let bx = self.model.input_box();
        let m = bx.len();
        u.iter()
            .enumerate()
            .map(|(i, &ui)| {
                let r = &bx[i % m];
                ((ui - r.center()) / r.half_width()).clamp(-1.0, 1.0)
            })
            .collect()
    }

    fn objective_normalized(&self, z: &[f64]) -> Result<f64> {
        self.objective(&self.to_physical(z))
    }

    /// Splits a flat input vector into per-step inputs.
    pub fn unflatten(&self, u_flat: &[f64]) -> Vec<Vec<f64>> {
        u_flat.chunks(self.model.input_dim()).map(<[f64]>::to_vec).collect()
    }
}

/// Box-constrained central differences.
///
/// Probes are clamped to `[lower, upper]`; when one probe scores `-∞` the
/// difference falls back to the one-sided quotient through `x`, and when
/// both do the component is zero.
pub fn central_difference<F>(f: F, x: &[f64], h: f64, lower: &[f64], upper: &[f64]) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let mut probe = x.to_vec();
    let mut centre: Option<f64> = None;
    let mut grad = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let xi = x[i];
        let hi = (xi + h).min(upper[i]);
        let lo = (xi - h).max(lower[i]);
        probe[i] = hi;
        let f_hi = f(&probe)?;
        probe[i] = lo;
        let f_lo = f(&probe)?;
        probe[i] = xi;
        let g = match (f_hi.is_finite(), f_lo.is_finite()) {
            (true, true) if hi > lo => (f_hi - f_lo) / (hi - lo),
            (true, false) | (false, true) => {
                let fx = match centre {
                    Some(v) => v,
                    None => *centre.insert(f(x)?),
                };
                if !fx.is_finite() {
                    0.0
                } else if f_hi.is_finite() && hi > xi {
                    (f_hi - fx) / (hi - xi)
                } else if f_lo.is_finite() && xi > lo {
                    (fx - f_lo) / (xi - lo)
                } else {
                    0.0
                }
            }
            _ => 0.0,
        };
        grad.push(g);
    }
    Ok(grad)
}

/// Finite-difference gradient of [`SynthesisProblem::objective`] with respect
/// to the physical inputs. `h` is in normalized input units.
pub fn fd_gradient(problem: &SynthesisProblem, u_flat: &[f64], h: f64) -> Result<Vec<f64>> {
    let z = problem.to_normalized(u_flat);
    let n = z.len();
    let g = central_difference(
        |z| problem.objective_normalized(z),
        &z,
        h,
        &vec![-1.0; n],
        &vec![1.0; n],
    )?;
    let bx = problem.model.input_box();
    Ok(g
        .iter()
        .enumerate()
        .map(|(i, gz)| gz / bx[i % bx.len()].half_width())
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub max_iters: usize,
    /// Initial step length in normalized input units.
    pub step0: f64,
    /// Finite-difference step in normalized input units.
    pub fd_step: f64,
    /// Extra runs from fresh random starts when a run ends infeasible.
    pub restarts: usize,
    pub seed: u64,
    /// Iterations without best-score improvement before a run stops.
    pub stall_window: usize,
    pub stall_tolerance: f64,
    /// Random draws allowed when searching for a start whose rollout stays in the state box.
    pub init_attempts: usize,
    /// Step halvings tried when a step leaves the state box.
    pub backtracks: usize,
    /// Step along `g / |g|` instead of `g`.
    pub normalize_gradient: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_iters: 300,
            step0: 0.1,
            fd_step: 1e-4,
            restarts: 5,
            seed: 0,
            stall_window: 50,
            stall_tolerance: 1e-6,
            init_attempts: 1000,
            backtracks: 8,
            normalize_gradient: true,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("step0", self.step0),
            ("fd_step", self.fd_step),
            ("stall_tolerance", self.stall_tolerance),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        if self.max_iters == 0 || self.stall_window == 0 || self.init_attempts == 0 {
            return Err(Error::InvalidConfig(
                "max_iters, stall_window and init_attempts must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisResult {
    pub u_star: Vec<Vec<f64>>,
    pub trajectory: Trajectory,
    pub score: f64,
    /// Best score seen so far, one entry per iteration across all runs.
    pub score_history: Vec<f64>,
    pub feasible: bool,
    pub iterations: usize,
    pub restarts: usize,
    /// Objective evaluations that left the state box.
    pub state_violations: usize,
}

struct Run {
    z: Vec<f64>,
    score: f64,
    iterations: usize,
}

struct Ascent<'a> {
    problem: &'a SynthesisProblem,
    config: &'a OptimizerConfig,
    history: Vec<f64>,
    global_best: f64,
    violations: usize,
}

impl Ascent<'_> {
    fn eval(&mut self, z: &[f64]) -> Result<f64> {
        let v = self.problem.objective_normalized(z)?;
        if v == f64::NEG_INFINITY {
            self.violations += 1;
        }
        Ok(v)
    }

    fn initial_point(&mut self, rng: &mut ChaCha8Rng) -> Result<(Vec<f64>, f64)> {
        let n = self.problem.dimension();
        let mut last = (vec![0.0; n], f64::NEG_INFINITY);
        for _ in 0..self.config.init_attempts {
            let z: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
            let f = self.eval(&z)?;
            if f.is_finite() {
                return Ok((z, f));
            }
            last = (z, f);
        }
        Ok(last)
    }

    /// Spends `max_iters` iterations; a stall re-seeds from a fresh random start.
    fn run(&mut self, rng: &mut ChaCha8Rng) -> Result<Run> {
        let cfg = self.config;
        let n = self.problem.dimension();
        let (lower, upper) = (vec![-1.0; n], vec![1.0; n]);
        let (mut z, mut fz) = self.initial_point(rng)?;
        let mut best = Run {
            z: z.clone(),
            score: fz,
            iterations: 0,
        };
        // Per-start state: local iteration counter and its best score.
        let mut local_i = 0usize;
        let mut local_best = fz;
        let mut last_gain = 0usize;
        for i in 0..cfg.max_iters {
            best.iterations = i + 1;
            if !fz.is_finite() {
                (z, fz) = self.initial_point(rng)?;
                (local_i, local_best, last_gain) = (0, fz, 0);
                self.record(&mut best, &z, fz);
                if !fz.is_finite() {
                    break;
                }
                continue;
            }
            let problem = self.problem;
            let g = central_difference(|p| problem.objective_normalized(p), &z, cfg.fd_step, &lower, &upper)?;
            let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            let scale = if cfg.normalize_gradient { norm } else { 1.0 };
            let mut moved = false;
            if norm > 0.0 {
                let mut alpha = cfg.step0 / ((local_i + 1) as f64).sqrt();
                for _ in 0..=cfg.backtracks {
                    let cand: Vec<f64> = z
                        .iter()
                        .zip(&g)
                        .map(|(zi, gi)| (zi + alpha * gi / scale).clamp(-1.0, 1.0))
                        .collect();
                    let fc = self.eval(&cand)?;
                    if fc.is_finite() {
                        z = cand;
                        fz = fc;
                        moved = true;
                        break;
                    }
                    alpha *= 0.5;
                }
            }
            if fz > local_best + cfg.stall_tolerance {
                last_gain = local_i;
            }
            local_best = local_best.max(fz);
            self.record(&mut best, &z, fz);
            local_i += 1;
            if !moved || local_i - last_gain >= cfg.stall_window {
                (z, fz) = self.initial_point(rng)?;
                (local_i, local_best, last_gain) = (0, fz, 0);
            }
        }
        Ok(best)
    }

    fn record(&mut self, best: &mut Run, z: &[f64], fz: f64) {
        if fz > best.score {
            best.score = fz;
            best.z = z.to_vec();
        }
        self.global_best = self.global_best.max(best.score);
        self.history.push(self.global_best);
    }
}

/// Projected gradient ascent from random starts; returns the best run.
pub fn gradient_ascent(problem: &SynthesisProblem, config: &OptimizerConfig) -> Result<SynthesisResult> {
    config.validate()?;
    let mut ascent = Ascent {
        problem,
        config,
        history: Vec::with_capacity(config.max_iters),
        global_best: f64::NEG_INFINITY,
        violations: 0,
    };
    let mut best: Option<Run> = None;
    let mut iterations = 0;
    let mut restarts = 0;
    for attempt in 0..=config.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(attempt as u64);
        let run = ascent.run(&mut rng)?;
        iterations += run.iterations;
        restarts = attempt;
        let feasible = run.score > 0.0;
        if best.as_ref().is_none_or(|b| run.score > b.score) {
            best = Some(run);
        }
        if feasible {
            break;
        }
    }
    let best = best.expect("at least one run");
    let u_flat = problem.to_physical(&best.z);
    let trajectory = problem.model.simulate_flat(&u_flat)?;
    Ok(SynthesisResult {
        u_star: problem.unflatten(&u_flat),
        trajectory,
        score: best.score,
        score_history: ascent.history,
        feasible: best.score > 0.0,
        iterations,
        restarts,
        state_violations: ascent.violations,
    })
}
