//! Monte-Carlo failure rates of a fixed input sequence under Gaussian input noise.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::SystemModel;
use crate::error::{Error, Result};
use crate::robustness::{Evaluator, Semantics};
use crate::synthesis::SynthesisProblem;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DisturbanceConfig {
    /// Standard deviation in input units.
    pub sigma: f64,
    pub n_runs: usize,
    pub seed: u64,
}

impl Default for DisturbanceConfig {
    fn default() -> Self {
        Self {
            sigma: 0.0,
            n_runs: 100,
            seed: 0,
        }
    }
}

impl DisturbanceConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "sigma must be finite and non-negative, got {}",
                self.sigma
            )));
        }
        if self.n_runs == 0 {
            return Err(Error::InvalidConfig("n_runs must be at least 1".into()));
        }
        Ok(())
    }
}

/// Default noise levels: 5%, 10% and 20% of the mean input half-width.
pub fn default_sigmas(model: &SystemModel) -> Vec<f64> {
    let bx = model.input_box();
    let half = bx.iter().map(|r| r.half_width()).sum::<f64>() / bx.len() as f64;
    [0.05, 0.1, 0.2].iter().map(|f| f * half).collect()
}

/// Adds i.i.d. `N(0, σ²)` to every input component, then clamps onto the input box.
pub fn perturb_policy(
    model: &SystemModel,
    u_star: &[Vec<f64>],
    sigma: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Vec<f64>>> {
    let normal = Normal::new(0.0, sigma)
        .map_err(|e| Error::InvalidConfig(format!("sigma {sigma}: {e}")))?;
    let bx = model.input_box();
    Ok(u_star
        .iter()
        .map(|u| {
            u.iter()
                .zip(bx)
                .map(|(&v, r)| (v + normal.sample(rng)).clamp(r.min, r.max))
                .collect()
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunOutcome {
    pub sigma: f64,
    pub run: usize,
    pub satisfied: bool,
    /// Traditional robustness; `-∞` when the rollout left the state box.
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FailureReport {
    pub sigma: f64,
    pub rate: f64,
    pub runs: Vec<RunOutcome>,
}

/// RNG for run `run`; independent of scheduling order.
pub fn run_rng(seed: u64, run: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run as u64);
    rng
}

/// Fraction of disturbed rollouts that violate the specification.
///
/// Each run is judged by the strict sign of the traditional robustness,
/// whichever semantics produced `u_star`. Rollouts that leave the state box fail.
pub fn failure_rate(
    problem: &SynthesisProblem,
    u_star: &[Vec<f64>],
    cfg: &DisturbanceConfig,
) -> Result<FailureReport> {
    cfg.validate()?;
    if u_star.len() != problem.horizon() {
        return Err(Error::InvalidConfig(format!(
            "policy has {} steps, problem horizon is {}",
            u_star.len(),
            problem.horizon()
        )));
    }
    let model = problem.model();
    let judge = Evaluator::new(Semantics::Traditional);
    let runs = (0..cfg.n_runs)
        .into_par_iter()
        .map(|run| {
            let mut rng = run_rng(cfg.seed, run);
            let u = perturb_policy(model, u_star, cfg.sigma, &mut rng)?;
            let score = model
                .simulate(&u)
                .and_then(|traj| model.to_trace(&traj))
                .and_then(|trace| judge.score(problem.spec(), &trace, 0))
                .unwrap_or(f64::NEG_INFINITY);
            Ok(RunOutcome {
                sigma: cfg.sigma,
                run,
                satisfied: score > 0.0,
                score,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let failures = runs.iter().filter(|r| !r.satisfied).count();
    Ok(FailureReport {
        sigma: cfg.sigma,
        rate: failures as f64 / cfg.n_runs as f64,
        runs,
    })
}

/// Writes `sigma,run,satisfied,score` rows.
pub fn write_outcomes_csv<'a, W: Write>(
    rows: impl IntoIterator<Item = &'a RunOutcome>,
    writer: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["sigma", "run", "satisfied", "score"])?;
    for r in rows {
        w.write_record([
            r.sigma.to_string(),
            r.run.to_string(),
            r.satisfied.to_string(),
            r.score.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
