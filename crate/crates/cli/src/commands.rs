//! Subcommand bodies. Each returns a value the binary maps onto stdout and an exit code.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use serde::Serialize;

use agmstl::disturbance::{failure_rate, write_outcomes_csv, RunOutcome};
use agmstl::formula::parse;
use agmstl::robustness::Evaluator;
use agmstl::signal::{load_trace, save_trace};
use agmstl::synthesis::gradient_ascent;
use agmstl::{PredicateScale, Semantics, Status, SynthesisResult, SystemModel, Trace};

use crate::config::{Problem, ProblemConfig};

/// Exit code for usage, parse, I/O and validation errors.
pub const EXIT_ERROR: i32 = 3;

pub fn status_exit_code(status: Status) -> i32 {
    match status {
        Status::Sat => 0,
        Status::Violated => 1,
        Status::Inconclusive => 2,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SemanticsArg {
    Agm,
    Smooth,
    Traditional,
}

impl SemanticsArg {
    pub fn resolve(self, beta: f64, scale: PredicateScale) -> Result<Semantics> {
        Ok(match self {
            SemanticsArg::Agm => Semantics::Agm(scale),
            SemanticsArg::Smooth => Semantics::smooth(beta)?,
            SemanticsArg::Traditional => Semantics::Traditional,
        })
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct MonitorReport {
    pub score: f64,
    pub status: String,
    pub semantics: String,
    pub t: usize,
}

pub struct MonitorArgs<'a> {
    pub trace: &'a Path,
    pub formula: &'a str,
    pub semantics: Semantics,
    pub at: usize,
    /// Resolve region names and normalize a physical-unit trace with this problem.
    pub config: Option<&'a Path>,
}

pub fn monitor(args: &MonitorArgs<'_>) -> Result<(MonitorReport, Status)> {
    let raw = load_trace(args.trace).with_context(|| format!("reading {}", args.trace.display()))?;
    let (phi, trace) = match args.config {
        Some(path) => {
            let problem = ProblemConfig::load(path)?.build()?;
            let phi = agmstl::formula::parse_with_regions(args.formula, &problem.regions)
                .with_context(|| format!("formula `{}`", args.formula))?;
            let trace = problem
                .regions
                .normalization()
                .normalize(&raw)
                .context("normalizing trace")?;
            (phi, trace)
        }
        None => (
            parse(args.formula).with_context(|| format!("formula `{}`", args.formula))?,
            raw,
        ),
    };
    let verdict = Evaluator::new(args.semantics).evaluate(&phi, &trace, args.at)?;
    Ok((
        MonitorReport {
            score: verdict.score,
            status: verdict.status.to_string(),
            semantics: verdict.semantics.to_string(),
            t: args.at,
        },
        verdict.status,
    ))
}

#[derive(Debug, Clone, Serialize)]
pub struct SynthReport {
    pub feasible: bool,
    pub score: f64,
    pub semantics: String,
    /// Traditional robustness of the returned trajectory.
    pub traditional: f64,
    pub seed: u64,
    pub iterations: usize,
    pub restarts: usize,
    pub state_violations: usize,
    pub u_star: Vec<Vec<f64>>,
    pub trajectory: Vec<Vec<f64>>,
}

/// Files written by [`synth`], relative to the output directory.
pub const SYNTH_FILES: [&str; 5] = [
    "result.json",
    "trajectory.csv",
    "history.csv",
    "policy.csv",
    "regions.csv",
];

pub fn synth(config: &ProblemConfig, seed: Option<u64>, out: Option<&Path>) -> Result<SynthReport> {
    let mut config = config.clone();
    if let Some(seed) = seed {
        config.optimizer.seed = seed;
    }
    let problem = config.build()?;
    let result = gradient_ascent(&problem.synthesis, &config.optimizer)?;
    let traditional = traditional_score(&problem, &result.trajectory)?;
    let report = SynthReport {
        feasible: result.feasible,
        score: result.score,
        semantics: problem.synthesis.semantics().to_string(),
        traditional,
        seed: config.optimizer.seed,
        iterations: result.iterations,
        restarts: result.restarts,
        state_violations: result.state_violations,
        u_star: result.u_star.clone(),
        trajectory: result.trajectory.clone(),
    };
    if let Some(dir) = out {
        write_synth_outputs(dir, &problem, &result, &report)?;
    }
    Ok(report)
}

fn traditional_score(problem: &Problem, trajectory: &[Vec<f64>]) -> Result<f64> {
    let trace = problem.model.to_trace(trajectory)?;
    Ok(Evaluator::new(Semantics::Traditional).score(&problem.spec, &trace, 0)?)
}

fn named_trace(names: &[&str], rows: &[Vec<f64>]) -> Result<Trace> {
    Ok(Trace::new(
        names.iter().map(|s| s.to_string()).collect(),
        rows.to_vec(),
    )?)
}

pub fn policy_trace(model: &SystemModel, u_star: &[Vec<f64>]) -> Result<Trace> {
    named_trace(model.kind().input_names(), u_star)
}

fn write_synth_outputs(
    dir: &Path,
    problem: &Problem,
    result: &SynthesisResult,
    report: &SynthReport,
) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let file = |name: &str| dir.join(name);
    fs::write(file("result.json"), serde_json::to_string_pretty(report)? + "\n")?;
    save_trace(&problem.model.state_trace(&result.trajectory)?, file("trajectory.csv"))?;
    save_trace(&policy_trace(&problem.model, &result.u_star)?, file("policy.csv"))?;

    let mut history = String::from("iteration,best_score\n");
    for (i, s) in result.score_history.iter().enumerate() {
        writeln!(history, "{i},{s}")?;
    }
    fs::write(file("history.csv"), history)?;

    let mut regions = String::from("region,channel,min,max\n");
    for (name, region) in problem.regions.iter() {
        for b in &region.bounds {
            writeln!(regions, "{name},{},{},{}", b.channel, b.min, b.max)?;
        }
    }
    fs::write(file("regions.csv"), regions)?;
    Ok(())
}

pub fn load_policy(model: &SystemModel, path: &Path) -> Result<Vec<Vec<f64>>> {
    let trace = load_trace(path).with_context(|| format!("reading {}", path.display()))?;
    let expected = model.kind().input_names();
    ensure!(
        trace.channels().iter().map(String::as_str).eq(expected.iter().copied()),
        "policy columns {:?} do not match model inputs {:?}",
        trace.channels(),
        expected
    );
    Ok(trace.rows().map(<[f64]>::to_vec).collect())
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct RateRow {
    pub sigma: f64,
    pub n_runs: usize,
    pub failure_rate: f64,
}

pub struct DisturbArgs<'a> {
    pub policy: &'a Path,
    pub sigmas: Option<Vec<f64>>,
    pub n_runs: Option<usize>,
    pub seed: Option<u64>,
    /// Per-run outcomes CSV.
    pub runs_out: Option<&'a Path>,
}

pub fn disturb(config: &ProblemConfig, args: &DisturbArgs<'_>) -> Result<Vec<RateRow>> {
    let problem = config.build()?;
    let u_star = load_policy(&problem.model, args.policy)?;
    let sigmas = match &args.sigmas {
        Some(s) if !s.is_empty() => s.clone(),
        _ => config.sigmas(&problem.model),
    };
    let mut rows = Vec::with_capacity(sigmas.len());
    let mut outcomes: Vec<RunOutcome> = Vec::new();
    for sigma in sigmas {
        let mut cfg = config.disturbance_for(sigma);
        if let Some(n) = args.n_runs {
            cfg.n_runs = n;
        }
        if let Some(seed) = args.seed {
            cfg.seed = seed;
        }
        let report = failure_rate(&problem.synthesis, &u_star, &cfg)?;
        rows.push(RateRow {
            sigma,
            n_runs: cfg.n_runs,
            failure_rate: report.rate,
        });
        outcomes.extend(report.runs);
    }
    if let Some(path) = args.runs_out {
        let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
        write_outcomes_csv(&outcomes, file)?;
    }
    Ok(rows)
}

pub fn rates_csv(rows: &[RateRow]) -> String {
    let mut s = String::from("sigma,n_runs,failure_rate\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{}", r.sigma, r.n_runs, r.failure_rate);
    }
    s
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SmoothRow {
    pub beta: f64,
    pub score: f64,
    pub abs_error: f64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct CompareReport {
    pub traditional: f64,
    pub agm: f64,
    pub smooth: Vec<SmoothRow>,
}

/// Scores one trajectory under all three semantics. Without a policy the
/// trajectory comes from synthesizing with the configured semantics.
pub fn compare(config: &ProblemConfig, policy: Option<&Path>, betas: &[f64]) -> Result<CompareReport> {
    if betas.is_empty() {
        bail!("at least one --beta is required");
    }
    let problem = config.build()?;
    let u_star = match policy {
        Some(path) => load_policy(&problem.model, path)?,
        None => gradient_ascent(&problem.synthesis, &config.optimizer)?.u_star,
    };
    let trajectory = problem.model.simulate(&u_star)?;
    let trace = problem.model.to_trace(&trajectory)?;
    let score = |s: Semantics| Evaluator::new(s).score(&problem.spec, &trace, 0);
    let traditional = score(Semantics::Traditional)?;
    let agm = score(Semantics::Agm(config.predicate_scale))?;
    let smooth = betas
        .iter()
        .map(|&beta| {
            let s = score(Semantics::smooth(beta)?)?;
            Ok(SmoothRow {
                beta,
                score: s,
                abs_error: (s - traditional).abs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CompareReport {
        traditional,
        agm,
        smooth,
    })
}

pub fn compare_table(r: &CompareReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<24}{:>12}{:>12}", "semantics", "score", "|err|");
    let _ = writeln!(s, "{:<24}{:>12.6}{:>12}", "traditional", r.traditional, "-");
    let _ = writeln!(s, "{:<24}{:>12.6}{:>12}", "agm", r.agm, "-");
    for row in &r.smooth {
        let name = format!("smooth(beta={})", row.beta);
        let _ = writeln!(s, "{name:<24}{:>12.6}{:>12.6}", row.score, row.abs_error);
    }
    s
}

pub fn default_out_dir(config: &Path) -> PathBuf {
    let stem = config.file_stem().and_then(|s| s.to_str()).unwrap_or("problem");
    PathBuf::from(format!("{stem}-out"))
}
