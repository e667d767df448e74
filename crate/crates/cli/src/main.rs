use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand, ValueEnum};

use agmstl::PredicateScale;
use agmstl_cli::commands::{self, DisturbArgs, MonitorArgs, SemanticsArg, EXIT_ERROR};
use agmstl_cli::config::{self, ProblemConfig};

#[derive(Parser)]
#[command(name = "agmstl", version, about = "STL robustness monitoring and control synthesis")]
struct Cli {
    /// Directory searched for config paths that do not exist as given.
    #[arg(long, global = true, env = config::CONFIG_DIR_ENV)]
    config_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SemanticsFlag {
    Agm,
    Smooth,
    Traditional,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScaleFlag {
    Half,
    Unit,
}

#[derive(Subcommand)]
enum Command {
    /// Score a trace against a formula. Exit code 0 = sat, 1 = violated, 2 = inconclusive.
    Monitor {
        /// CSV with header `t,<channel>...`; values in [-1, 1] unless --config is given.
        trace: PathBuf,
        formula: String,
        #[arg(long, value_enum, default_value = "agm")]
        semantics: SemanticsFlag,
        #[arg(long, default_value_t = 10.0)]
        beta: f64,
        #[arg(long, value_enum, default_value = "half")]
        scale: ScaleFlag,
        #[arg(long, default_value_t = 0)]
        at: usize,
        /// Problem config supplying region names and channel ranges (trace in physical units).
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Synthesize an input sequence. Exit code 0 iff the result is feasible.
    Synth {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory for result.json and the CSV plot data.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Failure rates of a policy under Gaussian input noise.
    Disturb {
        config: PathBuf,
        policy: PathBuf,
        /// Noise level; repeat for a sweep. Defaults to the config's sweep.
        #[arg(long = "sigma")]
        sigmas: Vec<f64>,
        #[arg(long)]
        runs: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Write per-run outcomes here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score one trajectory under all three semantics.
    Compare {
        config: PathBuf,
        /// Policy CSV; synthesized from the config when omitted.
        #[arg(long)]
        policy: Option<PathBuf>,
        #[arg(long = "beta", default_values_t = [1.0, 10.0, 100.0])]
        betas: Vec<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        json: bool,
    },
}

fn run(cli: Cli) -> Result<i32> {
    let dir = cli.config_dir.as_deref();
    let resolve = |p: &Path| config::resolve(p, dir);
    let load = |p: &Path| ProblemConfig::load(resolve(p));
    match cli.command {
        Command::Monitor {
            trace,
            formula,
            semantics,
            beta,
            scale,
            at,
            config,
        } => {
            let scale = match scale {
                ScaleFlag::Half => PredicateScale::Half,
                ScaleFlag::Unit => PredicateScale::Unit,
            };
            let semantics = match semantics {
                SemanticsFlag::Agm => SemanticsArg::Agm,
                SemanticsFlag::Smooth => SemanticsArg::Smooth,
                SemanticsFlag::Traditional => SemanticsArg::Traditional,
            }
            .resolve(beta, scale)?;
            let (report, status) = commands::monitor(&MonitorArgs {
                trace: &trace,
                formula: &formula,
                semantics,
                at,
                config: config.map(|c| resolve(&c)).as_deref(),
            })?;
            println!("{}", serde_json::to_string(&report)?);
            Ok(commands::status_exit_code(status))
        }
        Command::Synth { config, seed, out } => {
            let cfg = load(&config)?;
            let out = out.unwrap_or_else(|| commands::default_out_dir(&config));
            let report = commands::synth(&cfg, seed, Some(&out))?;
            println!(
                "{}",
                serde_json::json!({
                    "feasible": report.feasible,
                    "score": report.score,
                    "traditional": report.traditional,
                    "semantics": report.semantics,
                    "seed": report.seed,
                    "iterations": report.iterations,
                    "restarts": report.restarts,
                    "out": out,
                })
            );
            if !report.feasible {
                eprintln!("no feasible input sequence found; best score {}", report.score);
            }
            Ok(if report.feasible { 0 } else { 1 })
        }
        Command::Disturb {
            config,
            policy,
            sigmas,
            runs,
            seed,
            out,
        } => {
            let cfg = load(&config)?;
            let rows = commands::disturb(
                &cfg,
                &DisturbArgs {
                    policy: &policy,
                    sigmas: Some(sigmas),
                    n_runs: runs,
                    seed,
                    runs_out: out.as_deref(),
                },
            )?;
            print!("{}", commands::rates_csv(&rows));
            Ok(0)
        }
        Command::Compare {
            config,
            policy,
            betas,
            seed,
            json,
        } => {
            let mut cfg = load(&config)?;
            if let Some(seed) = seed {
                cfg.optimizer.seed = seed;
            }
            let report = commands::compare(&cfg, policy.as_deref(), &betas)?;
            if json {
                println!("{}", serde_json::to_string(&report)?);
            } else {
                print!("{}", commands::compare_table(&report));
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Keep 1 and 2 free for verdicts.
            return ExitCode::from(if e.use_stderr() { EXIT_ERROR as u8 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
