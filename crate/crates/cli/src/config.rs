//! JSON problem documents: model, regions, formula, optimizer and disturbance settings.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use agmstl::disturbance::{default_sigmas, DisturbanceConfig};
use agmstl::formula::{parse_with_regions, AxisBound};
use agmstl::{
    ChannelRange, Formula, ModelKind, OptimizerConfig, OutputChannel, PredicateScale, Region,
    RegionTable, Semantics, SynthesisProblem, SystemModel,
};

/// Environment variable naming the directory searched for relative config paths.
pub const CONFIG_DIR_ENV: &str = "AGMSTL_CONFIG_DIR";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    #[serde(default = "one")]
    pub dt: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for ModelParams {
    fn default() -> Self {
        Self { dt: 1.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub name: ModelKind,
    #[serde(default)]
    pub params: ModelParams,
    pub q0: Vec<f64>,
    pub state_box: Vec<[f64; 2]>,
    pub input_box: Vec<[f64; 2]>,
    pub output_map: Vec<OutputChannel>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SemanticsName {
    Agm,
    Smooth,
    Traditional,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisturbanceSection {
    /// Noise levels; defaults to 5/10/20% of the mean input half-width.
    #[serde(default)]
    pub sigmas: Option<Vec<f64>>,
    #[serde(default = "hundred")]
    pub n_runs: usize,
    #[serde(default)]
    pub seed: u64,
}

fn hundred() -> usize {
    100
}

impl Default for DisturbanceSection {
    fn default() -> Self {
        Self {
            sigmas: None,
            n_runs: 100,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub model: ModelConfig,
    /// Region name to per-channel physical bounds.
    #[serde(default)]
    pub regions: BTreeMap<String, BTreeMap<String, [f64; 2]>>,
    pub spec: String,
    pub horizon: usize,
    #[serde(default)]
    pub lambda: f64,
    #[serde(default = "default_semantics")]
    pub semantics: SemanticsName,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default)]
    pub predicate_scale: PredicateScale,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub disturbance: DisturbanceSection,
}

fn default_semantics() -> SemanticsName {
    SemanticsName::Agm
}

fn default_beta() -> f64 {
    10.0
}

/// A validated, ready-to-solve problem.
#[derive(Debug, Clone)]
pub struct Problem {
    pub config: ProblemConfig,
    pub model: SystemModel,
    pub regions: RegionTable,
    pub spec: Formula,
    pub synthesis: SynthesisProblem,
}

fn ranges(bounds: &[[f64; 2]], what: &str) -> Result<Vec<ChannelRange>> {
    bounds
        .iter()
        .map(|[lo, hi]| {
            ChannelRange::new(*lo, *hi).with_context(|| format!("{what} bound [{lo}, {hi}]"))
        })
        .collect()
}

impl ProblemConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).context("invalid problem configuration")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn semantics(&self) -> Result<Semantics> {
        Ok(match self.semantics {
            SemanticsName::Agm => Semantics::Agm(self.predicate_scale),
            SemanticsName::Smooth => Semantics::smooth(self.beta)?,
            SemanticsName::Traditional => Semantics::Traditional,
        })
    }

    pub fn model(&self) -> Result<SystemModel> {
        let m = &self.model;
        SystemModel::new(
            m.name,
            m.q0.clone(),
            ranges(&m.state_box, "state")?,
            ranges(&m.input_box, "input")?,
            m.output_map.clone(),
        )
        .and_then(|model| model.with_dt(m.params.dt))
        .context("invalid model")
    }

    pub fn build(&self) -> Result<Problem> {
        self.build_with(self.semantics()?)
    }

    /// Builds the problem, overriding the configured semantics.
    pub fn build_with(&self, semantics: Semantics) -> Result<Problem> {
        let model = self.model()?;
        let mut regions = RegionTable::new(model.normalization());
        for (name, bounds) in &self.regions {
            let region = Region {
                bounds: bounds
                    .iter()
                    .map(|(ch, [lo, hi])| AxisBound {
                        channel: ch.clone(),
                        min: *lo,
                        max: *hi,
                    })
                    .collect(),
            };
            regions
                .insert(name.clone(), region)
                .with_context(|| format!("region `{name}`"))?;
        }
        let spec = parse_with_regions(&self.spec, &regions)
            .with_context(|| format!("formula `{}`", self.spec))?;
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            bail!("lambda must be non-negative, got {}", self.lambda);
        }
        self.optimizer.validate()?;
        let synthesis =
            SynthesisProblem::new(model.clone(), spec.clone(), self.horizon, self.lambda, semantics)
                .context("invalid synthesis problem")?;
        Ok(Problem {
            config: self.clone(),
            model,
            regions,
            spec,
            synthesis,
        })
    }

    pub fn sigmas(&self, model: &SystemModel) -> Vec<f64> {
        self.disturbance
            .sigmas
            .clone()
            .unwrap_or_else(|| default_sigmas(model))
    }

    pub fn disturbance_for(&self, sigma: f64) -> DisturbanceConfig {
        DisturbanceConfig {
            sigma,
            n_runs: self.disturbance.n_runs,
            seed: self.disturbance.seed,
        }
    }
}

/// Tries `path` as given, then under `dir`.
pub fn resolve(path: &Path, dir: Option<&Path>) -> PathBuf {
    if path.exists() || path.is_absolute() {
        return path.to_path_buf();
    }
    match dir.map(|d| d.join(path)) {
        Some(candidate) if candidate.exists() => candidate,
        _ => path.to_path_buf(),
    }
}
