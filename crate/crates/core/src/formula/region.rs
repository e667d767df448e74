use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Formula, Predicate};
use crate::error::{Error, Result};
use crate::signal::NormalizationMap;

/// One side-pair of an axis-aligned box, in physical units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisBound {
    pub channel: String,
    pub min: f64,
    pub max: f64,
}

/// Axis-aligned box over one or more channels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub bounds: Vec<AxisBound>,
}

impl Region {
    /// Planar rectangle `[x_min, x_max] × [y_min, y_max]` over channels `x` and `y`.
    pub fn rect(x: [f64; 2], y: [f64; 2]) -> Self {
        Self {
            bounds: vec![
                AxisBound {
                    channel: "x".into(),
                    min: x[0],
                    max: x[1],
                },
                AxisBound {
                    channel: "y".into(),
                    min: y[0],
                    max: y[1],
                },
            ],
        }
    }

    /// Strict membership test in physical units.
    pub fn contains(&self, point: &[(&str, f64)]) -> bool {
        self.bounds.iter().all(|b| {
            point
                .iter()
                .find(|(ch, _)| *ch == b.channel)
                .is_some_and(|&(_, v)| v > b.min && v < b.max)
        })
    }
}

/// Named regions that the parser expands into conjunctions of predicates.
///
/// Region bounds are physical; expansion converts them once into
/// normalized thresholds using the table's [`NormalizationMap`].
#[derive(Debug, Clone, Default)]
pub struct RegionTable {
    normalization: NormalizationMap,
    regions: BTreeMap<String, Region>,
}

impl RegionTable {
    pub fn new(normalization: NormalizationMap) -> Self {
        Self {
            normalization,
            regions: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, name: impl Into<String>, region: Region) -> Result<()> {
        let name = name.into();
        if region.bounds.is_empty() {
            return Err(Error::InvalidConfig(format!("region `{name}` has no bounds")));
        }
        for b in &region.bounds {
            let range = self
                .normalization
                .range(&b.channel)
                .ok_or_else(|| Error::UnknownChannel(b.channel.clone()))?;
            if b.max.partial_cmp(&b.min) != Some(std::cmp::Ordering::Greater) || b.min < range.min || b.max > range.max {
                return Err(Error::InvalidConfig(format!(
                    "region `{name}` bound [{}, {}] on `{}` must be non-empty and inside [{}, {}]",
                    b.min, b.max, b.channel, range.min, range.max
                )));
            }
        }
        self.regions.insert(name, region);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&Region> {
        self.regions.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Region)> {
        self.regions.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn normalization(&self) -> &NormalizationMap {
        &self.normalization
    }

    /// `ch > min && ch < max` for every bound, in normalized units.
    pub fn expand(&self, name: &str) -> Option<Result<Formula>> {
        let region = self.regions.get(name)?;
        Some(self.expand_region(region))
    }

    fn expand_region(&self, region: &Region) -> Result<Formula> {
        let mut preds = Vec::with_capacity(region.bounds.len() * 2);
        for b in &region.bounds {
            let range = self
                .normalization
                .range(&b.channel)
                .ok_or_else(|| Error::UnknownChannel(b.channel.clone()))?;
            preds.push(Formula::Predicate(Predicate::gt(
                b.channel.clone(),
                range.normalize(b.min),
            )?));
            preds.push(Formula::Predicate(Predicate::lt(
                b.channel.clone(),
                range.normalize(b.max),
            )?));
        }
        Formula::and(preds)
    }
}
