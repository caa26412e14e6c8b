use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channel::ChannelParams;
use crate::deployment::SearchConfig;
use crate::error::{Error, Result};
use crate::geometry::{Point2, Region};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    MaxCoverage,
    MinDrones,
    MinHover,
}

impl std::str::FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max-coverage" => Ok(ScenarioKind::MaxCoverage),
            "min-drones" => Ok(ScenarioKind::MinDrones),
            "min-hover" => Ok(ScenarioKind::MinHover),
            other => Err(Error::Config(format!("unknown scenario kind {other:?}"))),
        }
    }
}

impl std::fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ScenarioKind::MaxCoverage => "max-coverage",
            ScenarioKind::MinDrones => "min-drones",
            ScenarioKind::MinHover => "min-hover",
        })
    }
}

/// Which placement policy a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Building-aware search.
    #[default]
    Optimized,
    /// Same search with elevation-angle LoS draws, blind to buildings.
    Probabilistic,
    /// Uniformly random drone positions.
    Random,
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Strategy::Optimized => "optimized",
            Strategy::Probabilistic => "probabilistic",
            Strategy::Random => "random",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BuildingSource {
    /// No obstacles.
    None,
    /// Bundled three-building campus-like layout.
    Campus,
    /// Polygon file; relative paths resolve against the config file.
    File { path: PathBuf },
    /// Non-overlapping random rectangles.
    Synthetic {
        count: usize,
        #[serde(default = "default_side_min")]
        min_side: f64,
        #[serde(default = "default_side_max")]
        max_side: f64,
        #[serde(default)]
        seed: Option<u64>,
    },
    /// Footprints written directly in the config.
    Inline { polygons: Vec<Vec<Point2>> },
}

fn default_side_min() -> f64 {
    15.0
}

fn default_side_max() -> f64 {
    40.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeightRange {
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Loads {
    Uniform(f64),
    PerUser(Vec<f64>),
}

/// One self-contained experiment description. Every field has a default,
/// so `{}` is a valid config reproducing the reference setup: 200 m square,
/// 200 users with 10 Mb each, 1 W drones at 2 GHz over 1 MHz, -170 dBm/Hz
/// noise and the three-building campus layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub region: Region,
    pub buildings: BuildingSource,
    /// Height range for footprints without a stored height.
    pub building_heights: HeightRange,
    /// Use only the first `n` buildings as obstacles. Users are still kept
    /// out of every footprint so runs differing only in this stay paired.
    pub building_count: Option<usize>,
    pub users: usize,
    pub load_bits: Loads,
    pub channel: ChannelParams,
    /// Fleet size for max-coverage and min-hover.
    pub drones: usize,
    /// Upper bound of the min-drones scan.
    pub max_drones: usize,
    pub search: SearchConfig,
    pub scenario: ScenarioKind,
    pub strategy: Strategy,
    /// Master seed; users, heights and baseline draws derive from it.
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            region: Region::square(200.0),
            buildings: BuildingSource::Campus,
            building_heights: HeightRange {
                min: 10.0,
                max: 20.0,
            },
            building_count: None,
            users: 200,
            load_bits: Loads::Uniform(10e6),
            channel: ChannelParams::default(),
            drones: 5,
            max_drones: 10,
            search: SearchConfig::default(),
            scenario: ScenarioKind::MaxCoverage,
            strategy: Strategy::Optimized,
            seed: 1,
        }
    }
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config and resolves relative file references against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = ScenarioConfig::from_json(&text)?;
        if let BuildingSource::File { path: p } = &mut cfg.buildings {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    *p = dir.join(&*p);
                }
            }
            if !p.exists() {
                return Err(Error::Config(format!(
                    "building file {} does not exist",
                    p.display()
                )));
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.region
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        self.channel.validate()?;
        self.search.validate()?;
        if self.users == 0 {
            return Err(Error::Config("users must be >= 1".into()));
        }
        if !(self.building_heights.min > 0.0
            && self.building_heights.min <= self.building_heights.max)
        {
            return Err(Error::Config(format!(
                "building height range [{}, {}] invalid",
                self.building_heights.min, self.building_heights.max
            )));
        }
        match &self.load_bits {
            Loads::Uniform(b) if !(*b > 0.0) => {
                return Err(Error::Config("load_bits must be > 0".into()))
            }
            Loads::PerUser(v) if v.len() != self.users || v.iter().any(|b| !(*b > 0.0)) => {
                return Err(Error::Config(format!(
                    "per-user load_bits needs {} positive entries",
                    self.users
                )))
            }
            _ => {}
        }
        if self.drones == 0 || self.max_drones == 0 {
            return Err(Error::Config("drones and max_drones must be >= 1".into()));
        }
        if let BuildingSource::Synthetic {
            min_side, max_side, ..
        } = &self.buildings
        {
            if !(*min_side > 0.0 && min_side <= max_side) {
                return Err(Error::Config("synthetic side range invalid".into()));
            }
        }
        Ok(())
    }

    pub fn load_for(&self, user: usize) -> f64 {
        match &self.load_bits {
            Loads::Uniform(b) => *b,
            Loads::PerUser(v) => v[user],
        }
    }

    /// Short stable digest of the full config.
    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let text = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(text.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}
