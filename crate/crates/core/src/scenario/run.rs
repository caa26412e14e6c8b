use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::deployment::{
    self, evaluate_placements, search_placements, DeploymentResult, LinkModel, Objective, Scene,
};
use crate::error::{Error, Result};
use crate::geometry::{Building, Point3};

use super::config::{ScenarioConfig, ScenarioKind, Strategy};
use super::generate::{derive_seed, generate_users, resolve_buildings, streams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Ok,
    Infeasible,
}

impl std::fmt::Display for RunStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RunStatus::Ok => "ok",
            RunStatus::Infeasible => "infeasible",
        })
    }
}

/// Outcome of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub config_hash: String,
    pub seed: u64,
    pub scenario: ScenarioKind,
    pub strategy: Strategy,
    pub swept_value: Option<f64>,
    pub status: RunStatus,
    pub covered_fraction: f64,
    pub covered_count: usize,
    /// Total service time (s); absent when the run is infeasible.
    pub total_hover: Option<f64>,
    /// Drones deployed (for min-drones, the fleet size found).
    pub drones: usize,
    pub users: usize,
    pub building_count: usize,
    pub placements: Vec<Point3>,
    pub wall_ms: f64,
    /// Failure reason for infeasible runs.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

/// A run record plus the full solver output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub record: RunRecord,
    pub result: Option<DeploymentResult>,
}

/// Concrete inputs of one run.
pub struct Instance {
    pub all_buildings: Vec<Building>,
    pub obstacles: Vec<Building>,
    pub users: Vec<deployment::UserNode>,
}

impl Instance {
    pub fn build(cfg: &ScenarioConfig) -> Result<Self> {
        let all_buildings = resolve_buildings(cfg)?;
        let active = cfg
            .building_count
            .map_or(all_buildings.len(), |n| n.min(all_buildings.len()));
        let obstacles = all_buildings[..active].to_vec();
        let mut users = generate_users(
            &cfg.region,
            &all_buildings,
            cfg.users,
            derive_seed(cfg.seed, streams::USERS),
            1.0,
        )?;
        for u in &mut users {
            u.load_bits = cfg.load_for(u.id);
        }
        Ok(Instance {
            all_buildings,
            obstacles,
            users,
        })
    }

    pub fn scene<'a>(&'a self, cfg: &'a ScenarioConfig) -> Scene<'a> {
        Scene {
            region: cfg.region,
            users: &self.users,
            buildings: &self.obstacles,
            params: &cfg.channel,
        }
    }
}

fn solve(cfg: &ScenarioConfig, scene: &Scene<'_>) -> Result<DeploymentResult> {
    let search = &cfg.search;
    let baseline_seed = derive_seed(cfg.seed, streams::BASELINE);
    let objective = match cfg.scenario {
        ScenarioKind::MinHover => Objective::HoverTime,
        _ => Objective::Coverage,
    };
    match (cfg.strategy, cfg.scenario) {
        (Strategy::Optimized, ScenarioKind::MaxCoverage) => {
            deployment::maximize_coverage(scene, cfg.drones, search)
        }
        (Strategy::Optimized, ScenarioKind::MinDrones) => {
            deployment::min_drones_full_coverage(scene, cfg.max_drones, search)
        }
        (Strategy::Optimized, ScenarioKind::MinHover) => {
            deployment::minimize_hover_time(scene, cfg.drones, search)
        }
        (_, ScenarioKind::MinDrones) => Err(Error::Config(format!(
            "strategy {} is only defined for max-coverage and min-hover",
            cfg.strategy
        ))),
        (Strategy::Probabilistic, _) => {
            let placements = search_placements(
                scene,
                LinkModel::Probabilistic {
                    seed: baseline_seed,
                },
                &[],
                objective,
                cfg.drones,
                search,
            )?;
            evaluate_placements(scene, placements, search.los_step)
        }
        (Strategy::Random, _) => {
            let placements = deployment::random_deployment(
                &scene.region,
                scene.buildings,
                cfg.drones,
                baseline_seed,
                search.altitude_range(),
            )?;
            evaluate_placements(scene, placements, search.los_step)
        }
    }
}

/// Runs one configured experiment. Infeasible outcomes become records;
/// configuration and input errors are returned.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunReport> {
    run_with_value(cfg, None)
}

fn run_with_value(cfg: &ScenarioConfig, swept_value: Option<f64>) -> Result<RunReport> {
    cfg.validate()?;
    let start = Instant::now();
    let instance = Instance::build(cfg)?;
    let scene = instance.scene(cfg);
    let outcome = solve(cfg, &scene);
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;

    let mut record = RunRecord {
        config_hash: cfg.hash(),
        seed: cfg.seed,
        scenario: cfg.scenario,
        strategy: cfg.strategy,
        swept_value,
        status: RunStatus::Ok,
        covered_fraction: 0.0,
        covered_count: 0,
        total_hover: None,
        drones: cfg.drones,
        users: instance.users.len(),
        building_count: instance.obstacles.len(),
        placements: Vec::new(),
        wall_ms,
        note: None,
    };
    match outcome {
        Ok(r) => {
            record.covered_fraction = r.covered_fraction();
            record.covered_count = r.covered_count;
            record.drones = r.placements.len();
            record.placements.clone_from(&r.placements);
            // a hover figure only means something when every load is delivered
            if r.fully_covered() {
                record.total_hover = Some(r.total_hover);
            } else if cfg.scenario == ScenarioKind::MinHover {
                record.status = RunStatus::Infeasible;
                record.note = Some(format!(
                    "{} of {} users uncovered",
                    record.users - r.covered_count,
                    record.users
                ));
            }
            Ok(RunReport {
                record,
                result: Some(r),
            })
        }
        Err(e) if e.is_infeasible() => {
            record.status = RunStatus::Infeasible;
            record.note = Some(e.to_string());
            Ok(RunReport {
                record,
                result: None,
            })
        }
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepParam {
    SinrThreshold,
    Drones,
    BuildingCount,
    Users,
}

impl std::str::FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sinr-threshold" | "sinr_threshold" | "gamma" => Ok(SweepParam::SinrThreshold),
            "drones" | "m" => Ok(SweepParam::Drones),
            "building-count" | "building_count" | "buildings" => Ok(SweepParam::BuildingCount),
            "users" | "l" => Ok(SweepParam::Users),
            other => Err(Error::Config(format!("unknown sweep parameter {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub values: Vec<f64>,
    /// Seeds per value: `seed, seed + 1, ...`.
    pub replications: usize,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::Config("sweep needs at least one value".into()));
        }
        if self.replications == 0 {
            return Err(Error::Config("sweep needs at least one replication".into()));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("sweep values must be finite".into()));
        }
        if self.param != SweepParam::SinrThreshold
            && self.values.iter().any(|v| *v < 1.0 || v.fract() != 0.0)
        {
            return Err(Error::Config(format!(
                "{:?} values must be positive integers",
                self.param
            )));
        }
        Ok(())
    }

    /// The config for one sweep point.
    pub fn apply(&self, base: &ScenarioConfig, value: f64, rep: usize) -> ScenarioConfig {
        let mut cfg = base.clone();
        cfg.seed = base.seed.wrapping_add(rep as u64);
        match self.param {
            SweepParam::SinrThreshold => cfg.channel.sinr_threshold_db = value,
            SweepParam::Drones => {
                cfg.drones = value as usize;
                cfg.max_drones = value as usize;
            }
            SweepParam::BuildingCount => cfg.building_count = Some(value as usize),
            SweepParam::Users => {
                cfg.users = value as usize;
                if let super::config::Loads::PerUser(v) = &cfg.load_bits {
                    let b = v.first().copied().unwrap_or(10e6);
                    cfg.load_bits = super::config::Loads::Uniform(b);
                }
            }
        }
        cfg
    }
}

/// Every value crossed with every replication seed, run in parallel and
/// returned sorted by swept value then seed.
pub fn run_sweep(base: &ScenarioConfig, sweep: &SweepSpec) -> Result<Vec<RunRecord>> {
    sweep.validate()?;
    base.validate()?;
    let points: Vec<(f64, usize)> = sweep
        .values
        .iter()
        .flat_map(|&v| (0..sweep.replications).map(move |r| (v, r)))
        .collect();
    let mut records = points
        .par_iter()
        .map(|&(v, r)| {
            let cfg = sweep.apply(base, v, r);
            run_with_value(&cfg, Some(v)).map(|rep| rep.record)
        })
        .collect::<Result<Vec<_>>>()?;
    sort_records(&mut records);
    Ok(records)
}

pub fn sort_records(records: &mut [RunRecord]) {
    records.sort_by(|a, b| {
        a.swept_value
            .unwrap_or(f64::NEG_INFINITY)
            .total_cmp(&b.swept_value.unwrap_or(f64::NEG_INFINITY))
            .then(a.seed.cmp(&b.seed))
            .then(a.config_hash.cmp(&b.config_hash))
    });
}
