//! Drone placement: candidate grid, power-threshold seeding, coordinate
//! refinement, and the three deployment problems (max coverage, minimum
//! fleet for full coverage, minimum total hover time), plus the random and
//! statistical-LoS baselines.
//!
//! All searches are deterministic: ties go to the lowest candidate, drone or
//! combination index.

mod baseline;
mod links;
mod search;

use serde::{Deserialize, Serialize};

use crate::channel::{self, ChannelParams};
use crate::error::{Error, Result};
use crate::geometry::{inside_any, Building, Point2, Point3, Region};

pub use baseline::{probabilistic_deployment, random_deployment};
pub use links::{elevation, link_draw, splitmix64, LinkModel};
pub use search::Objective;

use links::LinkTable;
use search::{binomial, coordinate_search, exhaustive};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserNode {
    pub id: usize,
    pub position: Point2,
    /// Data to deliver, in bits.
    pub load_bits: f64,
}

impl UserNode {
    pub fn new(id: usize, position: Point2, load_bits: f64) -> Self {
        UserNode {
            id,
            position,
            load_bits,
        }
    }
}

/// Knobs of the placement search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    /// Horizontal spacing of the coarse candidate lattice (m).
    pub grid_spacing: f64,
    pub altitudes: Vec<f64>,
    /// Horizontal reach of one refinement move (m).
    pub refine_radius: f64,
    pub fine_spacing: f64,
    pub pass_limit: usize,
    /// Received-power cut for the threshold matrix (W). When unset, the
    /// LoS power at the edge of a disk holding `1/M` of the region, seen from
    /// the lowest altitude.
    pub p_min_watts: Option<f64>,
    /// Segment sampling step for LoS tests (m).
    pub los_step: f64,
    /// Enumerate all M-subsets of the coarse grid instead of greedy seeding
    /// when there are at most this many.
    pub exhaustive_limit: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            grid_spacing: 25.0,
            altitudes: vec![40.0, 60.0, 80.0, 100.0],
            refine_radius: 20.0,
            fine_spacing: 5.0,
            pass_limit: 10,
            p_min_watts: None,
            los_step: 1.0,
            exhaustive_limit: 2000,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("search: {m}")));
        if !(self.grid_spacing > 0.0) {
            return bad("grid_spacing must be > 0");
        }
        if self.altitudes.is_empty() || self.altitudes.iter().any(|h| !(*h > 0.0)) {
            return bad("altitudes must be non-empty and positive");
        }
        if !(self.fine_spacing > 0.0 && self.refine_radius >= self.fine_spacing) {
            return bad("need refine_radius >= fine_spacing > 0");
        }
        if !(self.los_step > 0.0) {
            return bad("los_step must be > 0");
        }
        if let Some(p) = self.p_min_watts {
            if !(p >= 0.0) {
                return bad("p_min_watts must be >= 0");
            }
        }
        Ok(())
    }

    fn min_altitude(&self) -> f64 {
        self.altitudes.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Lowest and highest candidate altitude.
    pub fn altitude_range(&self) -> (f64, f64) {
        let hi = self
            .altitudes
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        (self.min_altitude(), hi)
    }

    /// Threshold-matrix power cut for a fleet of `m` drones.
    pub fn p_min_for(&self, region: &Region, params: &ChannelParams, m: usize) -> f64 {
        self.p_min_watts.unwrap_or_else(|| {
            let r = (region.area() / (std::f64::consts::PI * m.max(1) as f64)).sqrt();
            params.los_power_at(r.hypot(self.min_altitude()))
        })
    }
}

/// Everything a solver looks at.
#[derive(Debug, Clone, Copy)]
pub struct Scene<'a> {
    pub region: Region,
    pub users: &'a [UserNode],
    pub buildings: &'a [Building],
    pub params: &'a ChannelParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateGrid {
    pub points: Vec<Point3>,
    pub spacing: f64,
    pub altitudes: Vec<f64>,
    pub region: Region,
}

impl CandidateGrid {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn lattice(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=n).map(|k| lo + k as f64 * step).collect()
}

/// Lattice of drone positions over the region at every altitude, skipping
/// points above a footprint.
pub fn build_candidate_grid(
    region: &Region,
    buildings: &[Building],
    spacing: f64,
    altitudes: &[f64],
) -> Result<CandidateGrid> {
    if !(spacing > 0.0) {
        return Err(Error::Precondition(format!(
            "grid spacing must be > 0, got {spacing}"
        )));
    }
    if altitudes.is_empty() {
        return Err(Error::Precondition("no candidate altitudes".into()));
    }
    if spacing > region.width || spacing > region.height {
        return Err(Error::EmptyGrid(format!(
            "spacing {spacing} m exceeds region {}x{} m",
            region.width, region.height
        )));
    }
    let (lo, hi) = (region.min(), region.max());
    let xs = lattice(lo.x, hi.x, spacing);
    let ys = lattice(lo.y, hi.y, spacing);
    let mut points = Vec::new();
    for &h in altitudes {
        for &y in &ys {
            for &x in &xs {
                if !inside_any(Point2::new(x, y), buildings) {
                    points.push(Point3::new(x, y, h));
                }
            }
        }
    }
    if points.is_empty() {
        return Err(Error::EmptyGrid(
            "every lattice point lies inside a building".into(),
        ));
    }
    Ok(CandidateGrid {
        points,
        spacing,
        altitudes: altitudes.to_vec(),
        region: *region,
    })
}

/// Binary candidate x user matrix of interference-free LoS power above `p_min`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThresholdMatrix {
    candidates: usize,
    users: usize,
    entries: Vec<bool>,
}

impl ThresholdMatrix {
    pub fn from_rows(rows: &[Vec<bool>]) -> Result<Self> {
        let users = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != users) {
            return Err(Error::Precondition("ragged threshold matrix".into()));
        }
        Ok(ThresholdMatrix {
            candidates: rows.len(),
            users,
            entries: rows.concat(),
        })
    }

    pub fn candidates(&self) -> usize {
        self.candidates
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn get(&self, candidate: usize, user: usize) -> bool {
        self.entries[candidate * self.users + user]
    }

    fn row(&self, candidate: usize) -> &[bool] {
        &self.entries[candidate * self.users..(candidate + 1) * self.users]
    }
}

pub fn build_threshold_matrix(
    grid: &CandidateGrid,
    users: &[UserNode],
    params: &ChannelParams,
    p_min: f64,
) -> ThresholdMatrix {
    let mut entries = Vec::with_capacity(grid.len() * users.len());
    for c in &grid.points {
        for u in users {
            let d = crate::geometry::distance_3d(c, &u.position.with_z(0.0)).max(1e-9);
            entries.push(params.los_power_at(d) > p_min);
        }
    }
    ThresholdMatrix {
        candidates: grid.len(),
        users: users.len(),
        entries,
    }
}

/// Picks `m` candidates one at a time, each covering the most users not yet
/// claimed by an earlier pick.
pub fn greedy_seed(t: &ThresholdMatrix, m: usize) -> Result<Vec<usize>> {
    if m == 0 {
        return Err(Error::Precondition("fleet size must be >= 1".into()));
    }
    if m > t.candidates {
        return Err(Error::Infeasible(format!(
            "{m} drones but only {} candidates",
            t.candidates
        )));
    }
    let mut claimed = vec![false; t.users];
    let mut chosen = vec![false; t.candidates];
    let mut picks = Vec::with_capacity(m);
    for _ in 0..m {
        let mut best: Option<(usize, usize)> = None;
        for c in (0..t.candidates).filter(|&c| !chosen[c]) {
            let gain = t
                .row(c)
                .iter()
                .zip(&claimed)
                .filter(|(hit, taken)| **hit && !**taken)
                .count();
            if best.is_none_or(|(_, g)| gain > g) {
                best = Some((c, gain));
            }
        }
        let (c, _) = best.expect("m <= candidates");
        chosen[c] = true;
        for (taken, hit) in claimed.iter_mut().zip(t.row(c)) {
            *taken |= *hit;
        }
        picks.push(c);
    }
    Ok(picks)
}

/// User-to-drone assignment: each user attaches to its highest-SINR drone
/// when that SINR meets the threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Association {
    pub drones: usize,
    /// Serving drone per user, `None` when uncovered.
    pub serving: Vec<Option<usize>>,
    /// Index of the strongest drone per user, covered or not.
    pub strongest: Vec<usize>,
    /// SINR (dB) to the strongest drone.
    pub sinr_db: Vec<f64>,
}

impl Association {
    pub fn indicator(&self, user: usize, drone: usize) -> bool {
        self.serving[user] == Some(drone)
    }

    pub fn indicator_matrix(&self) -> Vec<Vec<u8>> {
        self.serving
            .iter()
            .map(|s| (0..self.drones).map(|j| u8::from(*s == Some(j))).collect())
            .collect()
    }

    pub fn covered_count(&self) -> usize {
        self.serving.iter().filter(|s| s.is_some()).count()
    }
}

fn associate_with(table: &LinkTable<'_>, placements: &[Point3]) -> Association {
    let gains: Vec<_> = placements.iter().map(|p| table.gains(p)).collect();
    let links = search::best_links(table, &gains);
    Association {
        drones: placements.len(),
        serving: links
            .iter()
            .map(|&(j, s)| (s >= table.threshold).then_some(j))
            .collect(),
        strongest: links.iter().map(|&(j, _)| j).collect(),
        sinr_db: links
            .iter()
            .map(|&(_, s)| channel::linear_to_db(s))
            .collect(),
    }
}

pub fn associate_users(
    placements: &[Point3],
    users: &[UserNode],
    buildings: &[Building],
    params: &ChannelParams,
    los_step: f64,
) -> Result<Association> {
    if placements.is_empty() {
        return Err(Error::Precondition(
            "no placements to associate with".into(),
        ));
    }
    let table = LinkTable::new(
        users,
        params,
        LinkModel::Geometric {
            buildings,
            step: los_step,
        },
    );
    Ok(associate_with(&table, placements))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeploymentResult {
    pub placements: Vec<Point3>,
    pub association: Association,
    pub covered_count: usize,
    /// Service time per drone (s) over the users it serves.
    pub per_drone_hover: Vec<f64>,
    pub total_hover: f64,
}

impl DeploymentResult {
    pub fn fully_covered(&self) -> bool {
        self.covered_count == self.association.serving.len()
    }

    pub fn covered_fraction(&self) -> f64 {
        let n = self.association.serving.len();
        if n == 0 {
            0.0
        } else {
            self.covered_count as f64 / n as f64
        }
    }
}

fn result_from(table: &LinkTable<'_>, placements: Vec<Point3>) -> DeploymentResult {
    let association = associate_with(table, &placements);
    let mut per_drone_hover = vec![0.0; placements.len()];
    for (i, s) in association.serving.iter().enumerate() {
        if let Some(j) = *s {
            let sinr = channel::db_to_linear(association.sinr_db[i]);
            per_drone_hover[j] +=
                table.users[i].load_bits / channel::rate_linear(table.params, sinr);
        }
    }
    DeploymentResult {
        covered_count: association.covered_count(),
        total_hover: per_drone_hover.iter().sum(),
        placements,
        association,
        per_drone_hover,
    }
}

/// Scores fixed placements against the true building geometry.
pub fn evaluate_placements(
    scene: &Scene<'_>,
    placements: Vec<Point3>,
    los_step: f64,
) -> Result<DeploymentResult> {
    if placements.is_empty() {
        return Err(Error::Precondition("no placements to evaluate".into()));
    }
    let table = LinkTable::new(
        scene.users,
        scene.params,
        LinkModel::Geometric {
            buildings: scene.buildings,
            step: los_step,
        },
    );
    Ok(result_from(&table, placements))
}

/// Horizontal offsets on the fine lattice within `radius`, nearest first.
fn fine_offsets(radius: f64, spacing: f64) -> Vec<(f64, f64)> {
    let k = (radius / spacing + 1e-9).floor() as i64;
    let mut out = Vec::new();
    for a in -k..=k {
        for b in -k..=k {
            let (dx, dy) = (a as f64 * spacing, b as f64 * spacing);
            if dx.hypot(dy) <= radius + 1e-9 {
                out.push((dx, dy));
            }
        }
    }
    out.sort_by(|p, q| {
        (p.0.hypot(p.1))
            .total_cmp(&q.0.hypot(q.1))
            .then(p.1.total_cmp(&q.1))
            .then(p.0.total_cmp(&q.0))
    });
    out
}

struct FineGrid<'b> {
    region: Region,
    excluded: &'b [Building],
    altitudes: Vec<f64>,
    offsets: Vec<(f64, f64)>,
}

impl FineGrid<'_> {
    fn around(&self, p: &Point3) -> Vec<Point3> {
        let mut out = Vec::new();
        for &(dx, dy) in &self.offsets {
            let q = Point2::new(p.x + dx, p.y + dy);
            if !self.region.contains(q) || inside_any(q, self.excluded) {
                continue;
            }
            for &h in &self.altitudes {
                out.push(q.with_z(h));
            }
        }
        out
    }
}

/// Coordinate-wise local search around each seed on a fine lattice; drones
/// move in round-robin order to the best point within `radius` of their
/// current position until a full pass makes no move or `pass_limit` passes
/// have run. Never returns a worse configuration than `seeds`.
#[allow(clippy::too_many_arguments)]
pub fn refine_placements(
    seeds: &[Point3],
    grid: &CandidateGrid,
    users: &[UserNode],
    buildings: &[Building],
    params: &ChannelParams,
    radius: f64,
    fine_spacing: f64,
    pass_limit: usize,
    objective: Objective,
    los_step: f64,
) -> Result<Vec<Point3>> {
    if !(fine_spacing > 0.0 && radius >= fine_spacing) {
        return Err(Error::Precondition(format!(
            "need radius >= fine_spacing > 0, got {radius} and {fine_spacing}"
        )));
    }
    if seeds.is_empty() {
        return Err(Error::Precondition("no seeds to refine".into()));
    }
    let table = LinkTable::new(
        users,
        params,
        LinkModel::Geometric {
            buildings,
            step: los_step,
        },
    );
    let fine = FineGrid {
        region: grid.region,
        excluded: buildings,
        altitudes: grid.altitudes.clone(),
        offsets: fine_offsets(radius, fine_spacing),
    };
    let (positions, _) = coordinate_search(&table, objective, seeds.to_vec(), pass_limit, |p| {
        fine.around(p)
    });
    Ok(positions)
}

/// Shared seed-then-refine pipeline. `excluded` are the footprints the
/// search knows about when laying out candidates.
pub(crate) fn search_placements(
    scene: &Scene<'_>,
    model: LinkModel<'_>,
    excluded: &[Building],
    objective: Objective,
    m: usize,
    cfg: &SearchConfig,
) -> Result<Vec<Point3>> {
    if m == 0 {
        return Err(Error::Precondition("fleet size must be >= 1".into()));
    }
    cfg.validate()?;
    let grid = build_candidate_grid(&scene.region, excluded, cfg.grid_spacing, &cfg.altitudes)?;
    if m > grid.len() {
        return Err(Error::Infeasible(format!(
            "{m} drones but only {} candidate points",
            grid.len()
        )));
    }
    let table = LinkTable::new(scene.users, scene.params, model);
    let seeds: Vec<Point3> = if binomial(grid.len(), m) <= cfg.exhaustive_limit as u128 {
        let (idx, _) = exhaustive(&table, objective, &grid.points, m);
        idx.into_iter().map(|i| grid.points[i]).collect()
    } else {
        let p_min = cfg.p_min_for(&scene.region, scene.params, m);
        let t = build_threshold_matrix(&grid, scene.users, scene.params, p_min);
        greedy_seed(&t, m)?
            .into_iter()
            .map(|i| grid.points[i])
            .collect()
    };
    let fine = FineGrid {
        region: scene.region,
        excluded,
        altitudes: cfg.altitudes.clone(),
        offsets: fine_offsets(cfg.refine_radius, cfg.fine_spacing),
    };
    let (positions, _) =
        coordinate_search(&table, objective, seeds, cfg.pass_limit, |p| fine.around(p));
    Ok(positions)
}

fn geometric<'a>(scene: &Scene<'a>, cfg: &SearchConfig) -> LinkModel<'a> {
    LinkModel::Geometric {
        buildings: scene.buildings,
        step: cfg.los_step,
    }
}

/// Places `m` drones to maximize the number of users meeting the SINR threshold.
pub fn maximize_coverage(
    scene: &Scene<'_>,
    m: usize,
    cfg: &SearchConfig,
) -> Result<DeploymentResult> {
    let placements = search_placements(
        scene,
        geometric(scene, cfg),
        scene.buildings,
        Objective::Coverage,
        m,
        cfg,
    )?;
    evaluate_placements(scene, placements, cfg.los_step)
}

/// Smallest fleet in `1..=m_max` whose coverage search reaches every user.
/// Every size is tried in order since interference makes coverage
/// non-monotone in fleet size.
pub fn min_drones_full_coverage(
    scene: &Scene<'_>,
    m_max: usize,
    cfg: &SearchConfig,
) -> Result<DeploymentResult> {
    if m_max == 0 {
        return Err(Error::Precondition("m_max must be >= 1".into()));
    }
    let mut best_seen = 0;
    for m in 1..=m_max {
        let r = match maximize_coverage(scene, m, cfg) {
            Ok(r) => r,
            Err(Error::Infeasible(_)) => break,
            Err(e) => return Err(e),
        };
        if r.fully_covered() {
            return Ok(r);
        }
        best_seen = best_seen.max(r.covered_count);
    }
    Err(Error::InfeasibleCoverage(format!(
        "at most {best_seen} of {} users covered with up to {m_max} drones",
        scene.users.len()
    )))
}

/// Places `m` drones to serve every user with the least total hover time.
pub fn minimize_hover_time(
    scene: &Scene<'_>,
    m: usize,
    cfg: &SearchConfig,
) -> Result<DeploymentResult> {
    let placements = search_placements(
        scene,
        geometric(scene, cfg),
        scene.buildings,
        Objective::HoverTime,
        m,
        cfg,
    )?;
    let r = evaluate_placements(scene, placements, cfg.los_step)?;
    if !r.fully_covered() {
        return Err(Error::InfeasibleCoverage(format!(
            "best placement of {m} drones covers {} of {} users",
            r.covered_count,
            scene.users.len()
        )));
    }
    Ok(r)
}
