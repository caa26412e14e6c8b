use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{inside_any, Building, Point2, Point3, Region};

use super::{
    evaluate_placements, search_placements, DeploymentResult, LinkModel, Objective, Scene,
    SearchConfig,
};

const MAX_ATTEMPTS: usize = 1_000_000;

/// `m` drones uniform over the region and `[min_alt, max_alt]`, redrawn
/// while above a footprint.
pub fn random_deployment(
    region: &Region,
    buildings: &[Building],
    m: usize,
    seed: u64,
    altitude_range: (f64, f64),
) -> Result<Vec<Point3>> {
    if m == 0 {
        return Err(Error::Precondition("fleet size must be >= 1".into()));
    }
    let (lo_h, hi_h) = altitude_range;
    if !(lo_h > 0.0 && lo_h <= hi_h) {
        return Err(Error::Precondition(format!(
            "bad altitude range [{lo_h}, {hi_h}]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = (region.min(), region.max());
    let mut out = Vec::with_capacity(m);
    let mut attempts = 0;
    while out.len() < m {
        attempts += 1;
        if attempts > MAX_ATTEMPTS {
            return Err(Error::GenerationInfeasible(
                "buildings cover the region; cannot place drones".into(),
            ));
        }
        let p = Point2::new(rng.gen_range(lo.x..=hi.x), rng.gen_range(lo.y..=hi.y));
        let h = if lo_h == hi_h {
            lo_h
        } else {
            rng.gen_range(lo_h..=hi_h)
        };
        if !inside_any(p, buildings) {
            out.push(p.with_z(h));
        }
    }
    Ok(out)
}

/// Coverage deployment that sees user positions but not buildings: every
/// link is LoS with the elevation-angle probability (seeded draws). The
/// chosen placements are then scored against the real geometry.
pub fn probabilistic_deployment(
    scene: &Scene<'_>,
    m: usize,
    seed: u64,
    cfg: &SearchConfig,
) -> Result<DeploymentResult> {
    let placements = search_placements(
        scene,
        LinkModel::Probabilistic { seed },
        &[],
        Objective::Coverage,
        m,
        cfg,
    )?;
    evaluate_placements(scene, placements, cfg.los_step)
}
