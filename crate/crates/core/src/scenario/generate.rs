use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::deployment::UserNode;
use crate::error::{Error, Result};
use crate::geometry::{inside_any, Building, Point2, Polygon, Region};
use crate::polyfile;

use super::config::{BuildingSource, ScenarioConfig};

const MAX_ATTEMPTS_PER_USER: usize = 10_000;

/// Independent sub-seed for `stream` derived from a master seed.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    crate::deployment::splitmix64(master ^ crate::deployment::splitmix64(stream))
}

pub(crate) mod streams {
    pub const USERS: u64 = 1;
    pub const HEIGHTS: u64 = 2;
    pub const BASELINE: u64 = 3;
    pub const SYNTHETIC: u64 = 4;
}

/// `count` ground users uniform over the region, redrawn while inside a
/// footprint.
pub fn generate_users(
    region: &Region,
    buildings: &[Building],
    count: usize,
    seed: u64,
    load_bits: f64,
) -> Result<Vec<UserNode>> {
    if count == 0 {
        return Err(Error::Precondition("need at least one user".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = (region.min(), region.max());
    let mut users = Vec::with_capacity(count);
    let mut misses = 0;
    while users.len() < count {
        let p = Point2::new(rng.gen_range(lo.x..hi.x), rng.gen_range(lo.y..hi.y));
        if inside_any(p, buildings) {
            misses += 1;
            if misses > MAX_ATTEMPTS_PER_USER * count {
                return Err(Error::GenerationInfeasible(
                    "buildings leave no free ground in the region".into(),
                ));
            }
            continue;
        }
        users.push(UserNode::new(users.len(), p, load_bits));
    }
    Ok(users)
}

/// Gives each footprint an independent uniform height in `[h_min, h_max]`.
pub fn assign_heights(
    footprints: &[Polygon],
    h_min: f64,
    h_max: f64,
    seed: u64,
) -> Result<Vec<Building>> {
    if !(h_min > 0.0 && h_min <= h_max) {
        return Err(Error::Precondition(format!(
            "height range [{h_min}, {h_max}] invalid"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    footprints
        .iter()
        .map(|p| {
            let h = if h_min == h_max {
                h_min
            } else {
                rng.gen_range(h_min..=h_max)
            };
            Building::new(p.clone(), h)
        })
        .collect()
}

/// Stand-in for a three-building campus block in a 200 m square: a long
/// hall, an L-shaped wing and a square annex. Synthetic, not surveyed.
pub fn campus_footprints() -> Vec<Polygon> {
    let p = |pts: &[(f64, f64)]| {
        Polygon::new(pts.iter().map(|&(x, y)| Point2::new(x, y)).collect())
            .expect("bundled footprint is valid")
    };
    vec![
        p(&[(30.0, 125.0), (115.0, 125.0), (115.0, 160.0), (30.0, 160.0)]),
        p(&[
            (130.0, 40.0),
            (180.0, 40.0),
            (180.0, 135.0),
            (150.0, 135.0),
            (150.0, 75.0),
            (130.0, 75.0),
        ]),
        p(&[(40.0, 35.0), (95.0, 35.0), (95.0, 85.0), (40.0, 85.0)]),
    ]
}

/// Non-overlapping axis-aligned rectangles with sides in `[min_side,
/// max_side]`, at least 5 m apart and 5 m inside the region border.
pub fn synthetic_footprints(
    region: &Region,
    count: usize,
    min_side: f64,
    max_side: f64,
    seed: u64,
) -> Result<Vec<Polygon>> {
    const GAP: f64 = 5.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = (region.min(), region.max());
    let mut rects: Vec<(f64, f64, f64, f64)> = Vec::with_capacity(count);
    let mut attempts = 0;
    while rects.len() < count {
        attempts += 1;
        if attempts > 100_000 {
            return Err(Error::Config(format!(
                "cannot fit {count} buildings of side {min_side}-{max_side} m in the region"
            )));
        }
        let w = rng.gen_range(min_side..=max_side);
        let h = rng.gen_range(min_side..=max_side);
        if lo.x + GAP > hi.x - GAP - w || lo.y + GAP > hi.y - GAP - h {
            continue;
        }
        let x0 = rng.gen_range(lo.x + GAP..=hi.x - GAP - w);
        let y0 = rng.gen_range(lo.y + GAP..=hi.y - GAP - h);
        let r = (x0, y0, x0 + w, y0 + h);
        let clear = rects
            .iter()
            .all(|q| r.0 > q.2 + GAP || q.0 > r.2 + GAP || r.1 > q.3 + GAP || q.1 > r.3 + GAP);
        if clear {
            rects.push(r);
        }
    }
    rects
        .into_iter()
        .map(|(x0, y0, x1, y1)| Polygon::rect(x0, y0, x1, y1))
        .collect()
}

/// All buildings of the configured source, heights filled in.
pub fn resolve_buildings(cfg: &ScenarioConfig) -> Result<Vec<Building>> {
    let heights_seed = derive_seed(cfg.seed, streams::HEIGHTS);
    let hr = &cfg.building_heights;
    match &cfg.buildings {
        BuildingSource::None => Ok(Vec::new()),
        BuildingSource::Campus => {
            assign_heights(&campus_footprints(), hr.min, hr.max, heights_seed)
        }
        BuildingSource::Synthetic {
            count,
            min_side,
            max_side,
            seed,
        } => {
            let layout_seed = seed.unwrap_or_else(|| derive_seed(cfg.seed, streams::SYNTHETIC));
            let fp = synthetic_footprints(&cfg.region, *count, *min_side, *max_side, layout_seed)?;
            assign_heights(&fp, hr.min, hr.max, heights_seed)
        }
        BuildingSource::Inline { polygons } => {
            let fp = polygons
                .iter()
                .map(|v| Polygon::new(v.clone()))
                .collect::<Result<Vec<_>>>()?;
            assign_heights(&fp, hr.min, hr.max, heights_seed)
        }
        BuildingSource::File { path } => {
            let fps = polyfile::read_footprints(path)?;
            let mut rng = ChaCha8Rng::seed_from_u64(heights_seed);
            fps.into_iter()
                .map(|f| {
                    // draw for every footprint so stored heights do not shift the others
                    let drawn = if hr.min == hr.max {
                        hr.min
                    } else {
                        rng.gen_range(hr.min..=hr.max)
                    };
                    Building::new(f.polygon, f.height.unwrap_or(drawn))
                })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn users_are_reproducible_and_inside() {
        let region = Region::square(200.0);
        let b = assign_heights(&campus_footprints(), 10.0, 20.0, 3).unwrap();
        let a = generate_users(&region, &b, 200, 9, 1e7).unwrap();
        assert_eq!(a, generate_users(&region, &b, 200, 9, 1e7).unwrap());
        assert_eq!(a.len(), 200);
        for u in &a {
            assert!(region.contains(u.position));
            assert!(!inside_any(u.position, &b));
        }
        assert_ne!(a, generate_users(&region, &b, 200, 10, 1e7).unwrap());
    }

    #[test]
    fn users_cannot_be_placed_under_full_cover() {
        let region = Region::square(10.0);
        let b = vec![Building::new(Polygon::rect(-1.0, -1.0, 11.0, 11.0).unwrap(), 10.0).unwrap()];
        assert!(matches!(
            generate_users(&region, &b, 1, 0, 1.0),
            Err(Error::GenerationInfeasible(_))
        ));
    }

    #[test]
    fn heights_follow_range_and_seed() {
        let fp = campus_footprints();
        let fixed = assign_heights(&fp, 15.0, 15.0, 1).unwrap();
        assert!(fixed.iter().all(|b| b.height() == 15.0));
        let a = assign_heights(&fp, 10.0, 20.0, 5).unwrap();
        assert!(a.iter().all(|b| (10.0..=20.0).contains(&b.height())));
        assert_eq!(a, assign_heights(&fp, 10.0, 20.0, 5).unwrap());
        assert!(assign_heights(&fp, 20.0, 10.0, 5).is_err());
    }

    #[test]
    fn synthetic_layout_is_disjoint() {
        let region = Region::square(200.0);
        let fp = synthetic_footprints(&region, 10, 15.0, 35.0, 42).unwrap();
        assert_eq!(fp.len(), 10);
        for (i, a) in fp.iter().enumerate() {
            for b in &fp[i + 1..] {
                let o =
                    crate::geometry::polygon_intersection_area(a.vertices(), b.vertices()).unwrap();
                assert_eq!(o, 0.0);
            }
        }
    }

    #[test]
    fn derived_seeds_differ_per_stream() {
        let a = derive_seed(1, streams::USERS);
        assert_eq!(a, derive_seed(1, streams::USERS));
        assert_ne!(a, derive_seed(1, streams::HEIGHTS));
        assert_ne!(a, derive_seed(2, streams::USERS));
    }
}
