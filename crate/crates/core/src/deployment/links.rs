use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::channel::{self, ChannelParams};
use crate::geometry::{distance_3d, los_blocked, Building, Point3};

use super::UserNode;

/// How LoS is decided for each drone-user link.
#[derive(Debug, Clone, Copy)]
pub enum LinkModel<'a> {
    /// Segment test against known building prisms.
    Geometric {
        buildings: &'a [Building],
        step: f64,
    },
    /// Independent Bernoulli draw with the elevation-angle probability,
    /// keyed by seed, user id and drone position so repeated queries agree.
    Probabilistic { seed: u64 },
}

/// SplitMix64 finalizer, used for all seed mixing.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn quantize(p: &Point3) -> [i64; 3] {
    [
        (p.x * 1e6).round() as i64,
        (p.y * 1e6).round() as i64,
        (p.z * 1e6).round() as i64,
    ]
}

/// Uniform draw in `[0, 1)` for one link of the statistical model.
pub fn link_draw(seed: u64, user_id: usize, drone: &Point3) -> f64 {
    let q = quantize(drone);
    let mut h = splitmix64(seed ^ 0x5DEE_CE66_D1CE_4E5B);
    h = splitmix64(h ^ user_id as u64);
    for c in q {
        h = splitmix64(h ^ c as u64);
    }
    (h >> 11) as f64 / (1u64 << 53) as f64
}

/// Elevation angle of `drone` seen from a ground point.
pub fn elevation(user: &Point3, drone: &Point3) -> f64 {
    let horizontal = (drone.x - user.x).hypot(drone.y - user.y);
    (drone.z - user.z)
        .atan2(horizontal)
        .clamp(0.0, std::f64::consts::FRAC_PI_2)
}

/// Per-position received powers at every user, memoized by position.
pub(crate) struct LinkTable<'a> {
    pub users: &'a [UserNode],
    pub params: &'a ChannelParams,
    pub model: LinkModel<'a>,
    pub noise: f64,
    pub threshold: f64,
    cache: Mutex<HashMap<[i64; 3], Arc<[f64]>>>,
}

impl<'a> LinkTable<'a> {
    pub fn new(users: &'a [UserNode], params: &'a ChannelParams, model: LinkModel<'a>) -> Self {
        LinkTable {
            users,
            params,
            model,
            noise: channel::noise_power(params),
            threshold: params.sinr_threshold_linear(),
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn is_los(&self, user: &UserNode, drone: &Point3) -> bool {
        let u = user.position.with_z(0.0);
        match self.model {
            LinkModel::Geometric { buildings, step } => !los_blocked(&u, drone, buildings, step),
            LinkModel::Probabilistic { seed } => {
                let p = channel::p_los(self.params, elevation(&u, drone)).unwrap_or(0.0);
                link_draw(seed, user.id, drone) < p
            }
        }
    }

    fn compute(&self, drone: &Point3) -> Arc<[f64]> {
        let nlos = self.params.nlos_factor();
        self.users
            .iter()
            .map(|u| {
                let d = distance_3d(&u.position.with_z(0.0), drone).max(1e-9);
                let p = self.params.los_power_at(d);
                if self.is_los(u, drone) {
                    p
                } else {
                    p * nlos
                }
            })
            .collect()
    }

    pub fn gains(&self, drone: &Point3) -> Arc<[f64]> {
        let key = quantize(drone);
        if let Some(g) = self.cache.lock().unwrap().get(&key) {
            return Arc::clone(g);
        }
        let g = self.compute(drone);
        self.cache
            .lock()
            .unwrap()
            .entry(key)
            .or_insert_with(|| Arc::clone(&g));
        g
    }
}
