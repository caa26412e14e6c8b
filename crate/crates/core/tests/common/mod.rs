//! Reference implementations for the integration suites. Everything here is
//! written from first principles and shares no code with the library apart
//! from plain data types.

#![allow(dead_code)]

use rand::Rng;
use skydeploy::channel::ChannelParams;
use skydeploy::deployment::UserNode;
use skydeploy::geometry::{Point2, Point3, Polygon};

/// Exact test of the closed segment `a`-`b` against the prism over a convex
/// counter-clockwise footprint, by clipping the segment parameter against
/// every face (Cyrus-Beck).
pub fn segment_hits_convex_prism(a: Point3, b: Point3, ring: &[Point2], height: f64) -> bool {
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    let mut clip = |f0: f64, f1: f64| {
        // keep t where f0 + t * f1 >= 0
        if f1.abs() < 1e-15 {
            if f0 < 0.0 {
                t0 = 1.0;
                t1 = 0.0;
            }
        } else if f1 > 0.0 {
            t0 = t0.max(-f0 / f1);
        } else {
            t1 = t1.min(-f0 / f1);
        }
    };
    let n = ring.len();
    for i in 0..n {
        let (p, q) = (ring[i], ring[(i + 1) % n]);
        let (ex, ey) = (q.x - p.x, q.y - p.y);
        let f0 = ex * (a.y - p.y) - ey * (a.x - p.x);
        let f1 = ex * (b.y - a.y) - ey * (b.x - a.x);
        clip(f0, f1);
    }
    clip(height - a.z, -(b.z - a.z));
    clip(a.z, b.z - a.z);
    t0 <= t1
}

/// Convex polygon from sorted random angles on a circle.
pub fn random_convex<R: Rng>(rng: &mut R, lo: f64, hi: f64, r_min: f64, r_max: f64) -> Polygon {
    loop {
        let c = Point2::new(rng.gen_range(lo..hi), rng.gen_range(lo..hi));
        let r = rng.gen_range(r_min..r_max);
        let n = rng.gen_range(3..9);
        let mut angles: Vec<f64> = (0..n)
            .map(|_| rng.gen_range(0.0..std::f64::consts::TAU))
            .collect();
        angles.sort_by(f64::total_cmp);
        let pts: Vec<Point2> = angles
            .iter()
            .map(|t| Point2::new(c.x + r * t.cos(), c.y + r * t.sin()))
            .collect();
        if let Ok(p) = Polygon::new(pts) {
            if p.area() > 1.0 {
                return p;
            }
        }
    }
}

/// Link budget computed directly from the physical constants.
pub struct ChannelOracle {
    pub gain: f64,
    pub alpha: f64,
    pub noise: f64,
    pub nlos: f64,
    pub threshold: f64,
    pub bandwidth: f64,
}

impl ChannelOracle {
    pub fn new(p: &ChannelParams) -> Self {
        let lambda = 299_792_458.0 / p.carrier_hz;
        let eta = (lambda / (4.0 * std::f64::consts::PI)).powi(2);
        ChannelOracle {
            gain: p.tx_power * eta,
            alpha: p.path_loss_exponent,
            noise: 10f64.powf((p.noise_psd_dbm_hz - 30.0) / 10.0) * p.bandwidth_hz,
            nlos: 10f64.powf(-p.nlos_penalty_db / 10.0),
            threshold: 10f64.powf(p.sinr_threshold_db / 10.0),
            bandwidth: p.bandwidth_hz,
        }
    }

    /// Covered users and total service time over covered users. `los(user,
    /// drone)` decides each link.
    pub fn score(
        &self,
        placements: &[Point3],
        users: &[UserNode],
        los: impl Fn(&UserNode, &Point3) -> bool,
    ) -> (usize, f64) {
        let mut covered = 0;
        let mut hover = 0.0;
        for u in users {
            let pw: Vec<f64> = placements
                .iter()
                .map(|d| {
                    let dist =
                        ((u.position.x - d.x).powi(2) + (u.position.y - d.y).powi(2) + d.z * d.z)
                            .sqrt();
                    let p = self.gain * dist.powf(-self.alpha);
                    if los(u, d) {
                        p
                    } else {
                        p * self.nlos
                    }
                })
                .collect();
            let mut best = 0;
            for j in 1..pw.len() {
                if pw[j] > pw[best] {
                    best = j;
                }
            }
            let total: f64 = pw.iter().sum();
            let sinr = pw[best] / (total - pw[best] + self.noise);
            if sinr >= self.threshold {
                covered += 1;
                hover += u.load_bits / (self.bandwidth * (1.0 + sinr).log2());
            }
        }
        (covered, hover)
    }
}
