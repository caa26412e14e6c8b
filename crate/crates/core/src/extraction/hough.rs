use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::canny::EdgeMap;

/// Line in normal form `rho = x cos(theta) + y sin(theta)`, pixel units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HoughLine {
    pub rho: f64,
    /// In `[0, pi)`.
    pub theta: f64,
    pub support: usize,
}

impl HoughLine {
    pub fn distance(&self, x: f64, y: f64) -> f64 {
        (x * self.theta.cos() + y * self.theta.sin() - self.rho).abs()
    }
}

/// Votes every edge position (sub-pixel corrected) into a `(rho, theta)`
/// accumulator and returns cells with at least `vote_threshold` votes that
/// are maxima of their 3x3 neighbourhood, strongest first. Theta wraps
/// around with rho mirrored. Equal counts are ranked by how tightly the
/// votes cluster, and each line reports the mean rho of its voters.
pub fn hough_lines(
    edges: &EdgeMap,
    rho_res: f64,
    theta_res: f64,
    vote_threshold: usize,
) -> Result<Vec<HoughLine>> {
    if !(rho_res > 0.0 && theta_res > 0.0 && theta_res < PI) {
        return Err(Error::Precondition(format!(
            "hough resolutions must be positive, got rho {rho_res}, theta {theta_res}"
        )));
    }
    let n_theta = (PI / theta_res).round().max(1.0) as usize;
    let dtheta = PI / n_theta as f64;
    let diag = (edges.width as f64).hypot(edges.height as f64) + 2.0;
    let off = (diag / rho_res).ceil() as isize;
    let n_rho = (2 * off + 1) as usize;
    let trig: Vec<(f64, f64)> = (0..n_theta)
        .map(|k| {
            let t = k as f64 * dtheta;
            (t.cos(), t.sin())
        })
        .collect();

    let cells = n_theta * n_rho;
    let mut acc = vec![0usize; cells];
    let mut sum = vec![0.0; cells];
    let mut sum_sq = vec![0.0; cells];
    for r in 0..edges.height {
        for c in 0..edges.width {
            if !edges.get(c, r) {
                continue;
            }
            let (x, y) = edges.position(c, r);
            for (k, &(ct, st)) in trig.iter().enumerate() {
                let rho = x * ct + y * st;
                let i = k * n_rho + ((rho / rho_res).round() as isize + off) as usize;
                acc[i] += 1;
                sum[i] += rho;
                sum_sq[i] += rho * rho;
            }
        }
    }
    let spread = |i: usize| {
        let n = acc[i] as f64;
        (sum_sq[i] / n - (sum[i] / n).powi(2)).max(0.0)
    };
    // more votes wins, then tighter votes, then scan order
    let beats = |j: usize, i: usize| {
        acc[j] > acc[i]
            || (acc[j] == acc[i] && {
                let (sj, si) = (spread(j), spread(i));
                sj < si - 1e-9 || ((sj - si).abs() <= 1e-9 && j < i)
            })
    };

    // neighbour cell as a flat index, wrapping theta with mirrored rho
    let cell = |k: isize, b: isize| -> Option<usize> {
        let (k, b) = if k < 0 {
            (n_theta as isize - 1, 2 * off - b)
        } else if k >= n_theta as isize {
            (0, 2 * off - b)
        } else {
            (k, b)
        };
        (b >= 0 && b < n_rho as isize).then(|| k as usize * n_rho + b as usize)
    };

    let mut lines = Vec::new();
    for k in 0..n_theta {
        for b in 0..n_rho {
            let i = k * n_rho + b;
            let v = acc[i];
            if v == 0 || v < vote_threshold {
                continue;
            }
            let is_peak = (-1isize..=1)
                .flat_map(|dk| (-1isize..=1).map(move |db| (dk, db)))
                .filter(|&d| d != (0, 0))
                .filter_map(|(dk, db)| cell(k as isize + dk, b as isize + db))
                .all(|j| j == i || acc[j] == 0 || !beats(j, i));
            if is_peak {
                lines.push(HoughLine {
                    rho: sum[i] / v as f64,
                    theta: k as f64 * dtheta,
                    support: v,
                });
            }
        }
    }
    lines.sort_by(|a, b| {
        b.support
            .cmp(&a.support)
            .then(a.theta.total_cmp(&b.theta))
            .then(a.rho.total_cmp(&b.rho))
    });
    Ok(lines)
}
