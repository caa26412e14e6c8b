use std::collections::VecDeque;

use crate::error::{Error, Result};

use super::raster::GrayImage;

/// Binary edge raster. Each edge pixel also carries the sub-pixel offset of
/// the gradient peak from the pixel centre, measured along the gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeMap {
    pub width: usize,
    pub height: usize,
    pub edges: Vec<bool>,
    pub offsets: Vec<[f64; 2]>,
}

impl EdgeMap {
    pub fn empty(width: usize, height: usize) -> Self {
        EdgeMap {
            width,
            height,
            edges: vec![false; width * height],
            offsets: vec![[0.0; 2]; width * height],
        }
    }

    pub fn get(&self, col: usize, row: usize) -> bool {
        self.edges[row * self.width + col]
    }

    pub fn set(&mut self, col: usize, row: usize, on: bool) {
        self.edges[row * self.width + col] = on;
    }

    pub fn count(&self) -> usize {
        self.edges.iter().filter(|&&e| e).count()
    }

    /// Continuous position of an edge pixel, pixel centre plus offset.
    pub fn position(&self, col: usize, row: usize) -> (f64, f64) {
        let o = self.offsets[row * self.width + col];
        (col as f64 + 0.5 + o[0], row as f64 + 0.5 + o[1])
    }

    /// 8-connected groups of edge pixels as `(col, row)` lists, ordered by
    /// their first pixel in raster order.
    pub fn components(&self) -> Vec<Vec<(usize, usize)>> {
        let mut seen = vec![false; self.edges.len()];
        let mut out = Vec::new();
        for start in 0..self.edges.len() {
            if !self.edges[start] || seen[start] {
                continue;
            }
            seen[start] = true;
            let mut comp = Vec::new();
            let mut queue = VecDeque::from([start]);
            while let Some(i) = queue.pop_front() {
                let (c, r) = (i % self.width, i / self.width);
                comp.push((c, r));
                for (nc, nr) in neighbors8(c, r, self.width, self.height) {
                    let j = nr * self.width + nc;
                    if self.edges[j] && !seen[j] {
                        seen[j] = true;
                        queue.push_back(j);
                    }
                }
            }
            out.push(comp);
        }
        out
    }
}

pub(crate) fn neighbors8(
    c: usize,
    r: usize,
    w: usize,
    h: usize,
) -> impl Iterator<Item = (usize, usize)> {
    (-1isize..=1)
        .flat_map(|dr| (-1isize..=1).map(move |dc| (dc, dr)))
        .filter(|&(dc, dr)| dc != 0 || dr != 0)
        .filter_map(move |(dc, dr)| {
            let (nc, nr) = (c as isize + dc, r as isize + dr);
            (nc >= 0 && nr >= 0 && (nc as usize) < w && (nr as usize) < h)
                .then_some((nc as usize, nr as usize))
        })
}

struct Gradients {
    gx: Vec<f64>,
    gy: Vec<f64>,
    mag: Vec<f64>,
}

fn sobel(img: &GrayImage) -> Gradients {
    let n = img.width * img.height;
    let (mut gx, mut gy, mut mag) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for r in 0..img.height as isize {
        for c in 0..img.width as isize {
            let p = |dc: isize, dr: isize| img.at(c + dc, r + dr);
            let x = (p(1, -1) + 2.0 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2.0 * p(-1, 0) + p(-1, 1));
            let y = (p(-1, 1) + 2.0 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2.0 * p(0, -1) + p(1, -1));
            let i = r as usize * img.width + c as usize;
            gx[i] = x;
            gy[i] = y;
            mag[i] = x.hypot(y);
        }
    }
    Gradients { gx, gy, mag }
}

/// Largest Sobel gradient magnitude in the image.
pub fn max_gradient(img: &GrayImage) -> f64 {
    sobel(img).mag.into_iter().fold(0.0, f64::max)
}

/// Canny edge detection without pre-blur: Sobel gradients, non-maximum
/// suppression along the quantized gradient direction, then hysteresis.
/// Thresholds are absolute gradient magnitudes.
pub fn canny_edges(img: &GrayImage, low: f64, high: f64) -> Result<EdgeMap> {
    if !(low >= 0.0 && low <= high) {
        return Err(Error::Precondition(format!(
            "canny thresholds need 0 <= low <= high, got {low}, {high}"
        )));
    }
    let (w, h) = (img.width, img.height);
    let g = sobel(img);
    let mag_at = |c: isize, r: isize| {
        if c < 0 || r < 0 || c >= w as isize || r >= h as isize {
            0.0
        } else {
            g.mag[r as usize * w + c as usize]
        }
    };

    let mut thin = vec![0.0; w * h];
    let mut offsets = vec![[0.0; 2]; w * h];
    for r in 0..h {
        for c in 0..w {
            let i = r * w + c;
            let m = g.mag[i];
            if m <= 0.0 {
                continue;
            }
            let mut angle = g.gy[i].atan2(g.gx[i]).to_degrees();
            if angle < 0.0 {
                angle += 180.0;
            }
            let (dx, dy): (isize, isize) = if !(22.5..157.5).contains(&angle) {
                (1, 0)
            } else if angle < 67.5 {
                (1, 1)
            } else if angle < 112.5 {
                (0, 1)
            } else {
                (-1, 1)
            };
            let (ci, ri) = (c as isize, r as isize);
            let behind = mag_at(ci - dx, ri - dy);
            let ahead = mag_at(ci + dx, ri + dy);
            // strict on one side only, so a plateau two pixels wide keeps one;
            // the slack absorbs rounding so ties break the same way after an
            // intensity shift
            let tol = 1e-9 * m;
            if m > behind + tol && m + tol >= ahead {
                thin[i] = m;
                let denom = behind - 2.0 * m + ahead;
                let s = if denom < 0.0 {
                    ((behind - ahead) / (2.0 * denom)).clamp(-0.5, 0.5)
                } else {
                    0.0
                };
                offsets[i] = [s * dx as f64, s * dy as f64];
            }
        }
    }

    let mut out = EdgeMap::empty(w, h);
    let mut queue = VecDeque::new();
    for (i, &m) in thin.iter().enumerate() {
        if m > 0.0 && m >= high {
            out.edges[i] = true;
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        for (nc, nr) in neighbors8(i % w, i / w, w, h) {
            let j = nr * w + nc;
            if !out.edges[j] && thin[j] > 0.0 && thin[j] >= low {
                out.edges[j] = true;
                queue.push_back(j);
            }
        }
    }
    for (i, on) in out.edges.iter().enumerate() {
        if *on {
            out.offsets[i] = offsets[i];
        }
    }
    Ok(out)
}

/// Canny with thresholds given as fractions of the largest gradient.
pub fn canny_edges_relative(img: &GrayImage, low_ratio: f64, high_ratio: f64) -> Result<EdgeMap> {
    let peak = max_gradient(img);
    canny_edges(img, low_ratio * peak, high_ratio * peak)
}
