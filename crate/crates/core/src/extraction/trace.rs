use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Polygon;

use super::canny::{neighbors8, EdgeMap};
use super::hough::HoughLine;
use super::raster::Georef;

/// Tuning for turning edge chains into footprints. Lengths are in pixels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TraceConfig {
    /// A vertex survives when the outline turns by at least this much there.
    pub corner_angle_deg: f64,
    /// Edges shorter than this are collapsed into a single corner.
    pub min_edge_px: f64,
    /// Polyline simplification tolerance applied before corner detection.
    pub simplify_px: f64,
    /// A shallow vertex is still kept when dropping it would move the
    /// outline by more than this (keeps curved walls as many short edges).
    pub max_deviation_px: f64,
    /// Edges within this distance of a detected line are snapped onto it.
    pub snap_px: f64,
    pub snap_angle_deg: f64,
    /// Chain endpoints closer than this are bridged before tracing.
    pub gap_px: f64,
    pub min_area_px: f64,
}

impl Default for TraceConfig {
    fn default() -> Self {
        TraceConfig {
            corner_angle_deg: 30.0,
            min_edge_px: 3.0,
            simplify_px: 1.0,
            max_deviation_px: 2.0,
            snap_px: 2.0,
            snap_angle_deg: 3.0,
            gap_px: 3.0,
            min_area_px: 25.0,
        }
    }
}

impl TraceConfig {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.corner_angle_deg,
            self.min_edge_px,
            self.simplify_px,
            self.max_deviation_px,
            self.snap_px,
            self.snap_angle_deg,
            self.gap_px,
            self.min_area_px,
        ];
        if all.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::Precondition(
                "trace thresholds must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiscardReason {
    /// Chain with loose ends that no bridge could close.
    OpenChain,
    /// Closed chain enclosing no pixels.
    NoInterior,
    /// Fewer than three corners or area below the minimum.
    TooSmall,
    /// Outline crossed itself after simplification.
    SelfIntersecting,
    /// Lies inside a larger outline, such as a courtyard wall.
    Nested,
}

/// An edge group that did not become a footprint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fragment {
    /// First pixel of the group in raster order.
    pub at: (usize, usize),
    pub pixels: usize,
    pub reason: DiscardReason,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Traced {
    pub polygons: Vec<Polygon>,
    pub discarded: Vec<Fragment>,
}

type P = (f64, f64);

/// Follows closed edge chains and turns them into world-space footprints.
///
/// Open chains are bridged when their loose ends are within `gap_px`;
/// whatever stays open is reported in `discarded`. Each closed chain is
/// traced along its outer side, simplified, reduced to its corners and
/// regularized by snapping edges to nearby `lines`.
pub fn trace_polygons(
    edges: &EdgeMap,
    lines: &[HoughLine],
    georef: &Georef,
    cfg: &TraceConfig,
) -> Result<Traced> {
    cfg.validate()?;
    let mut closed = edges.clone();
    bridge_gaps(&mut closed, cfg.gap_px);
    let alive = prune_spurs(&closed);

    let mut found: Vec<(Polygon, Fragment)> = Vec::new();
    let mut discarded = Vec::new();
    for comp in closed.components() {
        let frag = |reason| Fragment {
            at: comp[0],
            pixels: comp.len(),
            reason,
        };
        let ring: Vec<(usize, usize)> = comp
            .iter()
            .copied()
            .filter(|&(c, r)| alive[r * closed.width + c])
            .collect();
        if ring.is_empty() {
            discarded.push(frag(DiscardReason::OpenChain));
            continue;
        }
        let Some(contour) = outer_contour(&closed, &ring) else {
            discarded.push(frag(DiscardReason::NoInterior));
            continue;
        };
        let Some(outline) = simplify_outline(&contour, lines, cfg) else {
            discarded.push(frag(DiscardReason::TooSmall));
            continue;
        };
        if shoelace(&outline).abs() < cfg.min_area_px {
            discarded.push(frag(DiscardReason::TooSmall));
            continue;
        }
        let world = outline
            .iter()
            .map(|&(x, y)| georef.pixel_to_world(x, y))
            .collect();
        match Polygon::new(world) {
            Ok(p) => found.push((p, frag(DiscardReason::Nested))),
            Err(_) => discarded.push(frag(DiscardReason::SelfIntersecting)),
        }
    }

    let mut polygons = Vec::new();
    for (i, (p, nested)) in found.iter().enumerate() {
        let inside_other = found.iter().enumerate().any(|(j, (q, _))| {
            j != i && q.area() > p.area() && p.vertices().iter().all(|v| q.contains(*v))
        });
        if inside_other {
            discarded.push(nested.clone());
        } else {
            polygons.push(p.clone());
        }
    }
    Ok(Traced {
        polygons,
        discarded,
    })
}

fn degree(e: &EdgeMap, on: &[bool], c: usize, r: usize) -> usize {
    neighbors8(c, r, e.width, e.height)
        .filter(|&(nc, nr)| on[nr * e.width + nc])
        .count()
}

/// Joins pairs of loose chain ends, nearest pairs first.
fn bridge_gaps(e: &mut EdgeMap, gap: f64) {
    let ends: Vec<(usize, usize)> = (0..e.height)
        .flat_map(|r| (0..e.width).map(move |c| (c, r)))
        .filter(|&(c, r)| e.get(c, r) && degree(e, &e.edges, c, r) <= 1)
        .collect();
    let mut pairs = Vec::new();
    for (i, a) in ends.iter().enumerate() {
        for b in &ends[i + 1..] {
            let d = (a.0 as f64 - b.0 as f64).hypot(a.1 as f64 - b.1 as f64);
            if d <= gap {
                pairs.push((d, *a, *b));
            }
        }
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut used = std::collections::HashSet::new();
    for (_, a, b) in pairs {
        if used.contains(&a) || used.contains(&b) {
            continue;
        }
        used.insert(a);
        used.insert(b);
        let steps = (a.0.abs_diff(b.0)).max(a.1.abs_diff(b.1));
        for s in 1..steps {
            let t = s as f64 / steps as f64;
            let c = (a.0 as f64 + t * (b.0 as f64 - a.0 as f64)).round() as usize;
            let r = (a.1 as f64 + t * (b.1 as f64 - a.1 as f64)).round() as usize;
            e.set(c, r, true);
        }
    }
}

/// Repeatedly strips pixels with at most one neighbour, leaving only cycles.
fn prune_spurs(e: &EdgeMap) -> Vec<bool> {
    let mut on = e.edges.clone();
    let mut queue: VecDeque<(usize, usize)> = (0..e.height)
        .flat_map(|r| (0..e.width).map(move |c| (c, r)))
        .filter(|&(c, r)| on[r * e.width + c])
        .collect();
    while let Some((c, r)) = queue.pop_front() {
        let i = r * e.width + c;
        if on[i] && degree(e, &on, c, r) <= 1 {
            on[i] = false;
            queue.extend(
                neighbors8(c, r, e.width, e.height).filter(|&(nc, nr)| on[nr * e.width + nc]),
            );
        }
    }
    on
}

const MOORE: [(isize, isize); 8] = [
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
];

/// Ordered positions along the outer side of a closed chain, or `None` when
/// the chain encloses nothing.
fn outer_contour(e: &EdgeMap, ring: &[(usize, usize)]) -> Option<Vec<P>> {
    let c0 = ring.iter().map(|p| p.0).min()?;
    let r0 = ring.iter().map(|p| p.1).min()?;
    let c1 = ring.iter().map(|p| p.0).max()?;
    let r1 = ring.iter().map(|p| p.1).max()?;
    // local grid with a one-pixel empty border
    let (w, h) = (c1 - c0 + 3, r1 - r0 + 3);
    let mut is_ring = vec![false; w * h];
    for &(c, r) in ring {
        is_ring[(r - r0 + 1) * w + (c - c0 + 1)] = true;
    }
    let mut outside = vec![false; w * h];
    let mut queue = VecDeque::from([0usize]);
    outside[0] = true;
    while let Some(i) = queue.pop_front() {
        let (c, r) = ((i % w) as isize, (i / w) as isize);
        for (dc, dr) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
            let (nc, nr) = (c + dc, r + dr);
            if nc < 0 || nr < 0 || nc >= w as isize || nr >= h as isize {
                continue;
            }
            let j = nr as usize * w + nc as usize;
            if !outside[j] && !is_ring[j] {
                outside[j] = true;
                queue.push_back(j);
            }
        }
    }
    let blob = |c: isize, r: isize| !outside[r as usize * w + c as usize];
    let interior = (0..w * h).filter(|&i| !outside[i] && !is_ring[i]).count();
    if interior == 0 {
        return None;
    }

    let start = (0..w * h).find(|&i| !outside[i])?;
    let start = ((start % w) as isize, (start / w) as isize);
    let back0 = (start.0 - 1, start.1);
    let (mut p, mut back) = (start, back0);
    let mut path = vec![start];
    for _ in 0..(8 * w * h) {
        let bdir = MOORE
            .iter()
            .position(|&(dc, dr)| (p.0 + dc, p.1 + dr) == back)
            .expect("backtrack is a neighbour");
        let mut next = None;
        for k in 1..=8 {
            let (dc, dr) = MOORE[(bdir + k) % 8];
            let q = (p.0 + dc, p.1 + dr);
            if blob(q.0, q.1) {
                let (bc, br) = MOORE[(bdir + k - 1) % 8];
                next = Some((q, (p.0 + bc, p.1 + br)));
                break;
            }
        }
        let (q, b) = next?;
        p = q;
        back = b;
        if p == start && back == back0 {
            break;
        }
        path.push(p);
    }

    let pts = path
        .into_iter()
        .map(|(c, r)| {
            let (gc, gr) = ((c - 1) as usize + c0, (r - 1) as usize + r0);
            if is_ring[r as usize * w + c as usize] {
                e.position(gc, gr)
            } else {
                (gc as f64 + 0.5, gr as f64 + 0.5)
            }
        })
        .collect();
    Some(pts)
}

fn dist(a: P, b: P) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

fn point_line_distance(p: P, a: P, b: P) -> f64 {
    let len = dist(a, b);
    if len < 1e-12 {
        return dist(p, a);
    }
    ((b.0 - a.0) * (a.1 - p.1) - (a.0 - p.0) * (b.1 - a.1)).abs() / len
}

fn rdp(pts: &[P], eps: f64, keep: &mut Vec<P>) {
    let (first, last) = (pts[0], pts[pts.len() - 1]);
    let mut best = (0.0, 0);
    for (i, &p) in pts.iter().enumerate().take(pts.len() - 1).skip(1) {
        let d = point_line_distance(p, first, last);
        if d > best.0 {
            best = (d, i);
        }
    }
    if best.0 > eps {
        rdp(&pts[..=best.1], eps, keep);
        rdp(&pts[best.1..], eps, keep);
    } else {
        keep.push(first);
    }
}

/// Douglas-Peucker on a closed contour, split at the point farthest from
/// the start.
fn rdp_closed(pts: &[P], eps: f64) -> Vec<P> {
    let far = (0..pts.len())
        .max_by(|&i, &j| dist(pts[0], pts[i]).total_cmp(&dist(pts[0], pts[j])))
        .unwrap_or(0);
    if far == 0 {
        return pts.to_vec();
    }
    let mut keep = Vec::new();
    rdp(&pts[..=far], eps, &mut keep);
    let mut tail = pts[far..].to_vec();
    tail.push(pts[0]);
    rdp(&tail, eps, &mut keep);
    keep
}

fn turn_deg(a: P, v: P, c: P) -> f64 {
    let (ux, uy) = (v.0 - a.0, v.1 - a.1);
    let (wx, wy) = (c.0 - v.0, c.1 - v.1);
    let n = ux.hypot(uy) * wx.hypot(wy);
    if n < 1e-12 {
        return 0.0;
    }
    ((ux * wx + uy * wy) / n)
        .clamp(-1.0, 1.0)
        .acos()
        .to_degrees()
}

/// Intersection of line `a`-`b` with line `c`-`d`, if not near parallel.
fn intersect(a: P, b: P, c: P, d: P, min_sin: f64) -> Option<P> {
    let (ux, uy) = (b.0 - a.0, b.1 - a.1);
    let (wx, wy) = (d.0 - c.0, d.1 - c.1);
    let cross = ux * wy - uy * wx;
    if cross.abs() < min_sin * ux.hypot(uy) * wx.hypot(wy) {
        return None;
    }
    let t = ((c.0 - a.0) * wy - (c.1 - a.1) * wx) / cross;
    Some((a.0 + t * ux, a.1 + t * uy))
}

fn simplify_outline(contour: &[P], lines: &[HoughLine], cfg: &TraceConfig) -> Option<Vec<P>> {
    let mut pts: Vec<P> = Vec::with_capacity(contour.len());
    for &p in contour {
        if pts.last().is_none_or(|&q| dist(p, q) > 1e-9) {
            pts.push(p);
        }
    }
    while pts.len() > 1 && dist(pts[0], pts[pts.len() - 1]) < 1e-9 {
        pts.pop();
    }
    if pts.len() < 3 {
        return None;
    }
    let mut v = rdp_closed(&pts, cfg.simplify_px);

    // drop shallow vertices, least visible first
    while v.len() > 3 {
        let n = v.len();
        let victim = (0..n)
            .filter_map(|i| {
                let (a, p, c) = (v[(i + n - 1) % n], v[i], v[(i + 1) % n]);
                let dev = point_line_distance(p, a, c);
                (turn_deg(a, p, c) < cfg.corner_angle_deg && dev < cfg.max_deviation_px)
                    .then_some((dev, i))
            })
            .min_by(|x, y| x.0.total_cmp(&y.0));
        match victim {
            Some((_, i)) => {
                v.remove(i);
            }
            None => break,
        }
    }

    // collapse short edges into the corner their neighbours point at
    while v.len() > 3 {
        let n = v.len();
        let Some((len, i)) = (0..n)
            .map(|i| (dist(v[i], v[(i + 1) % n]), i))
            .min_by(|x, y| x.0.total_cmp(&y.0))
        else {
            break;
        };
        if len >= cfg.min_edge_px {
            break;
        }
        let (a, b, c, d) = (v[(i + n - 1) % n], v[i], v[(i + 1) % n], v[(i + 2) % n]);
        let mid = ((b.0 + c.0) / 2.0, (b.1 + c.1) / 2.0);
        let corner = intersect(a, b, c, d, 0.2)
            .filter(|&x| dist(x, mid) <= 2.0 * cfg.min_edge_px)
            .unwrap_or(mid);
        v[i] = corner;
        v.remove((i + 1) % n);
    }
    if v.len() < 3 {
        return None;
    }
    Some(snap_to_lines(&v, lines, cfg))
}

/// Moves edges onto matching detected lines and rebuilds corners as
/// intersections of consecutive edge lines.
fn snap_to_lines(v: &[P], lines: &[HoughLine], cfg: &TraceConfig) -> Vec<P> {
    let n = v.len();
    let tol = cfg.snap_angle_deg.to_radians();
    // each edge as (normal, rho, snapped)
    let edge_lines: Vec<((f64, f64), f64, bool)> = (0..n)
        .map(|i| {
            let (a, b) = (v[i], v[(i + 1) % n]);
            let normal = (b.1 - a.1).atan2(b.0 - a.0) + std::f64::consts::FRAC_PI_2;
            let theta = normal.rem_euclid(std::f64::consts::PI);
            let best = lines
                .iter()
                .filter(|l| {
                    let d = (l.theta - theta).abs();
                    d.min(std::f64::consts::PI - d) <= tol
                })
                .map(|l| (l.distance(a.0, a.1) + l.distance(b.0, b.1), l))
                .filter(|(_, l)| {
                    l.distance(a.0, a.1) <= cfg.snap_px && l.distance(b.0, b.1) <= cfg.snap_px
                })
                .min_by(|x, y| x.0.total_cmp(&y.0));
            match best {
                Some((_, l)) => ((l.theta.cos(), l.theta.sin()), l.rho, true),
                None => {
                    let (nx, ny) = (theta.cos(), theta.sin());
                    ((nx, ny), nx * a.0 + ny * a.1, false)
                }
            }
        })
        .collect();

    (0..n)
        .map(|i| {
            let p = v[i];
            let (n0, r0, s0) = edge_lines[(i + n - 1) % n];
            let (n1, r1, s1) = edge_lines[i];
            if !s0 && !s1 {
                return p;
            }
            let det = n0.0 * n1.1 - n0.1 * n1.0;
            if det.abs() > 0.25 {
                let x = ((r0 * n1.1 - r1 * n0.1) / det, (n0.0 * r1 - n1.0 * r0) / det);
                if dist(x, p) <= 2.0 * cfg.snap_px + cfg.min_edge_px {
                    return x;
                }
            }
            let (nn, rr) = if s1 { (n1, r1) } else { (n0, r0) };
            let off = nn.0 * p.0 + nn.1 * p.1 - rr;
            (p.0 - off * nn.0, p.1 - off * nn.1)
        })
        .collect()
}

fn shoelace(v: &[P]) -> f64 {
    let n = v.len();
    (0..n)
        .map(|i| {
            let (a, b) = (v[i], v[(i + 1) % n]);
            a.0 * b.1 - b.0 * a.1
        })
        .sum::<f64>()
        / 2.0
}
