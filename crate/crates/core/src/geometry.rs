//! Planar and 3D geometry for the obstacle model.
//!
//! Buildings are vertical prisms: a simple footprint polygon extruded from
//! the ground up to a fixed height. Line-of-sight between a ground user and a
//! drone is blocked when some point of the connecting segment lies inside or
//! on a prism.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance (meters) for boundary tests.
const EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn with_z(self, z: f64) -> Point3 {
        Point3::new(self.x, self.y, z)
    }

    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }

    fn cross(self, o: Point2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    fn dot(self, o: Point2) -> f64 {
        self.x * o.x + self.y * o.y
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    /// Altitude above ground.
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Point3 { x, y, z }
    }

    pub fn xy(&self) -> Point2 {
        Point2::new(self.x, self.y)
    }

    fn lerp(&self, o: &Point3, t: f64) -> Point3 {
        Point3::new(
            self.x + t * (o.x - self.x),
            self.y + t * (o.y - self.y),
            self.z + t * (o.z - self.z),
        )
    }
}

/// Euclidean distance between two points in space.
pub fn distance_3d(a: &Point3, b: &Point3) -> f64 {
    let (dx, dy, dz) = (a.x - b.x, a.y - b.y, a.z - b.z);
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// Axis-aligned rectangular ground region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub width: f64,
    pub height: f64,
    #[serde(default = "origin_zero")]
    pub origin: Point2,
}

fn origin_zero() -> Point2 {
    Point2::new(0.0, 0.0)
}

impl Region {
    pub fn new(width: f64, height: f64, origin: Point2) -> Result<Self> {
        let r = Region {
            width,
            height,
            origin,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn square(side: f64) -> Self {
        Region {
            width: side,
            height: side,
            origin: origin_zero(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.width > 0.0 && self.height > 0.0 && self.origin.is_finite()) {
            return Err(Error::InvalidGeometry(format!(
                "region must have positive finite extent, got {}x{}",
                self.width, self.height
            )));
        }
        Ok(())
    }

    pub fn min(&self) -> Point2 {
        self.origin
    }

    pub fn max(&self) -> Point2 {
        Point2::new(self.origin.x + self.width, self.origin.y + self.height)
    }

    pub fn contains(&self, p: Point2) -> bool {
        let (lo, hi) = (self.min(), self.max());
        p.x >= lo.x - EPS && p.x <= hi.x + EPS && p.y >= lo.y - EPS && p.y <= hi.y + EPS
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    pub fn diagonal(&self) -> f64 {
        self.width.hypot(self.height)
    }

    pub fn to_polygon(&self) -> Polygon {
        let (lo, hi) = (self.min(), self.max());
        Polygon {
            vertices: vec![lo, Point2::new(hi.x, lo.y), hi, Point2::new(lo.x, hi.y)],
        }
    }
}

/// Signed shoelace area; positive for counter-clockwise rings.
fn signed_area(poly: &[Point2]) -> f64 {
    let n = poly.len();
    let mut acc = 0.0;
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        acc += a.x * b.y - b.x * a.y;
    }
    acc / 2.0
}

fn require_ring(poly: &[Point2]) -> Result<()> {
    if poly.len() < 3 {
        return Err(Error::InvalidGeometry(format!(
            "polygon needs at least 3 vertices, got {}",
            poly.len()
        )));
    }
    if poly.iter().any(|p| !p.is_finite()) {
        return Err(Error::InvalidGeometry("non-finite vertex".into()));
    }
    Ok(())
}

/// Shoelace area of a simple polygon, either orientation.
pub fn polygon_area(poly: &[Point2]) -> Result<f64> {
    require_ring(poly)?;
    Ok(signed_area(poly).abs())
}

fn on_segment(p: Point2, a: Point2, b: Point2) -> bool {
    let ab = b.sub(a);
    let ap = p.sub(a);
    let len = ab.dot(ab).sqrt();
    if len < EPS {
        return ap.dot(ap).sqrt() <= EPS;
    }
    // distance from line, then projection within the segment
    if (ab.cross(ap) / len).abs() > EPS {
        return false;
    }
    let t = ap.dot(ab) / (len * len);
    t >= -EPS / len && t <= 1.0 + EPS / len
}

/// Containment test that counts the boundary as inside.
pub fn point_in_polygon(p: Point2, poly: &[Point2]) -> Result<bool> {
    require_ring(poly)?;
    Ok(contains_unchecked(p, poly))
}

fn contains_unchecked(p: Point2, poly: &[Point2]) -> bool {
    let n = poly.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if on_segment(p, a, b) {
            return true;
        }
        if (a.y > p.y) != (b.y > p.y) {
            let x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x_cross {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

fn orient(a: Point2, b: Point2, c: Point2) -> f64 {
    b.sub(a).cross(c.sub(a))
}

fn segments_touch(a: Point2, b: Point2, c: Point2, d: Point2) -> bool {
    let (d1, d2) = (orient(c, d, a), orient(c, d, b));
    let (d3, d4) = (orient(a, b, c), orient(a, b, d));
    if ((d1 > EPS && d2 < -EPS) || (d1 < -EPS && d2 > EPS))
        && ((d3 > EPS && d4 < -EPS) || (d3 < -EPS && d4 > EPS))
    {
        return true;
    }
    on_segment(a, c, d) || on_segment(b, c, d) || on_segment(c, a, b) || on_segment(d, a, b)
}

/// A validated simple polygon stored counter-clockwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Point2>", into = "Vec<Point2>")]
pub struct Polygon {
    vertices: Vec<Point2>,
}

impl Polygon {
    /// Drops repeated (and ring-closing) vertices, rejects degenerate or
    /// self-intersecting rings and normalizes orientation to CCW.
    pub fn new(vertices: Vec<Point2>) -> Result<Self> {
        let mut v: Vec<Point2> = Vec::with_capacity(vertices.len());
        for p in vertices {
            if v.last()
                .is_none_or(|q: &Point2| q.sub(p).dot(q.sub(p)) > EPS * EPS)
            {
                v.push(p);
            }
        }
        while v.len() > 1 {
            let (f, l) = (v[0], v[v.len() - 1]);
            if f.sub(l).dot(f.sub(l)) <= EPS * EPS {
                v.pop();
            } else {
                break;
            }
        }
        require_ring(&v)?;
        let area = signed_area(&v);
        if area.abs() <= EPS {
            return Err(Error::InvalidGeometry("polygon has zero area".into()));
        }
        let n = v.len();
        for i in 0..n {
            for j in (i + 1)..n {
                // skip edges sharing a vertex
                if j == i + 1 || (i == 0 && j == n - 1) {
                    continue;
                }
                if segments_touch(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]) {
                    return Err(Error::InvalidGeometry(format!(
                        "polygon self-intersects (edges {i} and {j})"
                    )));
                }
            }
        }
        if area < 0.0 {
            v.reverse();
        }
        Ok(Polygon { vertices: v })
    }

    /// Axis-aligned rectangle `[x0, x1] x [y0, y1]`.
    pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        Polygon::new(vec![
            Point2::new(x0, y0),
            Point2::new(x1, y0),
            Point2::new(x1, y1),
            Point2::new(x0, y1),
        ])
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn contains(&self, p: Point2) -> bool {
        contains_unchecked(p, &self.vertices)
    }

    pub fn bbox(&self) -> (Point2, Point2) {
        let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &self.vertices {
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
        }
        (lo, hi)
    }

    pub fn is_convex(&self) -> bool {
        let n = self.vertices.len();
        (0..n).all(|i| {
            orient(
                self.vertices[i],
                self.vertices[(i + 1) % n],
                self.vertices[(i + 2) % n],
            ) >= -EPS
        })
    }
}

impl TryFrom<Vec<Point2>> for Polygon {
    type Error = Error;

    fn try_from(v: Vec<Point2>) -> Result<Self> {
        Polygon::new(v)
    }
}

impl From<Polygon> for Vec<Point2> {
    fn from(p: Polygon) -> Self {
        p.vertices
    }
}

/// Vertical prism from the ground to `height`.
#[derive(Debug, Clone, PartialEq)]
pub struct Building {
    footprint: Polygon,
    height: f64,
    bbox: (Point2, Point2),
}

impl Building {
    pub fn new(footprint: Polygon, height: f64) -> Result<Self> {
        if !(height > 0.0 && height.is_finite()) {
            return Err(Error::InvalidGeometry(format!(
                "building height must be positive, got {height}"
            )));
        }
        let bbox = footprint.bbox();
        Ok(Building {
            footprint,
            height,
            bbox,
        })
    }

    pub fn from_vertices(vertices: Vec<Point2>, height: f64) -> Result<Self> {
        Building::new(Polygon::new(vertices)?, height)
    }

    pub fn footprint(&self) -> &Polygon {
        &self.footprint
    }

    pub fn vertices(&self) -> &[Point2] {
        self.footprint.vertices()
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn covers(&self, p: Point2) -> bool {
        let (lo, hi) = self.bbox;
        if p.x < lo.x - EPS || p.x > hi.x + EPS || p.y < lo.y - EPS || p.y > hi.y + EPS {
            return false;
        }
        self.footprint.contains(p)
    }

    /// Whether the closed segment `a -> b` touches this prism. The segment is
    /// sampled at spacing `<= step` restricted to the footprint's bounding box,
    /// plus every parameter where it crosses a footprint edge; since altitude
    /// is linear along the segment, those crossings are where the lowest point
    /// over the footprint occurs.
    fn blocks(&self, a: &Point3, b: &Point3, step: f64) -> bool {
        let Some((t0, t1)) = self.bbox_interval(a, b) else {
            return false;
        };
        let za = a.z + t0 * (b.z - a.z);
        let zb = a.z + t1 * (b.z - a.z);
        if za.min(zb) > self.height + EPS {
            return false;
        }

        let hit = |t: f64| {
            let q = a.lerp(b, t);
            q.z <= self.height + EPS && self.footprint.contains(q.xy())
        };

        let len = distance_3d(a, b);
        let n = ((len / step).ceil() as usize).max(1);
        let k0 = (t0 * n as f64).floor() as usize;
        let k1 = ((t1 * n as f64).ceil() as usize).min(n);
        if (k0..=k1).any(|k| hit(k as f64 / n as f64)) {
            return true;
        }
        if hit(t0) || hit(t1) {
            return true;
        }

        let (pa, pb) = (a.xy(), b.xy());
        let dir = pb.sub(pa);
        let verts = self.footprint.vertices();
        let m = verts.len();
        for i in 0..m {
            let (c, d) = (verts[i], verts[(i + 1) % m]);
            let e = d.sub(c);
            let denom = dir.cross(e);
            if denom.abs() > 1e-12 {
                let t = c.sub(pa).cross(e) / denom;
                let u = c.sub(pa).cross(dir) / denom;
                if (-1e-12..=1.0 + 1e-12).contains(&t)
                    && (-1e-12..=1.0 + 1e-12).contains(&u)
                    && hit(t.clamp(0.0, 1.0))
                {
                    return true;
                }
            } else {
                // parallel: collinear overlap is decided at the edge endpoints
                let dd = dir.dot(dir);
                if dd > 0.0 && c.sub(pa).cross(dir).abs() <= EPS * dd.sqrt() {
                    for v in [c, d] {
                        let t = v.sub(pa).dot(dir) / dd;
                        if (0.0..=1.0).contains(&t) && hit(t) {
                            return true;
                        }
                    }
                }
            }
        }
        false
    }

    /// Parameter range over which the segment's ground projection lies in
    /// the footprint's bounding box.
    fn bbox_interval(&self, a: &Point3, b: &Point3) -> Option<(f64, f64)> {
        let (lo, hi) = self.bbox;
        let mut t0: f64 = 0.0;
        let mut t1: f64 = 1.0;
        for (start, delta, min, max) in [
            (a.x, b.x - a.x, lo.x - EPS, hi.x + EPS),
            (a.y, b.y - a.y, lo.y - EPS, hi.y + EPS),
        ] {
            if delta.abs() < 1e-15 {
                if start < min || start > max {
                    return None;
                }
            } else {
                let (mut s0, mut s1) = ((min - start) / delta, (max - start) / delta);
                if s0 > s1 {
                    std::mem::swap(&mut s0, &mut s1);
                }
                t0 = t0.max(s0);
                t1 = t1.min(s1);
                if t0 > t1 {
                    return None;
                }
            }
        }
        Some((t0, t1))
    }
}

/// True when the segment from `user` to `drone` intersects any building.
pub fn los_blocked(user: &Point3, drone: &Point3, buildings: &[Building], step: f64) -> bool {
    debug_assert!(step > 0.0);
    buildings.iter().any(|b| b.blocks(user, drone, step))
}

/// Whether `p` lies inside (or on) any footprint.
pub fn inside_any(p: Point2, buildings: &[Building]) -> bool {
    buildings.iter().any(|b| b.covers(p))
}

fn tri_area_signed(a: Point2, b: Point2, c: Point2) -> f64 {
    orient(a, b, c) / 2.0
}

/// Sutherland-Hodgman clip of `subject` by a convex CCW `clip` polygon.
fn clip_convex(subject: &[Point2], clip: &[Point2]) -> Vec<Point2> {
    let mut out = subject.to_vec();
    let n = clip.len();
    for i in 0..n {
        if out.is_empty() {
            break;
        }
        let (a, b) = (clip[i], clip[(i + 1) % n]);
        let input = std::mem::take(&mut out);
        let m = input.len();
        for j in 0..m {
            let (p, q) = (input[j], input[(j + 1) % m]);
            let (sp, sq) = (orient(a, b, p), orient(a, b, q));
            if sp >= 0.0 {
                out.push(p);
            }
            if (sp >= 0.0) != (sq >= 0.0) {
                let t = sp / (sp - sq);
                out.push(Point2::new(p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)));
            }
        }
    }
    out
}

/// Signed fan triangulation, each triangle oriented CCW with its sign.
fn signed_fan(poly: &[Point2]) -> Vec<([Point2; 3], f64)> {
    let o = poly[0];
    (1..poly.len() - 1)
        .filter_map(|i| {
            let (a, b) = (poly[i], poly[i + 1]);
            let s = tri_area_signed(o, a, b);
            if s.abs() < 1e-15 {
                None
            } else if s > 0.0 {
                Some(([o, a, b], 1.0))
            } else {
                Some(([o, b, a], -1.0))
            }
        })
        .collect()
}

/// Area of the intersection of two simple polygons.
///
/// The indicator of a simple polygon equals the signed sum of indicators of
/// its fan triangles, so the overlap integral reduces to pairwise
/// convex-convex clips.
pub fn polygon_intersection_area(a: &[Point2], b: &[Point2]) -> Result<f64> {
    require_ring(a)?;
    require_ring(b)?;
    let (fa, fb) = (signed_fan(a), signed_fan(b));
    let mut total = 0.0;
    for (ta, sa) in &fa {
        for (tb, sb) in &fb {
            let clipped = clip_convex(ta, tb);
            if clipped.len() >= 3 {
                total += sa * sb * signed_area(&clipped).abs();
            }
        }
    }
    let bound = signed_area(a).abs().min(signed_area(b).abs());
    Ok(total.clamp(0.0, bound))
}
