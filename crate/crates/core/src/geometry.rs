//! Points, rays, planar polygons and façade plane frames.
//!
//! Every façade texture and fitted opening is expressed in a [`PlaneFrame`]:
//! `u` runs horizontally along the wall, `v` points up, `n` is the outward
//! normal. Non-vertical faces (roofs, grounds) fall back to `u = e_x`.

use nalgebra::Unit;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point3 = nalgebra::Point3<f64>;
pub type Vector3 = nalgebra::Vector3<f64>;

/// Coplanarity tolerance for polygon vertices, meters.
pub const PLANE_EPSILON: f64 = 1e-3;

const DIRECTION_TOLERANCE: f64 = 1e-9;

/// A measurement ray from a sensor position towards its hit point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: Point3,
    pub direction: Unit<Vector3>,
    pub length: f64,
}

impl Ray {
    pub fn new(origin: Point3, direction: Vector3, length: f64) -> Result<Self> {
        let norm = direction.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::DegenerateGeometry(
                "ray direction has zero length".into(),
            ));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::EmptyTraversal);
        }
        let direction = if (norm - 1.0).abs() <= DIRECTION_TOLERANCE {
            Unit::new_unchecked(direction)
        } else {
            Unit::new_normalize(direction)
        };
        Ok(Ray {
            origin,
            direction,
            length,
        })
    }

    /// Ray from `from` ending exactly at `to`.
    pub fn between(from: Point3, to: Point3) -> Result<Self> {
        let d = to - from;
        let length = d.norm();
        if length == 0.0 {
            return Err(Error::EmptyTraversal);
        }
        Ok(Ray {
            origin: from,
            direction: Unit::new_normalize(d),
            length,
        })
    }

    pub fn at(&self, t: f64) -> Point3 {
        self.origin + self.direction.into_inner() * t
    }

    pub fn end(&self) -> Point3 {
        self.at(self.length)
    }
}

/// Orthonormal, right-handed frame on a plane (`u × v = n`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneFrame {
    pub origin: Point3,
    pub u: Vector3,
    pub v: Vector3,
    pub n: Vector3,
}

impl PlaneFrame {
    /// Frame for a unit normal, with the horizontal-u convention.
    pub fn from_normal(origin: Point3, n: Vector3) -> Result<Self> {
        let n = n
            .try_normalize(1e-12)
            .ok_or_else(|| Error::DegenerateGeometry("zero normal".into()))?;
        let horizontal = Vector3::z().cross(&n);
        let u = if horizontal.norm() > 1e-9 {
            horizontal.normalize()
        } else {
            Vector3::x()
        };
        let v = n.cross(&u);
        Ok(PlaneFrame { origin, u, v, n })
    }

    pub fn project(&self, p: &Point3) -> (f64, f64, f64) {
        project_to_plane(p, self)
    }

    pub fn unproject(&self, u: f64, v: f64, d: f64) -> Point3 {
        self.origin + self.u * u + self.v * v + self.n * d
    }
}

/// Planar polygon with optional holes. Rings are stored open (no repeated
/// closing vertex).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPolygon")]
pub struct PlanarPolygon {
    exterior: Vec<Point3>,
    holes: Vec<Vec<Point3>>,
}

impl PlanarPolygon {
    pub fn new(exterior: Vec<Point3>, holes: Vec<Vec<Point3>>) -> Result<Self> {
        let exterior = open_ring(exterior);
        let holes: Vec<_> = holes.into_iter().map(open_ring).collect();
        for ring in std::iter::once(&exterior).chain(holes.iter()) {
            if !ring.iter().all(|p| p.coords.iter().all(|c| c.is_finite())) {
                return Err(Error::DegenerateGeometry("non-finite vertex".into()));
            }
            if distinct_count(ring) < 3 {
                return Err(Error::DegenerateGeometry(
                    "ring has fewer than 3 distinct vertices".into(),
                ));
            }
        }
        let frame = fit_ring_frame(&exterior)?;
        for ring in std::iter::once(&exterior).chain(holes.iter()) {
            for p in ring {
                let d = (p - frame.origin).dot(&frame.n).abs();
                if d > PLANE_EPSILON {
                    return Err(Error::DegenerateGeometry(format!(
                        "vertex {:?} is {d:.4} m off the polygon plane",
                        [p.x, p.y, p.z]
                    )));
                }
            }
        }
        let ring2d = to_plane_2d(&exterior, &frame);
        if ring_self_intersects(&ring2d) {
            return Err(Error::DegenerateGeometry(
                "exterior ring self-intersects".into(),
            ));
        }
        Ok(PlanarPolygon { exterior, holes })
    }

    /// Axis-aligned rectangle in a frame, counter-clockwise seen from `+n`.
    pub fn rectangle(
        frame: &PlaneFrame,
        u0: f64,
        v0: f64,
        width: f64,
        height: f64,
    ) -> Result<Self> {
        Self::new(rectangle_ring(frame, u0, v0, width, height), Vec::new())
    }

    pub fn exterior(&self) -> &[Point3] {
        &self.exterior
    }

    pub fn holes(&self) -> &[Vec<Point3>] {
        &self.holes
    }

    pub fn with_holes(&self, holes: Vec<Vec<Point3>>) -> Result<Self> {
        Self::new(self.exterior.clone(), holes)
    }

    pub fn translated(&self, offset: &Vector3) -> Self {
        let shift = |ring: &Vec<Point3>| ring.iter().map(|p| p + offset).collect::<Vec<_>>();
        PlanarPolygon {
            exterior: shift(&self.exterior),
            holes: self.holes.iter().map(shift).collect(),
        }
    }

    pub fn normal(&self) -> Vector3 {
        newell(&self.exterior).normalize()
    }
}

#[derive(Deserialize)]
struct RawPolygon {
    exterior: Vec<Point3>,
    #[serde(default)]
    holes: Vec<Vec<Point3>>,
}

impl TryFrom<RawPolygon> for PlanarPolygon {
    type Error = Error;

    fn try_from(raw: RawPolygon) -> Result<Self> {
        PlanarPolygon::new(raw.exterior, raw.holes)
    }
}

fn open_ring(mut ring: Vec<Point3>) -> Vec<Point3> {
    if ring.len() > 1 && ring.first() == ring.last() {
        ring.pop();
    }
    ring
}

fn distinct_count(ring: &[Point3]) -> usize {
    let mut seen: Vec<&Point3> = Vec::with_capacity(ring.len());
    for p in ring {
        if !seen.iter().any(|q| (*q - p).norm() <= 1e-12) {
            seen.push(p);
        }
    }
    seen.len()
}

pub(crate) fn rectangle_ring(frame: &PlaneFrame, u0: f64, v0: f64, w: f64, h: f64) -> Vec<Point3> {
    vec![
        frame.unproject(u0, v0, 0.0),
        frame.unproject(u0 + w, v0, 0.0),
        frame.unproject(u0 + w, v0 + h, 0.0),
        frame.unproject(u0, v0 + h, 0.0),
    ]
}

/// Newell's normal; its length is twice the ring's area.
fn newell(ring: &[Point3]) -> Vector3 {
    let mut n = Vector3::zeros();
    for (i, a) in ring.iter().enumerate() {
        let b = &ring[(i + 1) % ring.len()];
        n.x += (a.y - b.y) * (a.z + b.z);
        n.y += (a.z - b.z) * (a.x + b.x);
        n.z += (a.x - b.x) * (a.y + b.y);
    }
    n
}

fn centroid(ring: &[Point3]) -> Point3 {
    let sum = ring.iter().fold(Vector3::zeros(), |acc, p| acc + p.coords);
    Point3::from(sum / ring.len() as f64)
}

fn fit_ring_frame(ring: &[Point3]) -> Result<PlaneFrame> {
    let n = newell(ring);
    if n.norm() <= 1e-12 {
        return Err(Error::DegenerateGeometry("ring has zero area".into()));
    }
    let c = centroid(ring);
    let frame = PlaneFrame::from_normal(c, n)?;
    let (mut umin, mut vmin) = (f64::INFINITY, f64::INFINITY);
    for p in ring {
        let (u, v, _) = frame.project(p);
        umin = umin.min(u);
        vmin = vmin.min(v);
    }
    Ok(PlaneFrame {
        origin: frame.unproject(umin, vmin, 0.0),
        ..frame
    })
}

/// Frame of a polygon: Newell normal, horizontal `u`, origin at the minimum
/// `(u, v)` corner of the exterior ring.
pub fn fit_plane_frame(poly: &PlanarPolygon) -> Result<PlaneFrame> {
    fit_ring_frame(&poly.exterior)
}

/// In-plane coordinates and signed distance along the frame normal.
pub fn project_to_plane(p: &Point3, f: &PlaneFrame) -> (f64, f64, f64) {
    let d = p - f.origin;
    (d.dot(&f.u), d.dot(&f.v), d.dot(&f.n))
}

fn to_plane_2d(ring: &[Point3], frame: &PlaneFrame) -> Vec<[f64; 2]> {
    ring.iter()
        .map(|p| {
            let (u, v, _) = frame.project(p);
            [u, v]
        })
        .collect()
}

fn ring_area_2d(ring: &[[f64; 2]]) -> f64 {
    let mut s = 0.0;
    for (i, a) in ring.iter().enumerate() {
        let b = ring[(i + 1) % ring.len()];
        s += a[0] * b[1] - b[0] * a[1];
    }
    s * 0.5
}

fn segments_cross(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> bool {
    let orient = |p: [f64; 2], q: [f64; 2], r: [f64; 2]| {
        (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
    };
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    (d1 * d2 < 0.0) && (d3 * d4 < 0.0)
}

fn ring_self_intersects(ring: &[[f64; 2]]) -> bool {
    let n = ring.len();
    for i in 0..n {
        let (a, b) = (ring[i], ring[(i + 1) % n]);
        for j in (i + 2)..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let (c, d) = (ring[j], ring[(j + 1) % n]);
            if segments_cross(a, b, c, d) {
                return true;
            }
        }
    }
    false
}

/// Even-odd point-in-polygon over every ring.
fn inside_even_odd(rings: &[Vec<[f64; 2]>], p: [f64; 2]) -> bool {
    let mut inside = false;
    for ring in rings {
        let n = ring.len();
        let mut j = n - 1;
        for i in 0..n {
            let (a, b) = (ring[i], ring[j]);
            if (a[1] > p[1]) != (b[1] > p[1]) {
                let x = (b[0] - a[0]) * (p[1] - a[1]) / (b[1] - a[1]) + a[0];
                if p[0] < x {
                    inside = !inside;
                }
            }
            j = i;
        }
    }
    inside
}

/// Polygon with its frame and 2D rings cached for repeated ray tests.
#[derive(Debug, Clone)]
pub struct PreparedPolygon {
    pub frame: PlaneFrame,
    rings: Vec<Vec<[f64; 2]>>,
    bounds: [f64; 4],
}

impl PreparedPolygon {
    pub fn new(poly: &PlanarPolygon) -> Result<Self> {
        let frame = fit_plane_frame(poly)?;
        let mut rings = vec![to_plane_2d(&poly.exterior, &frame)];
        rings.extend(poly.holes.iter().map(|h| to_plane_2d(h, &frame)));
        let mut bounds = [
            f64::INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::NEG_INFINITY,
        ];
        for p in &rings[0] {
            bounds[0] = bounds[0].min(p[0]);
            bounds[1] = bounds[1].min(p[1]);
            bounds[2] = bounds[2].max(p[0]);
            bounds[3] = bounds[3].max(p[1]);
        }
        Ok(PreparedPolygon {
            frame,
            rings,
            bounds,
        })
    }

    /// Whether in-plane coordinates lie in the polygon interior.
    pub fn contains_uv(&self, u: f64, v: f64) -> bool {
        if u < self.bounds[0] || u > self.bounds[2] || v < self.bounds[1] || v > self.bounds[3] {
            return false;
        }
        inside_even_odd(&self.rings, [u, v])
    }

    /// `(u_min, v_min, u_max, v_max)` of the exterior ring.
    pub fn extent(&self) -> [f64; 4] {
        self.bounds
    }

    /// Ray parameter of the crossing, if within `[0, max_t]` and inside.
    pub fn intersect(&self, origin: &Point3, dir: &Vector3, max_t: f64) -> Option<f64> {
        let denom = dir.dot(&self.frame.n);
        if denom.abs() < 1e-12 {
            return None;
        }
        let t = (self.frame.origin - origin).dot(&self.frame.n) / denom;
        if !(0.0..=max_t).contains(&t) {
            return None;
        }
        let p = origin + dir * t;
        let (u, v, _) = self.frame.project(&p);
        self.contains_uv(u, v).then_some(t)
    }
}

/// Crossing of a ray segment `[0, length]` with the polygon interior.
pub fn ray_polygon_intersect(r: &Ray, poly: &PlanarPolygon) -> Option<Point3> {
    let prepared = PreparedPolygon::new(poly).ok()?;
    prepared
        .intersect(&r.origin, &r.direction, r.length)
        .map(|t| r.at(t))
}

/// Exterior area minus hole areas, m².
pub fn polygon_area(poly: &PlanarPolygon) -> Result<f64> {
    let frame = fit_plane_frame(poly)?;
    let ext = ring_area_2d(&to_plane_2d(&poly.exterior, &frame)).abs();
    if ext <= 1e-12 {
        return Err(Error::DegenerateGeometry("zero-area exterior".into()));
    }
    let holes: f64 = poly
        .holes
        .iter()
        .map(|h| ring_area_2d(&to_plane_2d(h, &frame)).abs())
        .sum();
    Ok((ext - holes).max(0.0))
}

/// Heading of a façade normal, `atan2(n_y, n_x)` in `(-π, π]`.
pub fn yaw_of_normal(n: &Vector3) -> Result<f64> {
    let horizontal = (n.x * n.x + n.y * n.y).sqrt();
    if horizontal <= 1e-9 * n.norm().max(1.0) {
        return Err(Error::NotAFacade([n.x, n.y, n.z]));
    }
    Ok(n.y.atan2(n.x))
}
