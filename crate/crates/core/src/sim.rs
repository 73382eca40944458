//! Synthetic mobile-laser-scan simulator over a ground-truth LoD3 model.
//!
//! Windows are glass panes in a thin opaque frame; glass passes a ray with
//! probability `τ`. Doors are a frame plus a leaf set back into the wall.
//! Each wall with openings has a plane 4 m behind it standing in for the
//! interior, so rays through openings come back from inside the building.

use std::collections::BTreeMap;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::building::{BuildingModel, OpeningKind, SurfaceType};
use crate::cloud::{
    argmax, peaked, LabelProbs, PointCloud, PointRecord, SemanticLabel, LABEL_COUNT,
};
use crate::error::{Error, Result};
use crate::geometry::{
    fit_plane_frame, rectangle_ring, PlanarPolygon, PlaneFrame, Point3, PreparedPolygon, Vector3,
};
use crate::shape::BBox;

pub const INTERIOR_OFFSET: f64 = 4.0;
pub const FRAME_WIDTH: f64 = 0.1;
pub const DOOR_RECESS: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Transient {
    pub min: Point3,
    pub max: Point3,
    /// Share of passes, from the first, in which the object is present.
    pub active_fraction: f64,
    /// Class the object's points are generated with.
    #[serde(default = "other_label")]
    pub label: SemanticLabel,
}

fn other_label() -> SemanticLabel {
    SemanticLabel::Other
}

impl Transient {
    pub fn active_in(&self, pass: usize, passes: usize) -> bool {
        pass < (self.active_fraction * passes as f64 - 1e-9).ceil() as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSpec {
    pub trajectory: Vec<Point3>,
    /// Angular step in azimuth and elevation, rad.
    pub angular_resolution: f64,
    /// Azimuth window, rad, measured from +x towards +y.
    pub azimuth: [f64; 2],
    /// Elevation window, rad, above the horizontal.
    pub elevation: [f64; 2],
    pub max_range: f64,
    pub range_noise: f64,
    pub window_transmission: f64,
    pub label_confusion: f64,
    #[serde(default)]
    pub transients: Vec<Transient>,
    /// The trajectory is driven this many times.
    pub passes: usize,
    /// Height of an unbounded ground plane, if any.
    #[serde(default)]
    pub terrain_z: Option<f64>,
    pub seed: u64,
}

impl ScanSpec {
    pub fn validate(&self) -> Result<()> {
        if self.trajectory.is_empty() {
            return Err(Error::Spec("empty trajectory".into()));
        }
        if !(self.angular_resolution > 0.0) {
            return Err(Error::Spec("angular_resolution must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.window_transmission) {
            return Err(Error::Spec("window_transmission must lie in [0, 1]".into()));
        }
        if !(0.0..1.0).contains(&self.label_confusion) {
            return Err(Error::Spec("label_confusion must lie in [0, 1)".into()));
        }
        if !(self.range_noise >= 0.0) || !(self.max_range > 0.0) {
            return Err(Error::Spec(
                "range_noise must be >= 0 and max_range > 0".into(),
            ));
        }
        if self.passes == 0 {
            return Err(Error::Spec("passes must be at least 1".into()));
        }
        if self.azimuth[0] > self.azimuth[1] || self.elevation[0] > self.elevation[1] {
            return Err(Error::Spec("angular windows must be ordered".into()));
        }
        Ok(())
    }

    pub fn directions(&self) -> Vec<Vector3> {
        let steps =
            |lo: f64, hi: f64| ((hi - lo) / self.angular_resolution + 1e-9).floor() as usize + 1;
        let na = steps(self.azimuth[0], self.azimuth[1]);
        let ne = steps(self.elevation[0], self.elevation[1]);
        let mut out = Vec::with_capacity(na * ne);
        for i in 0..ne {
            let el = self.elevation[0] + i as f64 * self.angular_resolution;
            for j in 0..na {
                let az = self.azimuth[0] + j as f64 * self.angular_resolution;
                out.push(Vector3::new(
                    el.cos() * az.cos(),
                    el.cos() * az.sin(),
                    el.sin(),
                ));
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
struct Target {
    poly: PreparedPolygon,
    label: SemanticLabel,
    transmissive: bool,
}

#[derive(Debug, Clone)]
struct Portal {
    opening: String,
    poly: PreparedPolygon,
}

fn target(
    ring: Vec<Point3>,
    holes: Vec<Vec<Point3>>,
    label: SemanticLabel,
    transmissive: bool,
) -> Result<Target> {
    Ok(Target {
        poly: PreparedPolygon::new(&PlanarPolygon::new(ring, holes)?)?,
        label,
        transmissive,
    })
}

/// Front rectangle of an opening on its parent wall.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruthBox {
    pub facade: String,
    pub opening: String,
    pub kind: OpeningKind,
    pub bbox: BBox,
}

pub fn ground_truth_boxes(model: &BuildingModel) -> Result<Vec<TruthBox>> {
    model
        .openings
        .iter()
        .map(|o| {
            let wall = model
                .surface(&o.parent)
                .ok_or_else(|| Error::Link(o.parent.clone()))?;
            let frame = fit_plane_frame(&wall.polygon)?;
            let (u, v, _) = frame.project(&o.anchor);
            Ok(TruthBox {
                facade: o.parent.clone(),
                opening: o.id.clone(),
                kind: o.kind,
                bbox: BBox {
                    u_min: u,
                    v_min: v,
                    width: o.width,
                    height: o.height,
                },
            })
        })
        .collect()
}

fn box_faces(min: &Point3, max: &Point3, label: SemanticLabel) -> Result<Vec<Target>> {
    let p = Point3::new;
    let (a, b) = (min, max);
    let quads = [
        [
            p(a.x, a.y, a.z),
            p(b.x, a.y, a.z),
            p(b.x, a.y, b.z),
            p(a.x, a.y, b.z),
        ],
        [
            p(a.x, b.y, a.z),
            p(b.x, b.y, a.z),
            p(b.x, b.y, b.z),
            p(a.x, b.y, b.z),
        ],
        [
            p(a.x, a.y, a.z),
            p(a.x, b.y, a.z),
            p(a.x, b.y, b.z),
            p(a.x, a.y, b.z),
        ],
        [
            p(b.x, a.y, a.z),
            p(b.x, b.y, a.z),
            p(b.x, b.y, b.z),
            p(b.x, a.y, b.z),
        ],
        [
            p(a.x, a.y, a.z),
            p(b.x, a.y, a.z),
            p(b.x, b.y, a.z),
            p(a.x, b.y, a.z),
        ],
        [
            p(a.x, a.y, b.z),
            p(b.x, a.y, b.z),
            p(b.x, b.y, b.z),
            p(a.x, b.y, b.z),
        ],
    ];
    quads
        .into_iter()
        .map(|q| target(q.to_vec(), vec![], label, false))
        .collect()
}

struct Scene {
    targets: Vec<Target>,
    portals: Vec<Portal>,
}

fn build_scene(model: &BuildingModel, terrain_z: Option<f64>) -> Result<Scene> {
    let mut targets = Vec::new();
    let mut portals = Vec::new();
    for s in &model.surfaces {
        let frame = fit_plane_frame(&s.polygon)?;
        let openings: Vec<_> = model.openings.iter().filter(|o| o.parent == s.id).collect();
        let mut holes = s.polygon.holes().to_vec();
        for o in &openings {
            let (u, v, _) = frame.project(&o.anchor);
            let outer = rectangle_ring(&frame, u, v, o.width, o.height);
            let fw = FRAME_WIDTH.min(o.width / 4.0).min(o.height / 4.0);
            let inner = rectangle_ring(
                &frame,
                u + fw,
                v + fw,
                o.width - 2.0 * fw,
                o.height - 2.0 * fw,
            );
            holes.push(outer.clone());
            portals.push(Portal {
                opening: o.id.clone(),
                poly: PreparedPolygon::new(&PlanarPolygon::new(outer.clone(), vec![])?)?,
            });
            match o.kind {
                OpeningKind::Window => {
                    targets.push(target(
                        outer,
                        vec![inner.clone()],
                        SemanticLabel::Window,
                        false,
                    )?);
                    targets.push(target(inner, vec![], SemanticLabel::Window, true)?);
                }
                OpeningKind::Door => {
                    // Bottom edge of a door sits on the ground: a U-shaped frame.
                    let (u0, w, h) = (u + fw, o.width - 2.0 * fw, o.height - fw);
                    let leaf_ring = rectangle_ring(&frame, u0, v, w, h);
                    let frame_ring = vec![
                        frame.unproject(u, v, 0.0),
                        frame.unproject(u0, v, 0.0),
                        frame.unproject(u0, v + h, 0.0),
                        frame.unproject(u0 + w, v + h, 0.0),
                        frame.unproject(u0 + w, v, 0.0),
                        frame.unproject(u + o.width, v, 0.0),
                        frame.unproject(u + o.width, v + o.height, 0.0),
                        frame.unproject(u, v + o.height, 0.0),
                    ];
                    targets.push(target(frame_ring, vec![], SemanticLabel::Door, false)?);
                    let recess = -frame.n * DOOR_RECESS;
                    targets.push(target(
                        leaf_ring.iter().map(|p| p + recess).collect(),
                        vec![],
                        SemanticLabel::Door,
                        false,
                    )?);
                }
            }
        }
        let label = match s.kind {
            SurfaceType::WallSurface => SemanticLabel::Wall,
            SurfaceType::RoofSurface => SemanticLabel::Other,
            SurfaceType::GroundSurface => SemanticLabel::Floor,
        };
        targets.push(target(s.polygon.exterior().to_vec(), holes, label, false)?);
        if s.kind == SurfaceType::WallSurface && !openings.is_empty() {
            targets.push(interior_plane(&frame, &s.polygon)?);
        }
    }
    if let Some(z) = terrain_z {
        let r = 1e4;
        let p = Point3::new;
        targets.push(target(
            vec![p(-r, -r, z), p(r, -r, z), p(r, r, z), p(-r, r, z)],
            vec![],
            SemanticLabel::Floor,
            false,
        )?);
    }
    Ok(Scene { targets, portals })
}

fn interior_plane(frame: &PlaneFrame, wall: &PlanarPolygon) -> Result<Target> {
    let (mut umax, mut vmax) = (0.0f64, 0.0f64);
    for p in wall.exterior() {
        let (u, v, _) = frame.project(p);
        umax = umax.max(u);
        vmax = vmax.max(v);
    }
    let ring = rectangle_ring(frame, 0.0, 0.0, umax, vmax);
    let back = -frame.n * INTERIOR_OFFSET;
    target(
        ring.iter().map(|p| p + back).collect(),
        vec![],
        SemanticLabel::Other,
        false,
    )
}

#[derive(Debug, Clone, Default)]
pub struct Simulation {
    pub cloud: PointCloud,
    /// Rays that reached each opening's front rectangle.
    pub opening_rays: BTreeMap<String, usize>,
    pub rays_cast: usize,
}

impl Simulation {
    pub fn measured(&self, opening: &str, k_min: usize) -> bool {
        self.opening_rays.get(opening).copied().unwrap_or(0) >= k_min
    }
}

fn label_probs(label: SemanticLabel, eps: f64) -> LabelProbs {
    let mut p = [eps / (LABEL_COUNT - 1) as f64; LABEL_COUNT];
    p[label.id()] = 1.0 - eps;
    p
}

fn nearest(
    targets: &[&Target],
    origin: &Point3,
    dir: &Vector3,
    t_min: f64,
    max_t: f64,
) -> Option<(f64, usize)> {
    let mut best: Option<(f64, usize)> = None;
    for (i, t) in targets.iter().enumerate() {
        if let Some(d) = t.poly.intersect(origin, dir, max_t) {
            if d > t_min && best.is_none_or(|(b, _)| d < b) {
                best = Some((d, i));
            }
        }
    }
    best
}

pub fn simulate(model: &BuildingModel, spec: &ScanSpec) -> Result<Simulation> {
    spec.validate()?;
    let scene = build_scene(model, spec.terrain_z)?;
    let transient_faces: Vec<Vec<Target>> = spec
        .transients
        .iter()
        .map(|t| box_faces(&t.min, &t.max, t.label))
        .collect::<Result<_>>()?;
    let dirs = spec.directions();
    let noise =
        Normal::new(0.0, spec.range_noise.max(0.0)).map_err(|e| Error::Spec(e.to_string()))?;
    let poses = spec.trajectory.len();

    let mut out = Simulation::default();
    for pass in 0..spec.passes {
        let mut active: Vec<&Target> = scene.targets.iter().collect();
        for (t, faces) in spec.transients.iter().zip(&transient_faces) {
            if t.active_in(pass, spec.passes) {
                active.extend(faces.iter());
            }
        }
        let per_pose: Vec<(Vec<PointRecord>, Vec<usize>)> = spec
            .trajectory
            .par_iter()
            .enumerate()
            .map(|(pose, sensor)| {
                let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
                rng.set_stream((pass * poses + pose) as u64);
                let mut points = Vec::new();
                let mut reached = vec![0usize; scene.portals.len()];
                for dir in &dirs {
                    let mut t_min = 0.0;
                    let hit = loop {
                        match nearest(&active, sensor, dir, t_min, spec.max_range) {
                            Some((t, i))
                                if active[i].transmissive
                                    && rng.random::<f64>() < spec.window_transmission =>
                            {
                                t_min = t + 1e-9;
                            }
                            other => break other,
                        }
                    };
                    let hit_t = hit.map_or(spec.max_range, |h| h.0);
                    for (k, portal) in scene.portals.iter().enumerate() {
                        if portal.poly.intersect(sensor, dir, hit_t + 1e-6).is_some() {
                            reached[k] += 1;
                        }
                    }
                    if let Some((t, i)) = hit {
                        let r = if spec.range_noise > 0.0 {
                            t + noise.sample(&mut rng)
                        } else {
                            t
                        };
                        let label = active[i].label;
                        points.push(PointRecord {
                            position: sensor + dir * r,
                            sensor: *sensor,
                            true_label: Some(label),
                            prob: label_probs(label, spec.label_confusion),
                        });
                    }
                }
                (points, reached)
            })
            .collect();
        for (points, reached) in per_pose {
            out.cloud.points.extend(points);
            for (k, n) in reached.into_iter().enumerate() {
                *out.opening_rays
                    .entry(scene.portals[k].opening.clone())
                    .or_default() += n;
            }
        }
        out.rays_cast += poses * dirs.len();
    }
    Ok(out)
}

/// Uniform confusion: `1 − ε` on the diagonal, the rest spread evenly.
pub fn uniform_confusion(eps: f64) -> [[f64; LABEL_COUNT]; LABEL_COUNT] {
    let mut m = [[eps / (LABEL_COUNT - 1) as f64; LABEL_COUNT]; LABEL_COUNT];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0 - eps;
    }
    m
}

/// Redraws each point's label from the confusion row of its true label
/// (predicted label if unknown); the new vector peaks at `confidence`.
pub fn corrupt_labels(
    cloud: &mut PointCloud,
    confusion: &[[f64; LABEL_COUNT]; LABEL_COUNT],
    confidence: f64,
    seed: u64,
) -> Result<()> {
    for (i, row) in confusion.iter().enumerate() {
        let s: f64 = row.iter().sum();
        if (s - 1.0).abs() > 1e-9 || row.iter().any(|p| *p < 0.0) {
            return Err(Error::Spec(format!(
                "confusion row {i} is not a distribution"
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for p in cloud.points.iter_mut() {
        let truth = p.true_label.unwrap_or_else(|| argmax(&p.prob));
        let row = &confusion[truth.id()];
        let x: f64 = rng.random();
        let mut acc = 0.0;
        let mut drawn = truth;
        for (k, w) in row.iter().enumerate() {
            acc += w;
            if x < acc {
                drawn = SemanticLabel::from_id(k).expect("label id");
                break;
            }
        }
        p.prob = peaked(drawn, confidence);
    }
    Ok(())
}

/// Openings of the reference façade as (kind, u, v, width, height).
pub const REFERENCE_OPENINGS: [(OpeningKind, f64, f64, f64, f64); 7] = [
    (OpeningKind::Window, 1.5, 1.0, 1.0, 1.5),
    (OpeningKind::Window, 7.5, 1.0, 1.0, 1.5),
    (OpeningKind::Door, 4.5, 0.0, 1.0, 2.2),
    (OpeningKind::Window, 1.0, 3.6, 1.0, 1.5),
    (OpeningKind::Window, 3.4, 3.6, 1.0, 1.5),
    (OpeningKind::Window, 5.6, 3.6, 1.0, 1.5),
    (OpeningKind::Window, 8.0, 3.6, 1.0, 1.5),
];

/// Box building 10 x 8 x 6 m whose south façade (facing -y) carries the
/// reference openings. On a 0.1 m grid the walls run inside voxels rather
/// than along voxel faces, and voxel centers do not project onto façade cell
/// edges.
pub fn reference_building() -> Result<BuildingModel> {
    let lod2 = BuildingModel::box_building(
        "ref",
        Point3::new(0.025, 0.05, 0.0),
        Point3::new(10.025, 8.05, 6.0),
    )?;
    let wall = &lod2.surfaces[0];
    let frame = fit_plane_frame(&wall.polygon)?;
    let lib = crate::library::OpeningLibrary::parametric(0.2);
    let solids = REFERENCE_OPENINGS
        .iter()
        .enumerate()
        .map(|(k, &(kind, u, v, w, h))| {
            let entry = crate::recon::select_entry(&lib, kind)?;
            let fit = crate::recon::compute_fit(
                &BBox {
                    u_min: u,
                    v_min: v,
                    width: w,
                    height: h,
                },
                &frame,
                0.0,
            )?;
            crate::recon::apply_fit(
                entry,
                &fit,
                &crate::recon::opening_id(&wall.id, k),
                &wall.id,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    crate::recon::assemble_lod3(&lod2, solids)
}

/// Scan of the reference façade: `poses` sensor positions at 2 m height on
/// two lines in front of the façade, alternating between them and receding
/// from 5 to 15 m.
pub fn reference_scan(poses: usize, seed: u64) -> ScanSpec {
    let trajectory = (0..poses)
        .map(|k| {
            let s = if poses > 1 {
                k as f64 / (poses - 1) as f64
            } else {
                0.0
            };
            let x = if k % 2 == 0 { 8.025 } else { 2.025 };
            Point3::new(x, 0.05 - (5.0 + 10.0 * s), 2.0)
        })
        .collect();
    ScanSpec {
        trajectory,
        angular_resolution: 0.01,
        azimuth: [20f64.to_radians(), 160f64.to_radians()],
        elevation: [(-25f64).to_radians(), 50f64.to_radians()],
        max_range: 60.0,
        range_noise: 0.01,
        window_transmission: 0.9,
        label_confusion: 0.1,
        transients: Vec::new(),
        passes: 1,
        terrain_z: None,
        seed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::building::Surface;
    use crate::library::OpeningLibrary;
    use crate::recon::{apply_fit, compute_fit};

    /// One wall in y = 0 facing -y with a 1 x 1.5 m window at (2, 1).
    fn one_window() -> BuildingModel {
        let p = Point3::new;
        let poly = PlanarPolygon::new(
            vec![p(0., 0., 0.), p(5., 0., 0.), p(5., 0., 3.), p(0., 0., 3.)],
            vec![],
        )
        .unwrap();
        let frame = fit_plane_frame(&poly).unwrap();
        let bbox = BBox {
            u_min: 2.0,
            v_min: 1.0,
            width: 1.0,
            height: 1.5,
        };
        let lib = OpeningLibrary::parametric(0.2);
        let solid = apply_fit(
            &lib.entries[0],
            &compute_fit(&bbox, &frame, 0.0).unwrap(),
            "w_opening_0",
            "w",
        )
        .unwrap();
        BuildingModel {
            id: "b".into(),
            lod: 3,
            surfaces: vec![Surface {
                id: "w".into(),
                kind: SurfaceType::WallSurface,
                polygon: poly,
            }],
            openings: vec![solid],
        }
    }

    fn spec() -> ScanSpec {
        ScanSpec {
            trajectory: vec![Point3::new(2.5, -5.0, 1.5)],
            angular_resolution: 0.02,
            azimuth: [1.0, 2.14],
            elevation: [-0.3, 0.3],
            max_range: 50.0,
            range_noise: 0.0,
            window_transmission: 1.0,
            label_confusion: 0.0,
            transients: vec![],
            passes: 1,
            terrain_z: None,
            seed: 7,
        }
    }

    #[test]
    fn open_window_shows_interior() {
        let model = one_window();
        let sim = simulate(&model, &spec()).unwrap();
        let mut interior = 0;
        for p in sim.cloud.iter() {
            // Exact surfaces without noise.
            let on_wall = p.position.y.abs() <= 1e-9;
            let on_back = (p.position.y - 4.0).abs() <= 1e-9;
            assert!(on_wall || on_back, "{:?}", p.position);
            assert_eq!(p.prob, crate::cloud::one_hot(p.true_label.unwrap()));
            if on_back {
                interior += 1;
                // Inside the wall outline, only the glass lets rays through.
                let t = (0.0 - p.sensor.y) / (p.position.y - p.sensor.y);
                let x = p.sensor.x + t * (p.position.x - p.sensor.x);
                let z = p.sensor.z + t * (p.position.z - p.sensor.z);
                if (0.0..=5.0).contains(&x) && (0.0..=3.0).contains(&z) {
                    assert!((2.1..=2.9).contains(&x) && (1.1..=2.4).contains(&z));
                }
            }
        }
        assert!(interior > 0);
        assert!(sim.measured("w_opening_0", 20));
        assert!(sim.cloud.len() <= sim.rays_cast);
    }

    #[test]
    fn short_range_sees_nothing() {
        let s = ScanSpec {
            max_range: 1.0,
            ..spec()
        };
        assert!(simulate(&one_window(), &s).unwrap().cloud.is_empty());
    }

    #[test]
    fn empty_trajectory_rejected() {
        let s = ScanSpec {
            trajectory: vec![],
            ..spec()
        };
        assert!(matches!(simulate(&one_window(), &s), Err(Error::Spec(_))));
    }

    #[test]
    fn seeded_runs_are_identical() {
        let s = ScanSpec {
            trajectory: vec![Point3::new(1.0, -5.0, 1.5), Point3::new(3.0, -6.0, 1.5)],
            range_noise: 0.01,
            window_transmission: 0.5,
            label_confusion: 0.1,
            ..spec()
        };
        let a = simulate(&one_window(), &s).unwrap();
        let b = simulate(&one_window(), &s).unwrap();
        assert_eq!(a.cloud, b.cloud);
        let c = simulate(&one_window(), &ScanSpec { seed: 8, ..s }).unwrap();
        assert_ne!(a.cloud, c.cloud);
    }

    #[test]
    fn transient_only_in_early_passes() {
        let t = Transient {
            min: Point3::origin(),
            max: Point3::new(1., 1., 1.),
            active_fraction: 0.1,
            label: SemanticLabel::Other,
        };
        let active: Vec<_> = (0..10).filter(|&p| t.active_in(p, 10)).collect();
        assert_eq!(active, vec![0]);
    }

    #[test]
    fn truth_boxes_recover_bbox() {
        let boxes = ground_truth_boxes(&one_window()).unwrap();
        assert_eq!(boxes.len(), 1);
        let b = boxes[0].bbox;
        assert!((b.u_min - 2.0).abs() < 1e-12 && (b.v_min - 1.0).abs() < 1e-12);
        assert_eq!((b.width, b.height), (1.0, 1.5));
    }

    #[test]
    fn corruption_rate() {
        let mut cloud = simulate(&one_window(), &spec()).unwrap().cloud;
        corrupt_labels(&mut cloud, &uniform_confusion(0.3), 0.9, 1).unwrap();
        let wrong = cloud
            .iter()
            .filter(|p| Some(p.predicted()) != p.true_label)
            .count() as f64;
        let rate = wrong / cloud.len() as f64;
        assert!((rate - 0.3).abs() < 0.05, "{rate}");
        corrupt_labels(&mut cloud, &uniform_confusion(0.0), 0.9, 1).unwrap();
        assert!(cloud.iter().all(|p| Some(p.predicted()) == p.true_label));
    }
}
