//! Probabilistic occupancy octree with clamped log-odds ray insertion.
//!
//! Leaves are voxels of edge `voxel_size`, addressed by world-aligned integer
//! keys (`floor(x / voxel_size)`), so grids built from different extents agree
//! on voxel boundaries. Insertion is single-writer: callers needing parallel
//! ingestion must serialize access.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::building::BuildingModel;
use crate::cloud::{PointCloud, SemanticLabel};
use crate::error::{Error, Result};
use crate::geometry::{Point3, PreparedPolygon, Ray};
use crate::uncertainty::FacadeConfidence;

/// Half-width of the undecided band around the prior when labelling voxels.
pub const STATE_EPSILON: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridParams {
    pub voxel_size: f64,
    pub prior: f64,
    pub l_occ: f64,
    pub l_emp: f64,
    pub l_min: f64,
    pub l_max: f64,
    /// Report traversed-only voxels at `empty_probability` instead of their
    /// accumulated log-odds.
    pub empty_fast_path: bool,
    pub empty_probability: f64,
}

impl Default for GridParams {
    fn default() -> Self {
        GridParams {
            voxel_size: 0.1,
            prior: 0.5,
            l_occ: 0.85,
            l_emp: -0.4,
            l_min: -2.0,
            l_max: 3.5,
            empty_fast_path: false,
            empty_probability: 0.4,
        }
    }
}

impl GridParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.voxel_size > 0.0 && self.voxel_size.is_finite()) {
            return Err(Error::Config("grid.voxel_size must be positive".into()));
        }
        for (key, p) in [
            ("grid.prior", self.prior),
            ("grid.empty_probability", self.empty_probability),
        ] {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::Config(format!("{key} must lie in (0, 1), got {p}")));
            }
        }
        if !(self.l_min < 0.0 && 0.0 < self.l_max) {
            return Err(Error::Config(
                "grid clamping requires l_min < 0 < l_max".into(),
            ));
        }
        if !(self.l_emp < 0.0 && 0.0 < self.l_occ) {
            return Err(Error::Config(
                "grid updates require l_emp < 0 < l_occ".into(),
            ));
        }
        Ok(())
    }
}

/// Log-odds of a probability (natural logarithm).
pub fn logodds(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Probability of a log-odds value.
pub fn prob(l: f64) -> f64 {
    1.0 / (1.0 + (-l).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VoxelKey(pub [i64; 3]);

impl VoxelKey {
    pub fn of(p: &Point3, voxel_size: f64) -> Self {
        VoxelKey([
            (p.x / voxel_size).floor() as i64,
            (p.y / voxel_size).floor() as i64,
            (p.z / voxel_size).floor() as i64,
        ])
    }

    pub fn center(&self, voxel_size: f64) -> Point3 {
        Point3::new(
            (self.0[0] as f64 + 0.5) * voxel_size,
            (self.0[1] as f64 + 0.5) * voxel_size,
            (self.0[2] as f64 + 0.5) * voxel_size,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VoxelState {
    Occupied,
    Empty,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dynamics {
    Static,
    Dynamic,
}

/// Result of fusing a voxel's points with its occupancy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FusedVoxel {
    pub label: SemanticLabel,
    /// Median probability of `label` among the voxel's points.
    pub label_prob: f64,
    pub existence: f64,
    pub dynamics: Dynamics,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Voxel {
    pub log_odds: f64,
    pub hits: u32,
    pub traversals: u32,
    faces: Option<Box<[u32]>>,
    fused: Option<Box<FusedVoxel>>,
}

impl Voxel {
    pub fn faces(&self) -> &[u32] {
        self.faces.as_deref().unwrap_or(&[])
    }

    pub fn fused(&self) -> Option<&FusedVoxel> {
        self.fused.as_deref()
    }

    fn add_face(&mut self, face: u32) {
        let mut v = self.faces.take().map(Vec::from).unwrap_or_default();
        if !v.contains(&face) {
            v.push(face);
        }
        self.faces = Some(v.into_boxed_slice());
    }
}

const NO_CHILD: u32 = u32::MAX;

/// Pointer octree over a cube of `2^depth` voxels per side.
#[derive(Debug, Clone)]
struct Octree {
    depth: u32,
    nodes: Vec<[u32; 8]>,
    leaves: Vec<Voxel>,
    leaf_keys: Vec<[u32; 3]>,
    /// Inner node visited at each level by the last insertion, and the leaf
    /// it ended in. Successive keys along a ray share most of their path.
    path: Vec<u32>,
    last: Option<([u32; 3], u32)>,
}

impl Octree {
    fn new(depth: u32) -> Self {
        Octree {
            depth,
            nodes: vec![[NO_CHILD; 8]],
            leaves: Vec::new(),
            leaf_keys: Vec::new(),
            path: vec![0; depth as usize],
            last: None,
        }
    }

    fn side(&self) -> u64 {
        1u64 << self.depth
    }

    fn slot(key: &[u32; 3], level: u32) -> usize {
        (((key[0] >> level) & 1) | (((key[1] >> level) & 1) << 1) | (((key[2] >> level) & 1) << 2))
            as usize
    }

    fn find(&self, key: &[u32; 3]) -> Option<usize> {
        let mut node = 0usize;
        for level in (0..self.depth).rev() {
            let child = self.nodes[node][Self::slot(key, level)];
            if child == NO_CHILD {
                return None;
            }
            if level == 0 {
                return Some(child as usize);
            }
            node = child as usize;
        }
        // depth 0: a single voxel lives under the root's first slot
        match self.nodes[0][0] {
            NO_CHILD => None,
            leaf => Some(leaf as usize),
        }
    }

    fn find_or_insert(&mut self, key: &[u32; 3]) -> usize {
        if self.depth == 0 {
            if self.nodes[0][0] == NO_CHILD {
                self.nodes[0][0] = self.push_leaf(*key);
            }
            return self.nodes[0][0] as usize;
        }
        let mut top = self.depth - 1;
        if let Some((k, leaf)) = self.last {
            let diff = (k[0] ^ key[0]) | (k[1] ^ key[1]) | (k[2] ^ key[2]);
            if diff == 0 {
                return leaf as usize;
            }
            top = 31 - diff.leading_zeros();
        }
        let mut node = self.path[top as usize] as usize;
        for level in (0..=top).rev() {
            self.path[level as usize] = node as u32;
            let slot = Self::slot(key, level);
            let child = self.nodes[node][slot];
            if level == 0 {
                let leaf = if child == NO_CHILD {
                    let leaf = self.push_leaf(*key);
                    self.nodes[node][slot] = leaf;
                    leaf
                } else {
                    child
                };
                self.last = Some((*key, leaf));
                return leaf as usize;
            }
            node = if child == NO_CHILD {
                let idx = self.nodes.len() as u32;
                self.nodes.push([NO_CHILD; 8]);
                self.nodes[node][slot] = idx;
                idx as usize
            } else {
                child as usize
            };
        }
        unreachable!("loop returns at level 0")
    }

    fn push_leaf(&mut self, key: [u32; 3]) -> u32 {
        let idx = self.leaves.len() as u32;
        self.leaves.push(Voxel::default());
        self.leaf_keys.push(key);
        idx
    }
}

/// Sparse occupancy grid: an octree of voxels plus the façade registry used
/// by model population.
#[derive(Debug, Clone)]
pub struct OccupancyGrid {
    params: GridParams,
    origin: [i64; 3],
    tree: Octree,
    faces: Vec<String>,
}

impl OccupancyGrid {
    /// Grid covering the axis-aligned box `[min, max]`, padded by one voxel
    /// and rounded up to a power-of-two cube.
    pub fn new(params: GridParams, min: Point3, max: Point3) -> Result<Self> {
        params.validate()?;
        let vs = params.voxel_size;
        let lo = VoxelKey::of(&min, vs).0.map(|k| k - 1);
        let hi = VoxelKey::of(&max, vs).0.map(|k| k + 1);
        let extent = (0..3)
            .map(|i| (hi[i] - lo[i] + 1) as u64)
            .max()
            .unwrap_or(1);
        let depth = extent.next_power_of_two().trailing_zeros();
        if depth > 31 {
            return Err(Error::DegenerateGeometry(format!(
                "grid extent of {extent} voxels is too large"
            )));
        }
        Ok(OccupancyGrid {
            params,
            origin: lo,
            tree: Octree::new(depth),
            faces: Vec::new(),
        })
    }

    /// Grid enclosing every point, sensor and model vertex, with room for the
    /// façade bands.
    pub fn covering(
        params: GridParams,
        cloud: &PointCloud,
        model: Option<&BuildingModel>,
        margin: f64,
    ) -> Result<Self> {
        let mut lo = Point3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY);
        let mut hi = Point3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        let mut grow = |p: &Point3| {
            lo = lo.inf(p);
            hi = hi.sup(p);
        };
        for r in cloud.iter() {
            grow(&r.position);
            grow(&r.sensor);
        }
        if let Some(m) = model {
            for s in &m.surfaces {
                s.polygon.exterior().iter().for_each(&mut grow);
            }
        }
        if !lo.x.is_finite() {
            lo = Point3::origin();
            hi = Point3::origin();
        }
        let pad = nalgebra::Vector3::repeat(margin);
        Self::new(params, lo - pad, hi + pad)
    }

    pub fn params(&self) -> &GridParams {
        &self.params
    }

    pub fn voxel_size(&self) -> f64 {
        self.params.voxel_size
    }

    pub fn depth(&self) -> u32 {
        self.tree.depth
    }

    pub fn key_of(&self, p: &Point3) -> VoxelKey {
        VoxelKey::of(p, self.params.voxel_size)
    }

    fn local(&self, key: &VoxelKey) -> Option<[u32; 3]> {
        let side = self.tree.side() as i64;
        let mut out = [0u32; 3];
        for i in 0..3 {
            let l = key.0[i] - self.origin[i];
            if l < 0 || l >= side {
                return None;
            }
            out[i] = l as u32;
        }
        Some(out)
    }

    pub fn contains_key(&self, key: &VoxelKey) -> bool {
        self.local(key).is_some()
    }

    pub fn voxel(&self, key: &VoxelKey) -> Option<&Voxel> {
        let local = self.local(key)?;
        self.tree.find(&local).map(|i| &self.tree.leaves[i])
    }

    fn voxel_mut(&mut self, key: &VoxelKey) -> Option<&mut Voxel> {
        let local = self.local(key)?;
        let i = self.tree.find_or_insert(&local);
        Some(&mut self.tree.leaves[i])
    }

    /// Every stored voxel with its key, in insertion order.
    pub fn voxels(&self) -> impl Iterator<Item = (VoxelKey, &Voxel)> + '_ {
        self.tree
            .leaf_keys
            .iter()
            .zip(&self.tree.leaves)
            .map(|(k, v)| {
                (
                    VoxelKey([
                        k[0] as i64 + self.origin[0],
                        k[1] as i64 + self.origin[1],
                        k[2] as i64 + self.origin[2],
                    ]),
                    v,
                )
            })
    }

    pub fn len(&self) -> usize {
        self.tree.leaves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tree.leaves.is_empty()
    }

    /// Voxels crossed by the segment from the ray origin towards its hit
    /// point, in order, excluding the hit voxel. When origin and hit share a
    /// voxel that single voxel is returned.
    pub fn traverse(&self, ray: &Ray) -> Result<Vec<VoxelKey>> {
        traverse(ray, self.params.voxel_size)
    }

    fn update(&mut self, key: &VoxelKey, delta: f64, hit: bool) {
        let (l_min, l_max) = (self.params.l_min, self.params.l_max);
        if let Some(v) = self.voxel_mut(key) {
            v.log_odds = (v.log_odds + delta).min(l_max).max(l_min);
            if hit {
                v.hits += 1;
            } else {
                v.traversals += 1;
            }
        }
    }

    /// Adds one observation: `l_emp` along the ray, `l_occ` at its end.
    /// Parts of the ray outside the grid are clipped.
    pub fn insert_ray(&mut self, ray: &Ray) -> Result<()> {
        let path = traverse(ray, self.params.voxel_size)?;
        self.apply_path(ray, &path);
        Ok(())
    }

    fn apply_path(&mut self, ray: &Ray, path: &[VoxelKey]) {
        let hit = VoxelKey::of(&ray.end(), self.params.voxel_size);
        let l_emp = self.params.l_emp;
        for key in path.iter().filter(|k| **k != hit) {
            self.update(key, l_emp, false);
        }
        self.update(&hit, self.params.l_occ, true);
    }

    /// Inserts every record's ray in file order. Records whose sensor and hit
    /// coincide carry no ray and are skipped. Traversals are computed in
    /// parallel batches; updates are applied sequentially, so the result
    /// equals one-by-one insertion.
    pub fn insert_cloud(&mut self, cloud: &PointCloud) -> Result<usize> {
        const BATCH: usize = 8192;
        let vs = self.params.voxel_size;
        let mut skipped = 0;
        for chunk in cloud.points.chunks(BATCH) {
            let paths: Vec<Result<Option<(Ray, Vec<VoxelKey>)>>> = chunk
                .par_iter()
                .map(|r| match r.ray() {
                    Ok(ray) => traverse(&ray, vs).map(|p| Some((ray, p))),
                    Err(Error::EmptyTraversal) => Ok(None),
                    Err(e) => Err(e),
                })
                .collect();
            for p in paths {
                match p? {
                    Some((ray, path)) => self.apply_path(&ray, &path),
                    None => skipped += 1,
                }
            }
        }
        Ok(skipped)
    }

    /// Occupancy probability of a stored voxel, honoring the empty fast path.
    pub fn occupancy(&self, v: &Voxel) -> f64 {
        if self.params.empty_fast_path && v.hits == 0 && v.traversals > 0 {
            self.params.empty_probability
        } else {
            prob(v.log_odds + logodds(self.params.prior))
        }
    }

    pub fn voxel_state(&self, v: &Voxel) -> VoxelState {
        if v.hits == 0 && v.traversals == 0 {
            return VoxelState::Unknown;
        }
        let p = self.occupancy(v);
        if p > 0.5 + STATE_EPSILON {
            VoxelState::Occupied
        } else if p < 0.5 - STATE_EPSILON {
            VoxelState::Empty
        } else {
            VoxelState::Unknown
        }
    }

    pub fn state(&self, key: &VoxelKey) -> VoxelState {
        self.voxel(key)
            .map_or(VoxelState::Unknown, |v| self.voxel_state(v))
    }

    pub fn face_ids(&self) -> &[String] {
        &self.faces
    }

    pub fn face_index(&self, id: &str) -> Option<u32> {
        self.faces.iter().position(|f| f == id).map(|i| i as u32)
    }

    /// Tags every voxel whose center lies within `upper_ci` of a wall's plane
    /// and projects inside the wall polygon with that wall's id.
    pub fn populate_model(&mut self, model: &BuildingModel, conf: &FacadeConfidence) -> Result<()> {
        let vs = self.params.voxel_size;
        let band = conf.upper_ci;
        for wall in model.walls() {
            let face = match self.face_index(&wall.id) {
                Some(i) => i,
                None => {
                    self.faces.push(wall.id.clone());
                    (self.faces.len() - 1) as u32
                }
            };
            let prepared = PreparedPolygon::new(&wall.polygon)?;
            let mut lo = Point3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY);
            let mut hi = Point3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
            for p in wall.polygon.exterior() {
                lo = lo.inf(p);
                hi = hi.sup(p);
            }
            let pad = nalgebra::Vector3::repeat(band + vs);
            let klo = VoxelKey::of(&(lo - pad), vs).0;
            let khi = VoxelKey::of(&(hi + pad), vs).0;
            for x in klo[0]..=khi[0] {
                for y in klo[1]..=khi[1] {
                    for z in klo[2]..=khi[2] {
                        let key = VoxelKey([x, y, z]);
                        let c = key.center(vs);
                        let (u, v, d) = prepared.frame.project(&c);
                        if d.abs() <= band + 1e-9 && prepared.contains_uv(u, v) {
                            if let Some(vox) = self.voxel_mut(&key) {
                                vox.add_face(face);
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub(crate) fn set_fused(&mut self, key: &VoxelKey, fused: Option<FusedVoxel>) {
        if let Some(v) = self.voxel_mut(key) {
            v.fused = fused.map(Box::new);
        }
    }

    /// CSV dump of every stored voxel, sorted by key.
    pub fn write_dump(&self, path: &Path) -> Result<()> {
        let mut rows: Vec<_> = self.voxels().collect();
        rows.sort_by_key(|(k, _)| *k);
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        let out = || -> std::io::Result<()> {
            writeln!(w, "kx,ky,kz,log_odds,hits,traversals,faces")?;
            for (k, v) in rows {
                let faces: Vec<_> = v
                    .faces()
                    .iter()
                    .map(|f| self.faces[*f as usize].as_str())
                    .collect();
                writeln!(
                    w,
                    "{},{},{},{:.6},{},{},{}",
                    k.0[0],
                    k.0[1],
                    k.0[2],
                    v.log_odds,
                    v.hits,
                    v.traversals,
                    faces.join(";")
                )?;
            }
            w.flush()
        };
        out().map_err(|e| Error::io(path, e))
    }
}

/// Incremental parametric voxel walk from the ray origin to its end.
pub fn traverse(ray: &Ray, voxel_size: f64) -> Result<Vec<VoxelKey>> {
    if !(ray.length > 0.0) {
        return Err(Error::EmptyTraversal);
    }
    let start = VoxelKey::of(&ray.origin, voxel_size);
    let end = VoxelKey::of(&ray.end(), voxel_size);
    if start == end {
        return Ok(vec![start]);
    }
    let dir = ray.direction.into_inner();
    let mut key = start.0;
    let mut step = [0i64; 3];
    let mut t_max = [f64::INFINITY; 3];
    let mut t_delta = [f64::INFINITY; 3];
    for i in 0..3 {
        let o = ray.origin[i];
        if dir[i] > 0.0 {
            step[i] = 1;
            t_max[i] = ((key[i] + 1) as f64 * voxel_size - o) / dir[i];
            t_delta[i] = voxel_size / dir[i];
        } else if dir[i] < 0.0 {
            step[i] = -1;
            t_max[i] = (key[i] as f64 * voxel_size - o) / dir[i];
            t_delta[i] = -voxel_size / dir[i];
        }
    }
    let manhattan: i64 = (0..3).map(|i| (end.0[i] - start.0[i]).abs()).sum();
    let mut out = Vec::with_capacity(manhattan as usize + 1);
    loop {
        out.push(VoxelKey(key));
        let axis = if t_max[0] <= t_max[1] && t_max[0] <= t_max[2] {
            0
        } else if t_max[1] <= t_max[2] {
            1
        } else {
            2
        };
        if t_max[axis] >= ray.length {
            break;
        }
        key[axis] += step[axis];
        t_max[axis] += t_delta[axis];
        if key == end.0 || out.len() as i64 > manhattan + 3 {
            break;
        }
    }
    Ok(out)
}
