//! Façade texture layers built from voxel comparisons.
//!
//! The model-comparison layer records whether the wall band was observed as
//! material (confirmed), as free space (conflicted) or not at all. The
//! points-comparison layer carries the semantics of static voxels after
//! fusing occupancy with per-point class probabilities.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::building::Surface;
use crate::cloud::{PointCloud, SemanticLabel, LABEL_COUNT};
use crate::error::{Error, Result};
use crate::geometry::{fit_plane_frame, PlaneFrame, Point3, PreparedPolygon};
use crate::occupancy::{Dynamics, FusedVoxel, OccupancyGrid, Voxel, VoxelKey, VoxelState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FusionParams {
    pub p_static: f64,
}

impl Default for FusionParams {
    fn default() -> Self {
        FusionParams { p_static: 0.7 }
    }
}

impl FusionParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p_static) {
            return Err(Error::Config(format!(
                "fusion.p_static must lie in [0, 1], got {}",
                self.p_static
            )));
        }
        Ok(())
    }
}

/// Discrete cell labels that can be exported.
pub trait CellLabel: Copy + PartialEq + fmt::Debug {
    fn name(&self) -> &'static str;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelCellLabel {
    Confirmed,
    Conflicted,
    Unknown,
}

impl ModelCellLabel {
    pub const ALL: [ModelCellLabel; 3] = [
        ModelCellLabel::Confirmed,
        ModelCellLabel::Conflicted,
        ModelCellLabel::Unknown,
    ];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl CellLabel for ModelCellLabel {
    fn name(&self) -> &'static str {
        match self {
            ModelCellLabel::Confirmed => "confirmed",
            ModelCellLabel::Conflicted => "conflicted",
            ModelCellLabel::Unknown => "unknown",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PointsCellLabel {
    Label(SemanticLabel),
    NoData,
}

impl CellLabel for PointsCellLabel {
    fn name(&self) -> &'static str {
        match self {
            PointsCellLabel::Label(l) => l.name(),
            PointsCellLabel::NoData => "nodata",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell<L> {
    pub label: L,
    pub prob: f64,
}

/// Raster on a façade plane. Row 0 is the bottom of the façade; cell `(0, 0)`
/// sits at the minimum `(u, v)` corner.
#[derive(Debug, Clone, PartialEq)]
pub struct TextureLayer<L> {
    pub facade: String,
    pub frame: PlaneFrame,
    pub cell_size: f64,
    pub rows: usize,
    pub cols: usize,
    cells: Vec<Cell<L>>,
}

impl<L: Copy> TextureLayer<L> {
    pub fn filled(facade: &Facade, fill: Cell<L>) -> Self {
        TextureLayer {
            facade: facade.id.clone(),
            frame: facade.frame,
            cell_size: facade.cell_size,
            rows: facade.rows,
            cols: facade.cols,
            cells: vec![fill; facade.rows * facade.cols],
        }
    }

    pub fn get(&self, row: usize, col: usize) -> &Cell<L> {
        &self.cells[row * self.cols + col]
    }

    pub fn get_mut(&mut self, row: usize, col: usize) -> &mut Cell<L> {
        &mut self.cells[row * self.cols + col]
    }

    pub fn cells(&self) -> impl Iterator<Item = ((usize, usize), &Cell<L>)> {
        let cols = self.cols;
        self.cells
            .iter()
            .enumerate()
            .map(move |(i, c)| ((i / cols, i % cols), c))
    }

    /// Same geometry, new contents.
    pub fn map<M: Copy>(
        &self,
        mut f: impl FnMut((usize, usize), &Cell<L>) -> Cell<M>,
    ) -> TextureLayer<M> {
        let cols = self.cols;
        TextureLayer {
            facade: self.facade.clone(),
            frame: self.frame,
            cell_size: self.cell_size,
            rows: self.rows,
            cols: self.cols,
            cells: self
                .cells
                .iter()
                .enumerate()
                .map(|(i, c)| f((i / cols, i % cols), c))
                .collect(),
        }
    }
}

/// A wall prepared for rasterization at the grid's voxel size.
#[derive(Debug, Clone)]
pub struct Facade {
    pub id: String,
    pub frame: PlaneFrame,
    pub cell_size: f64,
    pub rows: usize,
    pub cols: usize,
    pub polygon: PreparedPolygon,
}

impl Facade {
    pub fn new(surface: &Surface, cell_size: f64) -> Result<Self> {
        let frame = fit_plane_frame(&surface.polygon)?;
        let mut polygon = PreparedPolygon::new(&surface.polygon)?;
        polygon.frame = frame;
        let (mut umax, mut vmax) = (0.0f64, 0.0f64);
        for p in surface.polygon.exterior() {
            let (u, v, _) = frame.project(p);
            umax = umax.max(u);
            vmax = vmax.max(v);
        }
        let count = |extent: f64| ((extent / cell_size) - 1e-9).ceil().max(1.0) as usize;
        Ok(Facade {
            id: surface.id.clone(),
            frame,
            cell_size,
            rows: count(vmax),
            cols: count(umax),
            polygon,
        })
    }

    /// Cell containing the projection of `p`, if on the raster.
    pub fn cell_of(&self, p: &Point3) -> Option<(usize, usize)> {
        let (u, v, _) = self.frame.project(p);
        let col = (u / self.cell_size).floor();
        let row = (v / self.cell_size).floor();
        if col < 0.0 || row < 0.0 || col >= self.cols as f64 || row >= self.rows as f64 {
            return None;
        }
        Some((row as usize, col as usize))
    }

    pub fn distance(&self, p: &Point3) -> f64 {
        self.frame.project(p).2
    }

    pub fn width(&self) -> f64 {
        self.cols as f64 * self.cell_size
    }

    /// Voxels tagged with this façade, with the cell they project to.
    pub fn band_voxels<'g>(
        &self,
        grid: &'g OccupancyGrid,
    ) -> Vec<(VoxelKey, &'g Voxel, (usize, usize))> {
        let Some(face) = grid.face_index(&self.id) else {
            return Vec::new();
        };
        let vs = grid.voxel_size();
        grid.voxels()
            .filter(|(_, v)| v.faces().contains(&face))
            .filter_map(|(k, v)| self.cell_of(&k.center(vs)).map(|c| (k, v, c)))
            .collect()
    }
}

/// Projects the façade band into confirmed / conflicted / unknown cells.
pub fn model_compare(grid: &OccupancyGrid, facade: &Facade) -> TextureLayer<ModelCellLabel> {
    let mut layer = TextureLayer::filled(
        facade,
        Cell {
            label: ModelCellLabel::Unknown,
            prob: 0.0,
        },
    );
    for (_, voxel, (row, col)) in facade.band_voxels(grid) {
        let p = grid.occupancy(voxel);
        let cell = layer.get_mut(row, col);
        match (grid.voxel_state(voxel), cell.label) {
            (VoxelState::Occupied, ModelCellLabel::Confirmed) => cell.prob = cell.prob.max(p),
            (VoxelState::Occupied, _) => {
                *cell = Cell {
                    label: ModelCellLabel::Confirmed,
                    prob: p,
                }
            }
            (VoxelState::Empty, ModelCellLabel::Conflicted) => cell.prob = cell.prob.max(1.0 - p),
            (VoxelState::Empty, ModelCellLabel::Unknown) => {
                *cell = Cell {
                    label: ModelCellLabel::Conflicted,
                    prob: 1.0 - p,
                }
            }
            _ => {}
        }
    }
    layer
}

/// Projects static voxel semantics into the façade raster. Per cell, the
/// static voxel nearest the wall plane wins; ties go to the larger existence
/// score.
pub fn points_compare(grid: &OccupancyGrid, facade: &Facade) -> TextureLayer<PointsCellLabel> {
    let vs = grid.voxel_size();
    let mut best: HashMap<(usize, usize), (f64, FusedVoxel)> = HashMap::new();
    for (key, voxel, cell) in facade.band_voxels(grid) {
        let Some(fused) = voxel.fused() else { continue };
        if fused.dynamics != Dynamics::Static {
            continue;
        }
        let d = facade.distance(&key.center(vs)).abs();
        best.entry(cell)
            .and_modify(|(bd, bf)| {
                let closer = d < *bd - 1e-9;
                let tie = (d - *bd).abs() <= 1e-9;
                if closer || (tie && fused.existence > bf.existence) {
                    *bd = d;
                    *bf = *fused;
                }
            })
            .or_insert((d, *fused));
    }
    let mut layer = TextureLayer::filled(
        facade,
        Cell {
            label: PointsCellLabel::NoData,
            prob: 0.0,
        },
    );
    for ((row, col), (_, f)) in best {
        *layer.get_mut(row, col) = Cell {
            label: PointsCellLabel::Label(f.label),
            prob: f.existence,
        };
    }
    layer
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FusionSummary {
    pub static_voxels: usize,
    pub dynamic_voxels: usize,
    pub relabeled_points: usize,
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Group point indices by the voxel holding them.
pub fn points_by_voxel(grid: &OccupancyGrid, cloud: &PointCloud) -> HashMap<VoxelKey, Vec<usize>> {
    let mut groups: HashMap<VoxelKey, Vec<usize>> = HashMap::new();
    for (i, r) in cloud.iter().enumerate() {
        groups.entry(grid.key_of(&r.position)).or_default().push(i);
    }
    groups
}

/// Fuses voxel occupancy with point semantics.
///
/// For each voxel holding points, the candidate class maximizes the summed
/// class probability; `P(B)` is the median probability of that class, and the
/// existence score is `P(A) · P(B)` with `P(A)` the voxel's occupancy. Voxels
/// scoring at least `p_static` are static; points in dynamic voxels are
/// relabeled `other`. Point geometry is never touched.
pub fn fuse_points(
    grid: &mut OccupancyGrid,
    cloud: &mut PointCloud,
    params: &FusionParams,
) -> FusionSummary {
    let mut summary = FusionSummary::default();
    let mut groups: Vec<_> = points_by_voxel(grid, cloud).into_iter().collect();
    groups.sort_by_key(|(k, _)| *k);
    for (key, members) in groups {
        let Some(voxel) = grid.voxel(&key) else {
            continue;
        };
        let p_a = grid.occupancy(voxel);
        let mut sums = [0.0; LABEL_COUNT];
        for &i in &members {
            for (s, p) in sums.iter_mut().zip(cloud.points[i].prob) {
                *s += p;
            }
        }
        let candidate = crate::cloud::argmax(&sums);
        let mut probs: Vec<f64> = members
            .iter()
            .map(|&i| cloud.points[i].prob[candidate.id()])
            .collect();
        let p_b = median(&mut probs);
        let existence = p_a * p_b;
        let dynamics = if existence >= params.p_static {
            summary.static_voxels += 1;
            Dynamics::Static
        } else {
            summary.dynamic_voxels += 1;
            for &i in &members {
                cloud.points[i].relabel(SemanticLabel::Other);
            }
            summary.relabeled_points += members.len();
            Dynamics::Dynamic
        };
        grid.set_fused(
            &key,
            Some(FusedVoxel {
                label: candidate,
                label_prob: p_b,
                existence,
                dynamics,
            }),
        );
    }
    summary
}
