//! Per-cell Bayesian network fusing the model- and points-comparison layers
//! into an opening posterior, plus clustering and back-projection.
//!
//! The network has one target node `O ∈ {opening, no_opening}` with parents
//! `M` (model layer) and `S` (points layer). Layer observations enter as soft
//! evidence weighted by the layer confidence.

use serde::{Deserialize, Serialize};

use crate::building::OpeningKind;
use crate::cloud::{PointCloud, SemanticLabel};
use crate::error::{Error, Result};
use crate::occupancy::OccupancyGrid;
use crate::shape::{BinaryMask, CellIndex, ShapeCluster};
use crate::textures::{Cell, CellLabel, Facade, ModelCellLabel, PointsCellLabel, TextureLayer};

pub const M_STATES: usize = 3;
pub const S_STATES: usize = 6;

/// States of the points-layer node. Unobserved cells and classes without an
/// own state fold into `Other` and `Molding`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SState {
    Window,
    Door,
    Wall,
    Molding,
    Floor,
    Other,
}

impl SState {
    pub const ALL: [SState; S_STATES] = [
        SState::Window,
        SState::Door,
        SState::Wall,
        SState::Molding,
        SState::Floor,
        SState::Other,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            SState::Window => "window",
            SState::Door => "door",
            SState::Wall => "wall",
            SState::Molding => "molding",
            SState::Floor => "floor",
            SState::Other => "other",
        }
    }

    pub fn from_points(label: PointsCellLabel) -> Self {
        match label {
            PointsCellLabel::NoData => SState::Other,
            PointsCellLabel::Label(l) => match l {
                SemanticLabel::Window => SState::Window,
                SemanticLabel::Door => SState::Door,
                SemanticLabel::Wall => SState::Wall,
                SemanticLabel::Arch | SemanticLabel::Column | SemanticLabel::Molding => {
                    SState::Molding
                }
                SemanticLabel::Floor => SState::Floor,
                SemanticLabel::Other => SState::Other,
            },
        }
    }

    pub fn is_opening(self) -> bool {
        matches!(self, SState::Window | SState::Door)
    }
}

/// `P(O = opening | M, S)`, one row per model state, columns in
/// [`SState::ALL`] order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cpt {
    pub confirmed: [f64; S_STATES],
    pub conflicted: [f64; S_STATES],
    pub unknown: [f64; S_STATES],
}

impl Default for Cpt {
    fn default() -> Self {
        Cpt {
            confirmed: [0.3, 0.3, 0.05, 0.05, 0.05, 0.1],
            conflicted: [0.95, 0.95, 0.5, 0.5, 0.5, 0.7],
            unknown: [0.6, 0.6, 0.2, 0.2, 0.2, 0.2],
        }
    }
}

impl Cpt {
    pub fn row(&self, m: ModelCellLabel) -> &[f64; S_STATES] {
        match m {
            ModelCellLabel::Confirmed => &self.confirmed,
            ModelCellLabel::Conflicted => &self.conflicted,
            ModelCellLabel::Unknown => &self.unknown,
        }
    }

    pub fn get(&self, m: ModelCellLabel, s: SState) -> f64 {
        self.row(m)[s.index()]
    }

    pub fn validate(&self) -> Result<()> {
        for m in ModelCellLabel::ALL {
            for s in SState::ALL {
                let p = self.get(m, s);
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::Config(format!(
                        "bn.cpt.{}[{}] ({}) must lie in [0, 1], got {p}",
                        m.name(),
                        s.index(),
                        s.name()
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpec {
    pub cl_model: f64,
    pub cl_points: f64,
    pub p_t: f64,
    /// Distance in cells within which a low opening-labeled cell counts as
    /// molding.
    pub d_mold: usize,
    pub cpt: Cpt,
}

impl Default for NetworkSpec {
    fn default() -> Self {
        NetworkSpec {
            cl_model: 0.9,
            cl_points: 0.7,
            p_t: 0.7,
            d_mold: 2,
            cpt: Cpt::default(),
        }
    }
}

impl NetworkSpec {
    pub fn validate(&self) -> Result<()> {
        for (key, v) in [
            ("bn.cl_model", self.cl_model),
            ("bn.cl_points", self.cl_points),
            ("bn.p_t", self.p_t),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("{key} must lie in [0, 1], got {v}")));
            }
        }
        self.cpt.validate()
    }
}

pub fn soft_evidence(obs: &[f64], cl: f64) -> Vec<f64> {
    let k = obs.len() as f64;
    obs.iter().map(|o| cl * o + (1.0 - cl) / k).collect()
}

fn point_mass<const N: usize>(index: usize) -> [f64; N] {
    let mut v = [0.0; N];
    v[index] = 1.0;
    v
}

/// Exact marginal `P(O = opening)` by enumeration over both parents.
pub fn infer_cell(m_ev: &[f64; M_STATES], s_ev: &[f64; S_STATES], cpt: &Cpt) -> f64 {
    let mut p = 0.0;
    for (mi, m) in ModelCellLabel::ALL.iter().enumerate() {
        for (si, s) in SState::ALL.iter().enumerate() {
            p += m_ev[mi] * s_ev[si] * cpt.get(*m, *s);
        }
    }
    p
}

/// Posterior for point-mass observations of both layers.
pub fn infer_observed(m: ModelCellLabel, s: SState, spec: &NetworkSpec) -> f64 {
    let m_ev: [f64; M_STATES] = soft_evidence(&point_mass::<M_STATES>(m.index()), spec.cl_model)
        .try_into()
        .expect("three model states");
    let s_ev: [f64; S_STATES] = soft_evidence(&point_mass::<S_STATES>(s.index()), spec.cl_points)
        .try_into()
        .expect("six points states");
    infer_cell(&m_ev, &s_ev, &spec.cpt)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    UnmodeledOpening(OpeningKind),
    OtherObject,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PosteriorCell {
    /// Model-layer observation.
    pub m: ModelCellLabel,
    /// Points-layer observation.
    pub s: SState,
    pub decision: Decision,
}

impl CellLabel for PosteriorCell {
    fn name(&self) -> &'static str {
        match self.decision {
            Decision::UnmodeledOpening(OpeningKind::Window) => "window",
            Decision::UnmodeledOpening(OpeningKind::Door) => "door",
            Decision::OtherObject => "other_object",
        }
    }
}

pub type PosteriorLayer = TextureLayer<PosteriorCell>;

/// Combines the two layers cell by cell.
///
/// Conflicted cells and cells whose points say window or door are grouped
/// into 8-connected regions. Where a region holds both kinds of cells the
/// conflicts and the semantic labels co-occur, and every member cell is
/// evaluated as a conflicted cell of the region's dominant opening class.
/// Everything else is evaluated on its own observations.
pub fn posterior_layer(
    model: &TextureLayer<ModelCellLabel>,
    points: &TextureLayer<PointsCellLabel>,
    spec: &NetworkSpec,
) -> Result<PosteriorLayer> {
    if (model.rows, model.cols) != (points.rows, points.cols) || model.facade != points.facade {
        return Err(Error::DegenerateGeometry(format!(
            "layer mismatch for façade `{}`: {}x{} vs {}x{}",
            model.facade, model.rows, model.cols, points.rows, points.cols
        )));
    }
    let mut layer = model.map(|(r, c), m| Cell {
        label: PosteriorCell {
            m: m.label,
            s: SState::from_points(points.get(r, c).label),
            decision: Decision::OtherObject,
        },
        prob: 0.0,
    });
    let mut evidence: Vec<(ModelCellLabel, SState)> =
        layer.cells().map(|(_, c)| (c.label.m, c.label.s)).collect();

    let union = BinaryMask::from_cells(
        layer.rows,
        layer.cols,
        layer
            .cells()
            .filter(|(_, c)| c.label.m == ModelCellLabel::Conflicted || c.label.s.is_opening())
            .map(|(idx, _)| idx),
    );
    for region in union.components8() {
        let conflicted = region
            .iter()
            .any(|&(r, c)| layer.get(r, c).label.m == ModelCellLabel::Conflicted);
        let windows = region
            .iter()
            .filter(|&&(r, c)| layer.get(r, c).label.s == SState::Window)
            .count();
        let doors = region
            .iter()
            .filter(|&&(r, c)| layer.get(r, c).label.s == SState::Door)
            .count();
        if conflicted && windows + doors > 0 {
            let s = if doors > windows {
                SState::Door
            } else {
                SState::Window
            };
            for &(r, c) in &region {
                evidence[r * layer.cols + c] = (ModelCellLabel::Conflicted, s);
            }
        }
    }
    let cols = layer.cols;
    for r in 0..layer.rows {
        for c in 0..cols {
            let (m, s) = evidence[r * cols + c];
            layer.get_mut(r, c).prob = infer_observed(m, s, spec);
        }
    }
    Ok(layer)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellCluster {
    pub cells: Vec<CellIndex>,
    pub kind: OpeningKind,
    pub mean_posterior: f64,
}

impl From<&CellCluster> for ShapeCluster {
    fn from(c: &CellCluster) -> Self {
        ShapeCluster {
            cells: c.cells.clone(),
            kind: c.kind,
            mean_posterior: c.mean_posterior,
        }
    }
}

/// Thresholds the posterior and groups high cells 8-connectedly. Cluster
/// kind follows the majority of window/door point labels (ties to window);
/// a cluster can only be a door if it reaches the bottom row.
pub fn decide_and_cluster(posterior: &mut PosteriorLayer, p_t: f64) -> Vec<CellCluster> {
    let high = BinaryMask::from_cells(
        posterior.rows,
        posterior.cols,
        posterior
            .cells()
            .filter(|(_, c)| c.prob > p_t)
            .map(|(i, _)| i),
    );
    let mut clusters = Vec::new();
    for cells in high.components8() {
        let mut windows = 0;
        let mut doors = 0;
        let mut sum = 0.0;
        for &(r, c) in &cells {
            let cell = posterior.get(r, c);
            sum += cell.prob;
            match cell.label.s {
                SState::Window => windows += 1,
                SState::Door => doors += 1,
                _ => {}
            }
        }
        let grounded = cells.iter().any(|&(r, _)| r == 0);
        let kind = if doors > windows && grounded {
            OpeningKind::Door
        } else {
            OpeningKind::Window
        };
        for &(r, c) in &cells {
            posterior.get_mut(r, c).label.decision = Decision::UnmodeledOpening(kind);
        }
        let mean_posterior = sum / cells.len() as f64;
        clusters.push(CellCluster {
            cells,
            kind,
            mean_posterior,
        });
    }
    clusters
}

/// Conflicted regions without any high cell: candidates for other
/// reconstruction modules.
pub fn unexplained_conflicts(posterior: &PosteriorLayer) -> Vec<Vec<CellIndex>> {
    BinaryMask::from_cells(
        posterior.rows,
        posterior.cols,
        posterior
            .cells()
            .filter(|(_, c)| {
                c.label.m == ModelCellLabel::Conflicted && c.label.decision == Decision::OtherObject
            })
            .map(|(i, _)| i),
    )
    .components8()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BackProjection {
    pub opening: usize,
    pub molding: usize,
    pub wall: usize,
}

/// Writes the cell decisions back onto the points of the façade band.
pub fn back_project(
    clusters: &[CellCluster],
    posterior: &PosteriorLayer,
    facade: &Facade,
    grid: &OccupancyGrid,
    cloud: &mut PointCloud,
    d_mold: usize,
) -> BackProjection {
    let mut counts = BackProjection::default();
    let Some(face) = grid.face_index(&facade.id) else {
        return counts;
    };
    let (rows, cols) = (posterior.rows, posterior.cols);
    let mut kind_of: Vec<Option<OpeningKind>> = vec![None; rows * cols];
    for cl in clusters {
        for &(r, c) in &cl.cells {
            kind_of[r * cols + c] = Some(cl.kind);
        }
    }
    let d = d_mold as isize;
    let near_cluster = |r: usize, c: usize| {
        (-d..=d).any(|dr| {
            (-d..=d).any(|dc| {
                let (nr, nc) = (r as isize + dr, c as isize + dc);
                nr >= 0
                    && nc >= 0
                    && (nr as usize) < rows
                    && (nc as usize) < cols
                    && kind_of[nr as usize * cols + nc as usize].is_some()
            })
        })
    };
    let vs = grid.voxel_size();
    for point in cloud.points.iter_mut() {
        let key = grid.key_of(&point.position);
        let Some(voxel) = grid.voxel(&key) else {
            continue;
        };
        if !voxel.faces().contains(&face) {
            continue;
        }
        let Some((r, c)) = facade.cell_of(&key.center(vs)) else {
            continue;
        };
        if let Some(kind) = kind_of[r * cols + c] {
            point.relabel(match kind {
                OpeningKind::Window => SemanticLabel::Window,
                OpeningKind::Door => SemanticLabel::Door,
            });
            counts.opening += 1;
        } else if posterior.get(r, c).label.s.is_opening() {
            if near_cluster(r, c) {
                point.relabel(SemanticLabel::Molding);
                counts.molding += 1;
            } else {
                point.relabel(SemanticLabel::Wall);
                counts.wall += 1;
            }
        }
    }
    counts
}
