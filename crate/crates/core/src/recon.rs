//! Fitting library solids into accepted boxes and assembling the LoD3 model.

use nalgebra::{Matrix3, Rotation3};
use serde::Serialize;

use crate::bayes::CellCluster;
use crate::building::{BuildingModel, OpeningKind, OpeningSolid};
use crate::error::{Error, Result};
use crate::geometry::{yaw_of_normal, PlaneFrame, Point3, Vector3};
use crate::library::OpeningLibraryEntry;
use crate::shape::{min_bbox, BBox, CellIndex, ShapeCluster};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReconParams {
    /// Library depth, m.
    pub depth: f64,
    /// Offset of the front face behind the façade plane, m.
    pub recess_m: f64,
}

impl Default for ReconParams {
    fn default() -> Self {
        ReconParams {
            depth: 0.2,
            recess_m: 0.0,
        }
    }
}

impl ReconParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.depth > 0.0 && self.depth.is_finite()) {
            return Err(Error::Config(format!(
                "recon.depth must be positive, got {}",
                self.depth
            )));
        }
        if !self.recess_m.is_finite() {
            return Err(Error::Config("recon.recess_m must be finite".into()));
        }
        Ok(())
    }
}

/// Scale, then yaw about z, then translation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitTransform {
    pub translation: Point3,
    pub yaw: f64,
    pub scale: [f64; 3],
}

/// Library axes into the world frame of a façade facing `+x`: width along
/// `+y`, height along `+z`, depth along `-x`.
fn canonical() -> Matrix3<f64> {
    Matrix3::new(
        0.0, 0.0, -1.0, //
        1.0, 0.0, 0.0, //
        0.0, 1.0, 0.0,
    )
}

impl FitTransform {
    pub fn matrix(&self) -> Matrix3<f64> {
        let r = Rotation3::from_axis_angle(&Vector3::z_axis(), self.yaw);
        r.matrix() * canonical() * Matrix3::from_diagonal(&Vector3::from(self.scale))
    }

    pub fn apply(&self, p: &Point3) -> Point3 {
        self.translation + self.matrix() * p.coords
    }
}

pub fn compute_fit(bbox: &BBox, frame: &PlaneFrame, recess: f64) -> Result<FitTransform> {
    let yaw = yaw_of_normal(&frame.n)?;
    let translation = frame.origin + frame.u * bbox.u_min + frame.v * bbox.v_min - frame.n * recess;
    Ok(FitTransform {
        translation,
        yaw,
        scale: [bbox.width, bbox.height, 1.0],
    })
}

pub fn apply_fit(
    entry: &OpeningLibraryEntry,
    t: &FitTransform,
    id: &str,
    parent: &str,
) -> Result<OpeningSolid> {
    if t.scale.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
        return Err(Error::Fit(format!(
            "non-positive scale {:?} for `{id}`",
            t.scale
        )));
    }
    let m = t.matrix();
    let triangles = entry
        .triangles
        .iter()
        .map(|tri| tri.map(|p| t.translation + m * p.coords))
        .collect();
    Ok(OpeningSolid {
        id: id.to_string(),
        kind: entry.kind,
        library_entry: entry.name.clone(),
        triangles,
        anchor: t.translation,
        width: t.scale[0],
        height: t.scale[1],
        depth: entry.depth * t.scale[2],
        parent: parent.to_string(),
    })
}

/// Upgrades to LoD3 and attaches the solids; a solid replaces an existing
/// opening of the same id.
pub fn assemble_lod3(model: &BuildingModel, solids: Vec<OpeningSolid>) -> Result<BuildingModel> {
    let mut out = model.clone();
    out.lod = 3;
    for s in solids {
        if out.surface(&s.parent).is_none() {
            return Err(Error::Link(s.parent));
        }
        match out.openings.iter_mut().find(|o| o.id == s.id) {
            Some(existing) => *existing = s,
            None => out.openings.push(s),
        }
    }
    Ok(out)
}

/// A conflict region no opening explains.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub facade: String,
    pub cells: usize,
    pub bbox: BBox,
    pub reason: &'static str,
}

#[derive(Debug, Clone, Default)]
pub struct Dispatch {
    pub openings: Vec<ShapeCluster>,
    pub triggers: Vec<Diagnostic>,
}

/// Routes opening clusters to shape extraction and every other conflict
/// region to a diagnostic record.
pub fn dispatch(
    facade: &str,
    cell_size: f64,
    clusters: &[CellCluster],
    conflicts: &[Vec<CellIndex>],
) -> Result<Dispatch> {
    let mut out = Dispatch {
        openings: clusters.iter().map(ShapeCluster::from).collect(),
        triggers: Vec::new(),
    };
    for cells in conflicts {
        out.triggers.push(Diagnostic {
            facade: facade.to_string(),
            cells: cells.len(),
            bbox: min_bbox(cells, cell_size)?,
            reason: "conflict without opening semantics",
        });
    }
    Ok(out)
}

pub fn opening_id(parent: &str, k: usize) -> String {
    format!("{parent}_opening_{k}")
}

/// Library entry of the requested kind or a fit error.
pub fn select_entry<'a>(
    library: &'a crate::library::OpeningLibrary,
    kind: OpeningKind,
) -> Result<&'a OpeningLibraryEntry> {
    library
        .first_of(kind)
        .ok_or_else(|| Error::Fit(format!("library has no {kind} entry")))
}
