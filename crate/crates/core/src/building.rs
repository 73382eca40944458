//! Semantic building models: boundary surfaces plus (at LoD3) opening solids.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{PlanarPolygon, Point3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SurfaceType {
    WallSurface,
    RoofSurface,
    GroundSurface,
}

impl SurfaceType {
    pub fn name(self) -> &'static str {
        match self {
            SurfaceType::WallSurface => "WallSurface",
            SurfaceType::RoofSurface => "RoofSurface",
            SurfaceType::GroundSurface => "GroundSurface",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "WallSurface" => Some(SurfaceType::WallSurface),
            "RoofSurface" => Some(SurfaceType::RoofSurface),
            "GroundSurface" => Some(SurfaceType::GroundSurface),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OpeningKind {
    Window,
    Door,
}

impl OpeningKind {
    pub fn name(self) -> &'static str {
        match self {
            OpeningKind::Window => "Window",
            OpeningKind::Door => "Door",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "Window" => Some(OpeningKind::Window),
            "Door" => Some(OpeningKind::Door),
            _ => None,
        }
    }
}

impl fmt::Display for OpeningKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Surface {
    pub id: String,
    pub kind: SurfaceType,
    pub polygon: PlanarPolygon,
}

pub type Triangle = [Point3; 3];

/// A fitted window or door solid attached to a wall surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpeningSolid {
    pub id: String,
    pub kind: OpeningKind,
    /// Name of the library entry the solid was fitted from.
    pub library_entry: String,
    pub triangles: Vec<Triangle>,
    /// Bottom-left corner of the front face, world coordinates.
    pub anchor: Point3,
    pub width: f64,
    pub height: f64,
    pub depth: f64,
    pub parent: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildingModel {
    pub id: String,
    pub lod: u8,
    pub surfaces: Vec<Surface>,
    #[serde(default)]
    pub openings: Vec<OpeningSolid>,
}

impl BuildingModel {
    pub fn validate(&self) -> Result<()> {
        if !matches!(self.lod, 2 | 3) {
            return Err(Error::Schema(format!("unsupported LoD {}", self.lod)));
        }
        if self.lod == 2 && !self.openings.is_empty() {
            return Err(Error::Schema("LoD2 model carries openings".into()));
        }
        let mut ids = HashSet::new();
        for s in &self.surfaces {
            if !ids.insert(s.id.as_str()) {
                return Err(Error::Schema(format!("duplicate surface id `{}`", s.id)));
            }
        }
        for o in &self.openings {
            if !ids.contains(o.parent.as_str()) {
                return Err(Error::Link(o.parent.clone()));
            }
        }
        Ok(())
    }

    pub fn surface(&self, id: &str) -> Option<&Surface> {
        self.surfaces.iter().find(|s| s.id == id)
    }

    pub fn walls(&self) -> impl Iterator<Item = &Surface> {
        self.surfaces
            .iter()
            .filter(|s| s.kind == SurfaceType::WallSurface)
    }

    /// Same building with its openings dropped and LoD set back to 2.
    pub fn to_lod2(&self) -> BuildingModel {
        BuildingModel {
            lod: 2,
            openings: Vec::new(),
            ..self.clone()
        }
    }

    /// Axis-aligned box building: four walls, a flat roof, a ground face.
    /// Wall normals point outwards.
    pub fn box_building(id: &str, min: Point3, max: Point3) -> Result<BuildingModel> {
        let p = Point3::new;
        let (x0, y0, z0, x1, y1, z1) = (min.x, min.y, min.z, max.x, max.y, max.z);
        let rings = [
            (
                "wall_south",
                SurfaceType::WallSurface,
                vec![p(x0, y0, z0), p(x1, y0, z0), p(x1, y0, z1), p(x0, y0, z1)],
            ),
            (
                "wall_east",
                SurfaceType::WallSurface,
                vec![p(x1, y0, z0), p(x1, y1, z0), p(x1, y1, z1), p(x1, y0, z1)],
            ),
            (
                "wall_north",
                SurfaceType::WallSurface,
                vec![p(x1, y1, z0), p(x0, y1, z0), p(x0, y1, z1), p(x1, y1, z1)],
            ),
            (
                "wall_west",
                SurfaceType::WallSurface,
                vec![p(x0, y1, z0), p(x0, y0, z0), p(x0, y0, z1), p(x0, y1, z1)],
            ),
            (
                "roof",
                SurfaceType::RoofSurface,
                vec![p(x0, y0, z1), p(x1, y0, z1), p(x1, y1, z1), p(x0, y1, z1)],
            ),
            (
                "ground",
                SurfaceType::GroundSurface,
                vec![p(x0, y0, z0), p(x0, y1, z0), p(x1, y1, z0), p(x1, y0, z0)],
            ),
        ];
        let surfaces = rings
            .into_iter()
            .map(|(sid, kind, ring)| {
                Ok(Surface {
                    id: format!("{id}_{sid}"),
                    kind,
                    polygon: PlanarPolygon::new(ring, Vec::new())?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BuildingModel {
            id: id.to_string(),
            lod: 2,
            surfaces,
            openings: Vec::new(),
        })
    }
}
