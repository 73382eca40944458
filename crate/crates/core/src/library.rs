//! Window and door templates in a normalized local frame.
//!
//! Local axes: `x` is width (unit), `y` is height (unit), `z` is depth
//! (`0..depth`, pointing into the wall). The origin sits at the bottom-left
//! corner of the front face.

use serde::{Deserialize, Serialize};

use crate::building::{OpeningKind, Triangle};
use crate::error::{Error, Result};
use crate::geometry::Point3;

const BOUNDS_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpeningLibraryEntry {
    pub name: String,
    pub kind: OpeningKind,
    pub depth: f64,
    pub triangles: Vec<Triangle>,
}

impl OpeningLibraryEntry {
    /// Plain box template, twelve triangles.
    pub fn unit_box(name: &str, kind: OpeningKind, depth: f64) -> Self {
        let c = |x: f64, y: f64, z: f64| Point3::new(x, y, z * depth);
        let v = [
            c(0., 0., 0.),
            c(1., 0., 0.),
            c(1., 1., 0.),
            c(0., 1., 0.),
            c(0., 0., 1.),
            c(1., 0., 1.),
            c(1., 1., 1.),
            c(0., 1., 1.),
        ];
        let quads = [
            [0, 3, 2, 1],
            [4, 5, 6, 7],
            [0, 1, 5, 4],
            [2, 3, 7, 6],
            [0, 4, 7, 3],
            [1, 2, 6, 5],
        ];
        let triangles = quads
            .iter()
            .flat_map(|q| [[v[q[0]], v[q[1]], v[q[2]]], [v[q[0]], v[q[2]], v[q[3]]]])
            .collect();
        OpeningLibraryEntry {
            name: name.to_string(),
            kind,
            depth,
            triangles,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.depth > 0.0 && self.depth.is_finite()) {
            return Err(Error::Schema(format!(
                "entry `{}`: depth must be positive",
                self.name
            )));
        }
        if self.triangles.is_empty() {
            return Err(Error::Schema(format!(
                "entry `{}` has no geometry",
                self.name
            )));
        }
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for p in self.triangles.iter().flatten() {
            for k in 0..3 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let expected = [1.0, 1.0, self.depth];
        for k in 0..3 {
            if lo[k].abs() > BOUNDS_TOLERANCE || (hi[k] - expected[k]).abs() > BOUNDS_TOLERANCE {
                return Err(Error::Schema(format!(
                    "entry `{}`: bounding box must be [0,1]x[0,1]x[0,{}], axis {k} spans [{}, {}]",
                    self.name, self.depth, lo[k], hi[k]
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpeningLibrary {
    pub entries: Vec<OpeningLibraryEntry>,
}

impl OpeningLibrary {
    /// One box window and one box door of the given depth.
    pub fn parametric(depth: f64) -> Self {
        OpeningLibrary {
            entries: vec![
                OpeningLibraryEntry::unit_box("box_window", OpeningKind::Window, depth),
                OpeningLibraryEntry::unit_box("box_door", OpeningKind::Door, depth),
            ],
        }
    }

    /// First entry of the requested kind.
    pub fn first_of(&self, kind: OpeningKind) -> Option<&OpeningLibraryEntry> {
        self.entries.iter().find(|e| e.kind == kind)
    }

    pub fn validate(&self) -> Result<()> {
        self.entries
            .iter()
            .try_for_each(OpeningLibraryEntry::validate)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_box_has_library_bounds() {
        let lib = OpeningLibrary::parametric(0.2);
        lib.validate().unwrap();
        assert_eq!(lib.first_of(OpeningKind::Door).unwrap().name, "box_door");
        assert_eq!(lib.entries[0].triangles.len(), 12);
    }

    #[test]
    fn shifted_geometry_rejected() {
        let mut e = OpeningLibraryEntry::unit_box("w", OpeningKind::Window, 0.2);
        for t in &mut e.triangles {
            for p in t.iter_mut() {
                p.x += 0.5;
            }
        }
        assert!(matches!(e.validate(), Err(Error::Schema(_))));
    }
}
