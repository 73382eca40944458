//! Geometric per-point features from local covariance.

use std::collections::HashMap;

use nalgebra::{Matrix3, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::geometry::{Point3, Vector3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NeighborhoodSpec {
    pub r_eigen: f64,
    pub r_vert: f64,
}

impl Default for NeighborhoodSpec {
    fn default() -> Self {
        NeighborhoodSpec {
            r_eigen: 0.8,
            r_vert: 0.4,
        }
    }
}

impl NeighborhoodSpec {
    pub fn validate(&self) -> Result<()> {
        for (key, r) in [
            ("features.r_eigen", self.r_eigen),
            ("features.r_vert", self.r_vert),
        ] {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::Config(format!("{key} must be positive, got {r}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenFeatures {
    pub omnivariance: f64,
    pub planarity: f64,
    pub surface_variation: f64,
    /// Normalized eigenvalues, descending.
    pub lambda: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub height: f64,
    pub roughness: f64,
    pub volume_density: f64,
    pub verticality: f64,
    pub omnivariance: f64,
    pub planarity: f64,
    pub surface_variation: f64,
}

impl FeatureVector {
    pub const NAMES: [&'static str; 7] = [
        "height",
        "roughness",
        "volume_density",
        "verticality",
        "omnivariance",
        "planarity",
        "surface_variation",
    ];

    pub fn values(&self) -> [f64; 7] {
        [
            self.height,
            self.roughness,
            self.volume_density,
            self.verticality,
            self.omnivariance,
            self.planarity,
            self.surface_variation,
        ]
    }
}

/// Uniform hash grid over a fixed point set.
#[derive(Debug, Clone)]
pub struct RadiusIndex<'a> {
    points: &'a [Point3],
    cell: f64,
    buckets: HashMap<[i64; 3], Vec<u32>>,
}

impl<'a> RadiusIndex<'a> {
    pub fn new(points: &'a [Point3], cell: f64) -> Self {
        assert!(cell > 0.0, "cell size must be positive");
        let mut buckets: HashMap<[i64; 3], Vec<u32>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            buckets
                .entry(Self::bucket(p, cell))
                .or_default()
                .push(i as u32);
        }
        RadiusIndex {
            points,
            cell,
            buckets,
        }
    }

    fn bucket(p: &Point3, cell: f64) -> [i64; 3] {
        [
            (p.x / cell).floor() as i64,
            (p.y / cell).floor() as i64,
            (p.z / cell).floor() as i64,
        ]
    }

    /// Indices with `‖q − p‖ ≤ r`, ascending.
    pub fn query(&self, p: &Point3, r: f64) -> Vec<usize> {
        let lo = Self::bucket(&(p - Vector3::repeat(r)), self.cell);
        let hi = Self::bucket(&(p + Vector3::repeat(r)), self.cell);
        let r2 = r * r;
        let mut out = Vec::new();
        for x in lo[0]..=hi[0] {
            for y in lo[1]..=hi[1] {
                for z in lo[2]..=hi[2] {
                    if let Some(b) = self.buckets.get(&[x, y, z]) {
                        out.extend(
                            b.iter()
                                .map(|&i| i as usize)
                                .filter(|&i| (self.points[i] - p).norm_squared() <= r2),
                        );
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }
}

pub fn radius_neighbors(cloud: &PointCloud, p: &Point3, r: f64) -> Vec<usize> {
    let pts: Vec<Point3> = cloud.iter().map(|q| q.position).collect();
    RadiusIndex::new(&pts, r.max(1e-6)).query(p, r)
}

struct LocalPlane {
    centroid: Point3,
    normal: Vector3,
    /// Raw covariance eigenvalues, descending.
    lambda: [f64; 3],
}

fn local_plane(points: &[Point3]) -> Result<LocalPlane> {
    if points.len() < 3 {
        return Err(Error::InsufficientNeighborhood(points.len()));
    }
    let n = points.len() as f64;
    let centroid = Point3::from(points.iter().map(|p| p.coords).sum::<Vector3>() / n);
    let mut cov = Matrix3::zeros();
    for p in points {
        let d = p - centroid;
        cov += d * d.transpose();
    }
    cov /= n;
    let eig = SymmetricEigen::new(cov);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let lambda = order.map(|k| eig.eigenvalues[k].max(0.0));
    let normal = eig.eigenvectors.column(order[2]).into_owned();
    Ok(LocalPlane {
        centroid,
        normal,
        lambda,
    })
}

pub fn eigen_features(points: &[Point3]) -> Result<EigenFeatures> {
    let plane = local_plane(points)?;
    let sum: f64 = plane.lambda.iter().sum();
    if plane.lambda[0] <= 0.0 || sum <= 0.0 {
        return Err(Error::InsufficientNeighborhood(points.len()));
    }
    let [l1, l2, l3] = plane.lambda.map(|l| l / sum);
    Ok(EigenFeatures {
        omnivariance: (l1 * l2 * l3).cbrt(),
        planarity: (l2 - l3) / l1,
        surface_variation: l3,
        lambda: [l1, l2, l3],
    })
}

/// Height, roughness, density and verticality of one point. Returns the
/// eigen features of the `r_eigen` neighborhood alongside.
fn point_features(
    index: &RadiusIndex<'_>,
    p: &Point3,
    min_z: f64,
    spec: &NeighborhoodSpec,
) -> Result<FeatureVector> {
    let gather = |r: f64| -> Vec<Point3> {
        index
            .query(p, r)
            .into_iter()
            .map(|i| index.points[i])
            .collect()
    };
    let near = gather(spec.r_eigen);
    let plane = local_plane(&near)?;
    let eigen = eigen_features(&near)?;
    let vert = local_plane(&gather(spec.r_vert))?;
    let volume = 4.0 / 3.0 * std::f64::consts::PI * spec.r_eigen.powi(3);
    Ok(FeatureVector {
        height: p.z - min_z,
        roughness: (p - plane.centroid).dot(&plane.normal).abs(),
        volume_density: near.len() as f64 / volume,
        verticality: 1.0 - vert.normal.z.abs().min(1.0),
        omnivariance: eigen.omnivariance,
        planarity: eigen.planarity,
        surface_variation: eigen.surface_variation,
    })
}

pub fn scalar_features(
    cloud: &PointCloud,
    p: &Point3,
    spec: &NeighborhoodSpec,
) -> Result<FeatureVector> {
    let pts: Vec<Point3> = cloud.iter().map(|q| q.position).collect();
    let min_z = pts.iter().map(|q| q.z).fold(f64::INFINITY, f64::min);
    let index = RadiusIndex::new(&pts, spec.r_eigen);
    point_features(&index, p, min_z, spec)
}

/// Features for every point; `None` where a neighborhood is too small.
pub fn compute_features(cloud: &PointCloud, spec: &NeighborhoodSpec) -> Vec<Option<FeatureVector>> {
    let pts: Vec<Point3> = cloud.iter().map(|q| q.position).collect();
    let min_z = pts.iter().map(|q| q.z).fold(f64::INFINITY, f64::min);
    let index = RadiusIndex::new(&pts, spec.r_eigen);
    pts.par_iter()
        .map(|p| point_features(&index, p, min_z, spec).ok())
        .collect()
}
