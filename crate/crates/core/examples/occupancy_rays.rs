//! Fires a fan of rays at a wall through an occupancy grid and prints the
//! resulting occupancy along one voxel row.
//!
//! cargo run --example occupancy_rays

use facref::geometry::{Point3, Ray};
use facref::occupancy::{prob, GridParams, OccupancyGrid};

fn main() -> facref::Result<()> {
    let params = GridParams::default();
    let mut grid = OccupancyGrid::new(
        params,
        Point3::new(-1.0, -1.0, -1.0),
        Point3::new(4.0, 3.0, 3.0),
    )?;
    let sensor = Point3::new(0.05, 1.05, 1.05);
    // Hits on a wall at x = 3.05; every ray clears the voxels in between.
    for k in 0..40 {
        let y = 0.5 + k as f64 * 0.03;
        let ray = Ray::between(sensor, Point3::new(3.05, y, 1.05))?;
        grid.insert_ray(&ray)?;
    }
    println!("x      L      p      hits  traversals");
    for i in 0..32 {
        let p = Point3::new(0.05 + i as f64 * params.voxel_size, 1.05, 1.05);
        if let Some(v) = grid.voxel(&grid.key_of(&p)) {
            println!(
                "{:.2}  {:+.2}  {:.3}  {:>4}  {:>10}",
                p.x,
                v.log_odds,
                prob(v.log_odds),
                v.hits,
                v.traversals
            );
        }
    }
    println!("{} voxels stored", grid.len());
    Ok(())
}
