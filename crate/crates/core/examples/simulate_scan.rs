//! Writes the reference building, its scan specification and a simulated
//! scan to a directory, ready for the `facref` command line.
//!
//! cargo run --release --example simulate_scan [out_dir] [poses]

use std::path::PathBuf;

use facref::io::{write_building_json, write_model, write_point_cloud, write_scan_spec};
use facref::sim::{reference_building, reference_scan, simulate};

fn main() -> facref::Result<()> {
    let mut args = std::env::args().skip(1);
    let dir = PathBuf::from(args.next().unwrap_or_else(|| "reference_scene".into()));
    let poses = args.next().and_then(|s| s.parse().ok()).unwrap_or(50);
    std::fs::create_dir_all(&dir).map_err(|e| facref::Error::io(&dir, e))?;

    let truth = reference_building()?;
    let spec = reference_scan(poses, 2016);
    write_building_json(&truth, &dir.join("truth.json"))?;
    write_model(&truth, &dir.join("truth.gml"))?;
    write_building_json(&truth.to_lod2(), &dir.join("lod2.json"))?;
    write_scan_spec(&spec, &dir.join("scan.toml"))?;

    let sim = simulate(&truth, &spec)?;
    write_point_cloud(&sim.cloud, &dir.join("scan.csv"))?;
    std::fs::write(
        dir.join("rays.json"),
        serde_json::to_string_pretty(&sim.opening_rays).unwrap(),
    )
    .map_err(|e| facref::Error::io(dir.join("rays.json"), e))?;

    println!(
        "{} rays, {} points written to {}",
        sim.rays_cast,
        sim.cloud.len(),
        dir.display()
    );
    for (id, n) in &sim.opening_rays {
        println!("  {id}: {n} rays");
    }
    Ok(())
}
