//! A box parked in front of the façade during one of ten passes. Later
//! passes see through where it stood, so its voxels turn dynamic and its
//! points are relabeled `other`.
//!
//! cargo run --release --example transient_suppression

use facref::cloud::SemanticLabel;
use facref::config::Config;
use facref::geometry::Point3;
use facref::pipeline::{run_pipeline, PipelineOptions};
use facref::sim::{reference_building, reference_scan, simulate, Transient};

fn main() -> facref::Result<()> {
    let truth = reference_building()?;
    let mut spec = reference_scan(10, 7);
    spec.passes = 10;
    spec.terrain_z = Some(0.0);
    let (lo, hi) = (Point3::new(3.0, -2.5, 0.0), Point3::new(4.0, -1.5, 1.0));
    spec.transients.push(Transient {
        min: lo,
        max: hi,
        active_fraction: 0.1,
        label: SemanticLabel::Wall,
    });
    let sim = simulate(&truth, &spec)?;
    let out = run_pipeline(
        &truth.to_lod2(),
        &sim.cloud,
        &Config::default(),
        &PipelineOptions::default(),
    )?;
    println!("{} points, fusion {:?}", sim.cloud.len(), out.fusion);

    let in_box =
        |p: &Point3| p.z > 0.03 && (0..3).all(|i| p[i] >= lo[i] - 0.03 && p[i] <= hi[i] + 0.03);
    let (mut boxed, mut boxed_other) = (0, 0);
    for (a, b) in sim.cloud.iter().zip(out.cloud.iter()) {
        if in_box(&a.position) {
            boxed += 1;
            boxed_other += (b.predicted() == SemanticLabel::Other) as usize;
        }
    }
    println!("box points relabeled other: {boxed_other}/{boxed}");
    Ok(())
}
