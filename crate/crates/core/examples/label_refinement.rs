//! Corrupts the scan's semantic labels and shows how far the refined model
//! and the voxel fusion repair them.
//!
//! cargo run --release --example label_refinement [epsilon]

use facref::cloud::SemanticLabel;
use facref::config::Config;
use facref::eval::seg_metrics;
use facref::pipeline::{run_pipeline, PipelineOptions};
use facref::sim::{
    corrupt_labels, reference_building, reference_scan, simulate, uniform_confusion,
};

fn main() -> facref::Result<()> {
    let eps = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(0.3);
    let truth = reference_building()?;
    let mut sim = simulate(&truth, &reference_scan(50, 2016))?;
    corrupt_labels(&mut sim.cloud, &uniform_confusion(eps), 0.9, 11)?;
    let out = run_pipeline(
        &truth.to_lod2(),
        &sim.cloud,
        &Config::default(),
        &PipelineOptions::default(),
    )?;
    let before = seg_metrics(&sim.cloud, &sim.cloud)?;
    let after = seg_metrics(&out.cloud, &sim.cloud)?;
    println!(
        "label noise {eps}: {} openings found",
        out.model.openings.len()
    );
    println!("OA {:.2}% -> {:.2}%", 100.0 * before.oa, 100.0 * after.oa);
    for label in [
        SemanticLabel::Window,
        SemanticLabel::Door,
        SemanticLabel::Wall,
        SemanticLabel::Other,
    ] {
        println!(
            "  {label:<7} F1 {:.1}% -> {:.1}%",
            100.0 * before.f1(label),
            100.0 * after.f1(label)
        );
    }
    Ok(())
}
