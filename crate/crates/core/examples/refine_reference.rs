//! Simulates a drive past the reference façade, refines its LoD2 model and
//! scores the detected openings and relabeled points.
//!
//! cargo run --release --example refine_reference [seed]

use std::time::Instant;

use facref::config::Config;
use facref::pipeline::{build_report, evaluate_models, run_pipeline, PipelineOptions};
use facref::sim::{reference_building, reference_scan, simulate};

fn main() -> facref::Result<()> {
    let seed = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(2016);
    let truth = reference_building()?;
    let t = Instant::now();
    let sim = simulate(&truth, &reference_scan(50, seed))?;
    println!(
        "simulated {} points from {} rays in {:.1?}",
        sim.cloud.len(),
        sim.rays_cast,
        t.elapsed()
    );

    let config = Config::default();
    let t = Instant::now();
    let out = run_pipeline(
        &truth.to_lod2(),
        &sim.cloud,
        &config,
        &PipelineOptions::default(),
    )?;
    println!("pipeline {:.1?} ({:?})", t.elapsed(), out.timings);
    println!("fusion: {:?}", out.fusion);
    for c in out.candidates() {
        println!(
            "  {} {} at u={:.2} v={:.2} {:.2}x{:.2}",
            c.facade, c.kind, c.bbox.u_min, c.bbox.v_min, c.bbox.width, c.bbox.height
        );
    }
    for d in out.diagnostics() {
        println!(
            "  unexplained on {}: {} cells at u={:.2} v={:.2} {:.2}x{:.2}",
            d.facade, d.cells, d.bbox.u_min, d.bbox.v_min, d.bbox.width, d.bbox.height
        );
    }
    let k_min = config.eval.k_min;
    let det = evaluate_models(
        &out.model,
        &truth,
        |id| sim.measured(id, k_min),
        config.eval.iou_threshold,
    )?;
    let report = build_report(
        &config,
        Some(&sim.cloud),
        Some(&out.cloud),
        Some(&sim.cloud),
        Some(det),
    )?;
    print!("{}", report.to_text());
    Ok(())
}
