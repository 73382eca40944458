//! Geometric features of a simulated scan, averaged per true label.
//!
//! cargo run --release --example point_features

use facref::cloud::{SemanticLabel, LABEL_COUNT};
use facref::features::{compute_features, FeatureVector, NeighborhoodSpec};
use facref::sim::{reference_building, reference_scan, simulate};

fn main() -> facref::Result<()> {
    let sim = simulate(&reference_building()?, &reference_scan(6, 1))?;
    let features = compute_features(&sim.cloud, &NeighborhoodSpec::default());
    let mut sums = [[0.0; 7]; LABEL_COUNT];
    let mut counts = [0usize; LABEL_COUNT];
    for (p, f) in sim.cloud.iter().zip(&features) {
        let (Some(label), Some(f)) = (p.true_label, f) else {
            continue;
        };
        counts[label.id()] += 1;
        for (s, v) in sums[label.id()].iter_mut().zip(f.values()) {
            *s += v;
        }
    }
    print!("{:<8}{:>8}", "label", "n");
    for name in FeatureVector::NAMES {
        print!("{:>11}", &name[..name.len().min(10)]);
    }
    println!();
    for id in 0..LABEL_COUNT {
        if counts[id] == 0 {
            continue;
        }
        print!(
            "{:<8}{:>8}",
            SemanticLabel::from_id(id).unwrap().name(),
            counts[id]
        );
        for s in sums[id] {
            print!("{:>11.4}", s / counts[id] as f64);
        }
        println!();
    }
    let missing = features.iter().filter(|f| f.is_none()).count();
    println!("{missing} of {} points lacked neighbors", sim.cloud.len());
    Ok(())
}
