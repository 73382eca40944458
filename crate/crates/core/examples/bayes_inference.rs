//! Opening probability for every pair of model-layer and points-layer
//! evidence, then the effect of soft evidence on one pair.
//!
//! cargo run --example bayes_inference

use facref::bayes::{infer_cell, soft_evidence, Cpt, SState, M_STATES, S_STATES};
use facref::textures::{CellLabel, ModelCellLabel};

fn main() {
    let cpt = Cpt::default();
    print!("{:<11}", "");
    for s in SState::ALL {
        print!("{:>9}", s.name());
    }
    println!();
    for (mi, m) in ModelCellLabel::ALL.iter().enumerate() {
        print!("{:<11}", m.name());
        for si in 0..S_STATES {
            let mut me = [0.0; M_STATES];
            let mut se = [0.0; S_STATES];
            me[mi] = 1.0;
            se[si] = 1.0;
            print!("{:>9.3}", infer_cell(&me, &se, &cpt));
        }
        println!();
    }

    println!("\nconflicted cell seen as window, with decreasing confidence:");
    for conf in [1.0, 0.9, 0.7, 0.5, 1.0 / S_STATES as f64] {
        let m: [f64; M_STATES] = soft_evidence(&[0.0, 1.0, 0.0], 0.9).try_into().unwrap();
        let s: [f64; S_STATES] = soft_evidence(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0], conf)
            .try_into()
            .unwrap();
        println!(
            "  confidence {conf:.2}: P(opening) = {:.3}",
            infer_cell(&m, &s, &cpt)
        );
    }
}
