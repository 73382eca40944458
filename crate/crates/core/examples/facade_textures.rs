//! Draws the south wall's model, points and posterior textures of the
//! reference scene as characters, and writes them as images.
//!
//! cargo run --release --example facade_textures [out_dir]

use std::path::PathBuf;

use facref::bayes::Decision;
use facref::cloud::SemanticLabel;
use facref::config::Config;
use facref::io::export_texture;
use facref::pipeline::{run_pipeline, PipelineOptions};
use facref::sim::{reference_building, reference_scan, simulate};
use facref::textures::{ModelCellLabel, PointsCellLabel, TextureLayer};

fn draw<L: Copy>(title: &str, layer: &TextureLayer<L>, glyph: impl Fn(L, f64) -> char) {
    println!("{title}");
    // Every other cell, top row first.
    for r in (0..layer.rows).rev().step_by(2) {
        let line: String = (0..layer.cols)
            .step_by(2)
            .map(|c| {
                let cell = layer.get(r, c);
                glyph(cell.label, cell.prob)
            })
            .collect();
        println!("  {line}");
    }
}

fn main() -> facref::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "textures".into()));
    std::fs::create_dir_all(&dir).map_err(|e| facref::Error::io(&dir, e))?;
    let truth = reference_building()?;
    let sim = simulate(&truth, &reference_scan(20, 2016))?;
    let out = run_pipeline(
        &truth.to_lod2(),
        &sim.cloud,
        &Config::default(),
        &PipelineOptions::default(),
    )?;
    let south = &out.facades[0];

    draw(
        "model layer (# confirmed, x conflicted, . unknown)",
        &south.model_layer,
        |l, _| match l {
            ModelCellLabel::Confirmed => '#',
            ModelCellLabel::Conflicted => 'x',
            ModelCellLabel::Unknown => '.',
        },
    );
    draw(
        "points layer (w window, d door, # wall, . no data)",
        &south.points_layer,
        |l, _| match l {
            PointsCellLabel::Label(SemanticLabel::Window) => 'w',
            PointsCellLabel::Label(SemanticLabel::Door) => 'd',
            PointsCellLabel::Label(SemanticLabel::Wall) => '#',
            PointsCellLabel::Label(_) => 'o',
            PointsCellLabel::NoData => '.',
        },
    );
    draw(
        "posterior decision (W window, D door, blank other)",
        &south.posterior,
        |l, _| match l.decision {
            Decision::UnmodeledOpening(facref::building::OpeningKind::Window) => 'W',
            Decision::UnmodeledOpening(_) => 'D',
            Decision::OtherObject => ' ',
        },
    );

    let stem = dir.join(&south.facade.id);
    let (pgm, csv) = export_texture(&south.posterior, &stem)?;
    export_texture(
        &south.model_layer,
        &dir.join(format!("{}_model", south.facade.id)),
    )?;
    export_texture(
        &south.points_layer,
        &dir.join(format!("{}_points", south.facade.id)),
    )?;
    println!("wrote {} and {}", pgm.display(), csv.display());
    Ok(())
}
