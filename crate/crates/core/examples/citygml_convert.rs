//! Converts a building model between JSON and the CityGML subset, picking
//! the format from each file extension. Without arguments, round-trips the
//! reference building through a temporary file.
//!
//! cargo run --example citygml_convert [input output]

use facref::io::{read_model, to_citygml_subset, write_model};
use facref::sim::reference_building;

fn main() -> facref::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if let [input, output] = args.as_slice() {
        let model = read_model(input.as_ref())?;
        write_model(&model, output.as_ref())?;
        println!(
            "{}: lod {}, {} surfaces, {} openings",
            model.id,
            model.lod,
            model.surfaces.len(),
            model.openings.len()
        );
        return Ok(());
    }
    let model = reference_building()?;
    let path = std::env::temp_dir().join("facref_reference.gml");
    write_model(&model, &path)?;
    let back = read_model(&path)?;
    println!(
        "wrote {} ({} bytes)",
        path.display(),
        to_citygml_subset(&model).len()
    );
    println!("read back identical: {}", back == model);
    for o in &back.openings {
        println!(
            "  {} {} on {} from {}",
            o.id, o.kind, o.parent, o.library_entry
        );
    }
    Ok(())
}
