//! File formats: point-cloud CSV, building and library JSON, a CityGML
//! subset, and texture exports.

mod citygml;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::building::BuildingModel;
use crate::cloud::{argmax, LabelProbs, PointCloud, PointRecord, SemanticLabel, LABEL_COUNT};
use crate::error::{Error, Result};
use crate::features::FeatureVector;
use crate::geometry::Point3;
use crate::library::OpeningLibrary;
use crate::sim::ScanSpec;
use crate::textures::{CellLabel, TextureLayer};

pub use crate::config::Config;
pub use citygml::{
    parse_citygml_subset, read_citygml_subset, to_citygml_subset, write_citygml_subset,
};

pub const CLOUD_HEADER: &str =
    "x,y,z,sx,sy,sz,label,p_arch,p_column,p_molding,p_floor,p_door,p_window,p_wall,p_other";

const PROB_SUM_TOLERANCE: f64 = 1e-6;

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Probabilities in whole millionths summing to exactly one million; the
/// rounding residual goes to the arg-max class.
fn micro_units(prob: &LabelProbs) -> [i64; LABEL_COUNT] {
    let mut q = prob.map(|p| (p * 1e6).round() as i64);
    let residual = 1_000_000 - q.iter().sum::<i64>();
    q[argmax(prob).id()] += residual;
    q
}

fn fmt_micro(q: i64) -> String {
    let sign = if q < 0 { "-" } else { "" };
    let a = q.unsigned_abs();
    format!("{sign}{}.{:06}", a / 1_000_000, a % 1_000_000)
}

pub fn format_point_cloud(cloud: &PointCloud) -> String {
    let mut s = String::with_capacity(cloud.len() * 120 + CLOUD_HEADER.len() + 1);
    s.push_str(CLOUD_HEADER);
    s.push('\n');
    for r in cloud.iter() {
        write_record(&mut s, r);
        s.push('\n');
    }
    s
}

fn write_record(s: &mut String, r: &PointRecord) {
    let p = r.position;
    let q = r.sensor;
    let label = r.true_label.map(|l| l.id().to_string()).unwrap_or_default();
    let _ = write!(
        s,
        "{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{label}",
        p.x, p.y, p.z, q.x, q.y, q.z
    );
    for m in micro_units(&r.prob) {
        s.push(',');
        s.push_str(&fmt_micro(m));
    }
}

pub fn write_point_cloud(cloud: &PointCloud, path: &Path) -> Result<()> {
    write_text(path, &format_point_cloud(cloud))
}

/// Point-cloud CSV with feature columns appended; points without a full
/// neighborhood get empty feature cells.
pub fn write_point_cloud_with_features(
    cloud: &PointCloud,
    features: &[Option<FeatureVector>],
    path: &Path,
) -> Result<()> {
    if features.len() != cloud.len() {
        return Err(Error::Schema("one feature row per point required".into()));
    }
    let mut s = String::from(CLOUD_HEADER);
    for n in FeatureVector::NAMES {
        s.push(',');
        s.push_str(n);
    }
    s.push('\n');
    for (r, f) in cloud.iter().zip(features) {
        write_record(&mut s, r);
        match f {
            Some(f) => {
                for v in f.values() {
                    let _ = write!(s, ",{v:.6}");
                }
            }
            None => s.push_str(&",".repeat(FeatureVector::NAMES.len())),
        }
        s.push('\n');
    }
    write_text(path, &s)
}

pub fn parse_point_cloud(text: &str, source: &str) -> Result<PointCloud> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim_end_matches('\r') == CLOUD_HEADER => {}
        Some(_) => return Err(Error::parse(source, 1, "unexpected header")),
        None => return Err(Error::parse(source, 1, "missing header")),
    }
    let mut points = Vec::new();
    for (i, line) in lines {
        let lineno = i + 1;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 + LABEL_COUNT {
            return Err(Error::parse(
                source,
                lineno,
                format!(
                    "expected {} fields, found {}",
                    7 + LABEL_COUNT,
                    fields.len()
                ),
            ));
        }
        let num = |k: usize| -> Result<f64> {
            let v: f64 = fields[k].parse().map_err(|_| {
                Error::parse(
                    source,
                    lineno,
                    format!("field {} is not a number: `{}`", k + 1, fields[k]),
                )
            })?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::parse(
                    source,
                    lineno,
                    format!("field {} is not finite", k + 1),
                ))
            }
        };
        let true_label = match fields[6] {
            "" => None,
            t => {
                let id: usize = t
                    .parse()
                    .map_err(|_| Error::parse(source, lineno, format!("bad label `{t}`")))?;
                Some(SemanticLabel::from_id(id).ok_or_else(|| {
                    Error::parse(source, lineno, format!("label id {id} out of range"))
                })?)
            }
        };
        let mut prob = [0.0; LABEL_COUNT];
        for (k, p) in prob.iter_mut().enumerate() {
            *p = num(7 + k)?;
            if !(0.0..=1.0).contains(p) || p.is_sign_negative() {
                return Err(Error::Schema(format!(
                    "line {lineno}: probability {p} outside [0, 1]"
                )));
            }
        }
        let sum: f64 = prob.iter().sum();
        if (sum - 1.0).abs() > PROB_SUM_TOLERANCE {
            return Err(Error::Schema(format!(
                "line {lineno}: probabilities sum to {sum}"
            )));
        }
        points.push(PointRecord {
            position: Point3::new(num(0)?, num(1)?, num(2)?),
            sensor: Point3::new(num(3)?, num(4)?, num(5)?),
            true_label,
            prob,
        });
    }
    Ok(PointCloud::new(points))
}

pub fn read_point_cloud(path: &Path) -> Result<PointCloud> {
    parse_point_cloud(&read_text(path)?, &path.display().to_string())
}

fn json_error(e: serde_json::Error) -> Error {
    let msg = e.to_string();
    if msg.starts_with("degenerate geometry") {
        Error::DegenerateGeometry(msg)
    } else {
        Error::Schema(msg)
    }
}

pub fn parse_building_json(text: &str) -> Result<BuildingModel> {
    let model: BuildingModel = serde_json::from_str(text).map_err(json_error)?;
    model.validate()?;
    Ok(model)
}

pub fn to_building_json(model: &BuildingModel) -> Result<String> {
    serde_json::to_string_pretty(model).map_err(|e| Error::Schema(e.to_string()))
}

pub fn read_building_json(path: &Path) -> Result<BuildingModel> {
    parse_building_json(&read_text(path)?)
}

pub fn write_building_json(model: &BuildingModel, path: &Path) -> Result<()> {
    write_text(path, &to_building_json(model)?)
}

pub fn read_opening_library(path: &Path) -> Result<OpeningLibrary> {
    let lib: OpeningLibrary = serde_json::from_str(&read_text(path)?).map_err(json_error)?;
    lib.validate()?;
    Ok(lib)
}

pub fn write_opening_library(lib: &OpeningLibrary, path: &Path) -> Result<()> {
    write_text(
        path,
        &serde_json::to_string_pretty(lib).map_err(|e| Error::Schema(e.to_string()))?,
    )
}

/// Building model from `.gml`/`.xml` (CityGML subset) or JSON otherwise.
pub fn read_model(path: &Path) -> Result<BuildingModel> {
    match extension(path).as_deref() {
        Some("gml" | "xml") => read_citygml_subset(path),
        _ => read_building_json(path),
    }
}

pub fn write_model(model: &BuildingModel, path: &Path) -> Result<()> {
    match extension(path).as_deref() {
        Some("gml" | "xml") => write_citygml_subset(model, path),
        _ => write_building_json(model, path),
    }
}

fn extension(path: &Path) -> Option<String> {
    path.extension()
        .map(|e| e.to_string_lossy().to_ascii_lowercase())
}

/// Scan specification in TOML, or JSON for a `.json` path.
pub fn read_scan_spec(path: &Path) -> Result<ScanSpec> {
    let text = read_text(path)?;
    let spec: ScanSpec = if extension(path).as_deref() == Some("json") {
        serde_json::from_str(&text).map_err(json_error)?
    } else {
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
    };
    spec.validate()?;
    Ok(spec)
}

pub fn write_scan_spec(spec: &ScanSpec, path: &Path) -> Result<()> {
    let text = if extension(path).as_deref() == Some("json") {
        serde_json::to_string_pretty(spec).map_err(|e| Error::Schema(e.to_string()))?
    } else {
        toml::to_string(spec).map_err(|e| Error::Config(e.to_string()))?
    };
    write_text(path, &text)
}

pub fn read_config(path: &Path) -> Result<Config> {
    Config::load(path)
}

pub fn write_config(config: &Config, path: &Path) -> Result<()> {
    config.save(path)
}

/// Graymap bytes (P5) of a layer's probabilities; first row is the top of
/// the façade.
pub fn texture_pgm<L: Copy>(layer: &TextureLayer<L>) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", layer.cols, layer.rows).into_bytes();
    for r in (0..layer.rows).rev() {
        for c in 0..layer.cols {
            out.push((layer.get(r, c).prob.clamp(0.0, 1.0) * 255.0).round() as u8);
        }
    }
    out
}

pub fn texture_label_csv<L: CellLabel>(layer: &TextureLayer<L>) -> String {
    let mut s = String::new();
    for r in (0..layer.rows).rev() {
        let row: Vec<&str> = (0..layer.cols)
            .map(|c| layer.get(r, c).label.name())
            .collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

/// Writes `<stem>.pgm` and `<stem>.csv`; returns both paths.
pub fn export_texture<L: CellLabel>(
    layer: &TextureLayer<L>,
    stem: &Path,
) -> Result<(PathBuf, PathBuf)> {
    let pgm = stem.with_extension("pgm");
    let csv = stem.with_extension("csv");
    std::fs::write(&pgm, texture_pgm(layer)).map_err(|e| Error::io(&pgm, e))?;
    write_text(&csv, &texture_label_csv(layer))?;
    Ok((pgm, csv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloud::peaked;
    use crate::textures::{Cell, Facade, ModelCellLabel};
    use proptest::prelude::*;

    fn sample() -> PointCloud {
        PointCloud::new(vec![
            PointRecord {
                position: Point3::new(1.0, 2.0, 3.0),
                sensor: Point3::new(0.0, -5.0, 2.0),
                true_label: Some(SemanticLabel::Wall),
                prob: peaked(SemanticLabel::Wall, 0.9),
            },
            PointRecord {
                position: Point3::new(-1.25, 0.5, 0.001),
                sensor: Point3::new(0.0, -5.0, 2.0),
                true_label: None,
                prob: [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            },
            PointRecord {
                position: Point3::new(7.0, 0.0, 1.0),
                sensor: Point3::new(7.0, -9.0, 2.0),
                true_label: Some(SemanticLabel::Other),
                prob: crate::cloud::one_hot(SemanticLabel::Other),
            },
        ])
    }

    #[test]
    fn scan_spec_round_trips_in_both_formats() {
        let dir = tempfile::tempdir().unwrap();
        let mut spec = crate::sim::reference_scan(3, 5);
        spec.terrain_z = Some(0.0);
        for name in ["s.toml", "s.json"] {
            let p = dir.path().join(name);
            write_scan_spec(&spec, &p).unwrap();
            assert_eq!(read_scan_spec(&p).unwrap(), spec);
        }
    }

    #[test]
    fn three_records_and_stable_text() {
        let text = format_point_cloud(&sample());
        let back = parse_point_cloud(&text, "t").unwrap();
        assert_eq!(back.len(), 3);
        assert_eq!(format_point_cloud(&back), text);
        assert_eq!(
            parse_point_cloud(&format_point_cloud(&back), "t").unwrap(),
            back
        );
        assert_eq!(back.points[1].true_label, None);
        let sum: f64 = back.points[1].prob.iter().sum();
        assert!((sum - 1.0).abs() <= 1e-6);
    }

    #[test]
    fn bad_probability_sum() {
        let text = format!("{CLOUD_HEADER}\n0,0,0,0,0,0,6,0,0,0,0,0,0,0.8,0\n");
        assert!(matches!(
            parse_point_cloud(&text, "t"),
            Err(Error::Schema(_))
        ));
    }

    #[test]
    fn malformed_line_reports_number() {
        let text = format!(
            "{CLOUD_HEADER}\n0,0,0,0,0,0,6,0,0,0,0,0,0,1,0\n0,0,zero,0,0,0,6,0,0,0,0,0,0,1,0\n"
        );
        assert!(matches!(
            parse_point_cloud(&text, "t"),
            Err(Error::Parse { line: 3, .. })
        ));
    }

    #[test]
    fn building_json_round_trip() {
        let b =
            BuildingModel::box_building("b", Point3::origin(), Point3::new(10., 8., 6.)).unwrap();
        let text = to_building_json(&b).unwrap();
        assert_eq!(parse_building_json(&text).unwrap(), b);
        let bad = text.replace("RoofSurface", "AtticSurface");
        assert!(matches!(parse_building_json(&bad), Err(Error::Schema(_))));
    }

    #[test]
    fn non_planar_json_polygon() {
        let b =
            BuildingModel::box_building("b", Point3::origin(), Point3::new(10., 8., 6.)).unwrap();
        let mut v = serde_json::to_value(&b).unwrap();
        v["surfaces"][0]["polygon"]["exterior"][2][1] = serde_json::json!(1.0);
        let text = serde_json::to_string(&v).unwrap();
        assert!(
            matches!(
                parse_building_json(&text),
                Err(Error::DegenerateGeometry(_))
            ),
            "{:?}",
            parse_building_json(&text)
        );
    }

    #[test]
    fn texture_orientation() {
        let b =
            BuildingModel::box_building("b", Point3::origin(), Point3::new(0.3, 8., 0.2)).unwrap();
        let f = Facade::new(&b.surfaces[0], 0.1).unwrap();
        let mut layer = TextureLayer::filled(
            &f,
            Cell {
                label: ModelCellLabel::Unknown,
                prob: 0.0,
            },
        );
        *layer.get_mut(0, 0) = Cell {
            label: ModelCellLabel::Confirmed,
            prob: 1.0,
        };
        let pgm = texture_pgm(&layer);
        let header = b"P5\n3 2\n255\n";
        assert_eq!(&pgm[..header.len()], header);
        assert_eq!(&pgm[header.len()..], &[0, 0, 0, 255, 0, 0]);
        assert_eq!(
            texture_label_csv(&layer),
            "unknown,unknown,unknown\nconfirmed,unknown,unknown\n"
        );
    }

    proptest! {
        #[test]
        fn cloud_text_round_trip(
            pts in prop::collection::vec((prop::array::uniform3(-1e4f64..1e4), 0usize..9, prop::array::uniform8(0.0f64..1.0)), 1..20)
        ) {
            let cloud: PointCloud = pts
                .iter()
                .map(|(p, l, w)| {
                    let s: f64 = w.iter().sum::<f64>().max(1e-9);
                    let mut prob = w.map(|x| x / s);
                    if s <= 1e-9 { prob = crate::cloud::one_hot(SemanticLabel::Other); }
                    PointRecord {
                        position: Point3::from(*p),
                        sensor: Point3::origin(),
                        true_label: SemanticLabel::from_id(*l),
                        prob,
                    }
                })
                .collect();
            let text = format_point_cloud(&cloud);
            let back = parse_point_cloud(&text, "t").unwrap();
            prop_assert_eq!(format_point_cloud(&back), text.clone());
            for (a, b) in cloud.iter().zip(back.iter()) {
                prop_assert!((a.position - b.position).norm() <= 1e-6);
            }
        }

        #[test]
        fn mutated_byte_rejected_or_stable(pos in any::<prop::sample::Index>(), byte in prop::sample::select(vec![b',', b'x', b'\n', b'-', b'9'])) {
            let mut bytes = format_point_cloud(&sample()).into_bytes();
            let i = pos.index(bytes.len());
            bytes[i] = byte;
            if let Ok(s) = String::from_utf8(bytes) {
                if let Ok(c) = parse_point_cloud(&s, "t") {
                    let text = format_point_cloud(&c);
                    prop_assert_eq!(format_point_cloud(&parse_point_cloud(&text, "t").unwrap()), text);
                }
            }
        }
    }
}
