//! Reader and writer for a small CityGML subset: one Building, its
//! boundary surfaces as polygons, and window/door openings as solids.
//! Namespaces are written but not checked on input; elements are matched by
//! local name.

use std::fmt::Write as _;
use std::path::Path;

use quick_xml::events::{BytesStart, Event};
use quick_xml::{Reader, XmlVersion};

use crate::building::{BuildingModel, OpeningKind, OpeningSolid, Surface, SurfaceType, Triangle};
use crate::error::{Error, Result};
use crate::geometry::{PlanarPolygon, Point3};

fn pos_list(points: impl IntoIterator<Item = Point3>) -> String {
    let mut s = String::new();
    for p in points {
        if !s.is_empty() {
            s.push(' ');
        }
        let _ = write!(s, "{} {} {}", p.x, p.y, p.z);
    }
    s
}

fn closed(ring: &[Point3]) -> Vec<Point3> {
    let mut v = ring.to_vec();
    if let Some(first) = ring.first() {
        v.push(*first);
    }
    v
}

fn escape(s: &str) -> std::borrow::Cow<'_, str> {
    quick_xml::escape::escape(s)
}

fn write_ring(s: &mut String, indent: &str, tag: &str, ring: &[Point3]) {
    let _ = writeln!(
        s,
        "{indent}<gml:{tag}><gml:LinearRing><gml:posList srsDimension=\"3\">{}</gml:posList></gml:LinearRing></gml:{tag}>",
        pos_list(closed(ring))
    );
}

fn write_attr(s: &mut String, indent: &str, kind: &str, name: &str, value: &str) {
    let _ = writeln!(
        s,
        "{indent}<gen:{kind} name=\"{name}\"><gen:value>{}</gen:value></gen:{kind}>",
        escape(value)
    );
}

pub fn to_citygml_subset(model: &BuildingModel) -> String {
    let lod = if model.lod == 3 { "lod3" } else { "lod2" };
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    s.push_str(concat!(
        "<core:CityModel xmlns:core=\"http://www.opengis.net/citygml/2.0\"",
        " xmlns:bldg=\"http://www.opengis.net/citygml/building/2.0\"",
        " xmlns:gen=\"http://www.opengis.net/citygml/generics/2.0\"",
        " xmlns:gml=\"http://www.opengis.net/gml\">\n"
    ));
    s.push_str(" <core:cityObjectMember>\n");
    let _ = writeln!(s, "  <bldg:Building gml:id=\"{}\">", escape(&model.id));
    for surf in &model.surfaces {
        let _ = writeln!(
            s,
            "   <bldg:boundedBy>\n    <bldg:{} gml:id=\"{}\">",
            surf.kind.name(),
            escape(&surf.id)
        );
        let _ = writeln!(
            s,
            "     <bldg:{lod}MultiSurface><gml:MultiSurface><gml:surfaceMember><gml:Polygon>"
        );
        write_ring(&mut s, "      ", "exterior", surf.polygon.exterior());
        for h in surf.polygon.holes() {
            write_ring(&mut s, "      ", "interior", h);
        }
        let _ = writeln!(
            s,
            "     </gml:Polygon></gml:surfaceMember></gml:MultiSurface></bldg:{lod}MultiSurface>"
        );
        for o in model.openings.iter().filter(|o| o.parent == surf.id) {
            let kind = o.kind.name();
            let _ = writeln!(
                s,
                "     <bldg:opening>\n      <bldg:{kind} gml:id=\"{}\">",
                escape(&o.id)
            );
            let ind = "       ";
            write_attr(
                &mut s,
                ind,
                "stringAttribute",
                "library_entry",
                &o.library_entry,
            );
            for (name, v) in [
                ("anchor_x", o.anchor.x),
                ("anchor_y", o.anchor.y),
                ("anchor_z", o.anchor.z),
                ("width", o.width),
                ("height", o.height),
                ("depth", o.depth),
            ] {
                write_attr(&mut s, ind, "doubleAttribute", name, &v.to_string());
            }
            let _ = writeln!(
                s,
                "{ind}<bldg:lod3Solid><gml:Solid><gml:exterior><gml:CompositeSurface>"
            );
            for t in &o.triangles {
                let _ = writeln!(
                    s,
                    "{ind} <gml:surfaceMember><gml:Polygon><gml:exterior><gml:LinearRing><gml:posList srsDimension=\"3\">{}</gml:posList></gml:LinearRing></gml:exterior></gml:Polygon></gml:surfaceMember>",
                    pos_list(closed(t))
                );
            }
            let _ = writeln!(
                s,
                "{ind}</gml:CompositeSurface></gml:exterior></gml:Solid></bldg:lod3Solid>"
            );
            let _ = writeln!(s, "      </bldg:{kind}>\n     </bldg:opening>");
        }
        let _ = writeln!(s, "    </bldg:{}>\n   </bldg:boundedBy>", surf.kind.name());
    }
    s.push_str("  </bldg:Building>\n </core:cityObjectMember>\n</core:CityModel>\n");
    s
}

pub fn write_citygml_subset(model: &BuildingModel, path: &Path) -> Result<()> {
    std::fs::write(path, to_citygml_subset(model)).map_err(|e| Error::io(path, e))
}

pub fn read_citygml_subset(path: &Path) -> Result<BuildingModel> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_citygml_subset(&text, &path.display().to_string())
}

#[derive(Default)]
struct SurfaceDraft {
    id: String,
    kind: Option<SurfaceType>,
    exterior: Option<Vec<Point3>>,
    holes: Vec<Vec<Point3>>,
}

#[derive(Default)]
struct OpeningDraft {
    id: String,
    kind: Option<OpeningKind>,
    library_entry: Option<String>,
    numbers: Vec<(String, f64)>,
    triangles: Vec<Triangle>,
}

fn gml_id(e: &BytesStart<'_>) -> Result<Option<String>> {
    for a in e.attributes() {
        let a = a.map_err(|err| Error::Schema(err.to_string()))?;
        if a.key.local_name().as_ref() == "id" {
            let v = a
                .normalized_value(XmlVersion::Implicit1_0)
                .map_err(|err| Error::Schema(err.to_string()))?;
            return Ok(Some(v.into_owned()));
        }
    }
    Ok(None)
}

fn name_attr(e: &BytesStart<'_>) -> Option<String> {
    e.attributes()
        .flatten()
        .find(|a| a.key.local_name().as_ref() == "name")
        .and_then(|a| {
            a.normalized_value(XmlVersion::Implicit1_0)
                .ok()
                .map(|v| v.into_owned())
        })
}

fn entity(name: &str) -> Option<char> {
    Some(match name {
        "amp" => '&',
        "lt" => '<',
        "gt" => '>',
        "quot" => '"',
        "apos" => '\'',
        _ => return None,
    })
}

pub fn parse_citygml_subset(text: &str, source: &str) -> Result<BuildingModel> {
    let line_of = |pos: u64| {
        text.as_bytes()[..(pos as usize).min(text.len())]
            .iter()
            .filter(|&&b| b == b'\n')
            .count()
            + 1
    };
    let mut reader = Reader::from_str(text);
    let mut stack: Vec<String> = Vec::new();
    let mut building: Option<String> = None;
    let mut buildings = 0usize;
    let mut lod3 = false;
    let mut surfaces: Vec<Surface> = Vec::new();
    let mut openings: Vec<OpeningSolid> = Vec::new();
    let mut surface: Option<SurfaceDraft> = None;
    let mut opening: Option<OpeningDraft> = None;
    let mut attr_name: Option<String> = None;
    let mut text_buf = String::new();

    loop {
        let pos = reader.buffer_position();
        let event = reader
            .read_event()
            .map_err(|e| Error::parse(source, line_of(pos), e.to_string()))?;
        match event {
            Event::Start(e) => {
                let name = e.local_name().as_ref().to_owned();
                text_buf.clear();
                let in_building = buildings == 1;
                match name.as_str() {
                    "Building" => {
                        buildings += 1;
                        if buildings == 1 {
                            building = Some(gml_id(&e)?.unwrap_or_default());
                        }
                    }
                    "WallSurface" | "RoofSurface" | "GroundSurface"
                        if in_building && opening.is_none() =>
                    {
                        let kind = SurfaceType::from_name(&name);
                        surface = Some(SurfaceDraft {
                            id: gml_id(&e)?.unwrap_or_default(),
                            kind,
                            ..Default::default()
                        });
                    }
                    "Window" | "Door" if in_building && surface.is_some() => {
                        opening = Some(OpeningDraft {
                            id: gml_id(&e)?.unwrap_or_default(),
                            kind: OpeningKind::from_name(&name),
                            ..Default::default()
                        });
                    }
                    "lod3MultiSurface" | "lod3Solid" => lod3 = true,
                    "stringAttribute" | "doubleAttribute" => attr_name = name_attr(&e),
                    _ => {}
                }
                stack.push(name);
            }
            Event::Text(t) => text_buf.push_str(&t.xml10_content()),
            Event::GeneralRef(r) => {
                let c = match r.resolve_char_ref() {
                    Ok(Some(c)) => Some(c),
                    _ => entity(r.as_ref()),
                };
                text_buf.extend(c);
            }
            Event::End(e) => {
                let name = e.local_name().as_ref().to_owned();
                stack.pop();
                match name.as_str() {
                    "posList" if buildings == 1 && (surface.is_some() || opening.is_some()) => {
                        let ring = parse_ring(&text_buf)
                            .map_err(|m| Error::parse(source, line_of(pos), m))?;
                        if let Some(o) = opening.as_mut() {
                            if ring.len() != 3 {
                                return Err(Error::parse(
                                    source,
                                    line_of(pos),
                                    "opening solids must be triangulated",
                                ));
                            }
                            o.triangles.push([ring[0], ring[1], ring[2]]);
                        } else if let Some(s) = surface.as_mut() {
                            if stack.iter().any(|n| n == "interior") {
                                s.holes.push(ring);
                            } else if s.exterior.is_none() {
                                s.exterior = Some(ring);
                            } else {
                                return Err(Error::Schema(format!(
                                    "surface `{}` has more than one polygon",
                                    s.id
                                )));
                            }
                        }
                    }
                    "value" => {
                        if let (Some(o), Some(n)) = (opening.as_mut(), attr_name.as_ref()) {
                            if n == "library_entry" {
                                o.library_entry = Some(text_buf.clone());
                            } else {
                                let v: f64 = text_buf.trim().parse().map_err(|_| {
                                    Error::parse(
                                        source,
                                        line_of(pos),
                                        format!("attribute `{n}` is not a number"),
                                    )
                                })?;
                                o.numbers.push((n.clone(), v));
                            }
                        }
                    }
                    "stringAttribute" | "doubleAttribute" => attr_name = None,
                    "Window" | "Door" if opening.is_some() => {
                        let o = opening.take().expect("open opening");
                        let parent = surface.as_ref().map(|s| s.id.clone()).unwrap_or_default();
                        openings.push(finish_opening(o, parent)?);
                    }
                    "WallSurface" | "RoofSurface" | "GroundSurface"
                        if surface.is_some() && opening.is_none() =>
                    {
                        let s = surface.take().expect("open surface");
                        let kind = s.kind.ok_or_else(|| {
                            Error::Schema(format!("unknown surface type for `{}`", s.id))
                        })?;
                        let exterior = s.exterior.ok_or_else(|| {
                            Error::Schema(format!("surface `{}` has no polygon", s.id))
                        })?;
                        surfaces.push(Surface {
                            id: s.id,
                            kind,
                            polygon: PlanarPolygon::new(exterior, s.holes)?,
                        });
                    }
                    _ => {}
                }
                text_buf.clear();
            }
            Event::Eof => break,
            _ => {}
        }
    }
    let id = building.ok_or_else(|| Error::Schema("no Building element".into()))?;
    if buildings > 1 {
        log::warn!("{source}: {buildings} buildings found, reading the first");
    }
    let model = BuildingModel {
        id,
        lod: if lod3 || !openings.is_empty() { 3 } else { 2 },
        surfaces,
        openings,
    };
    model.validate()?;
    Ok(model)
}

fn parse_ring(text: &str) -> std::result::Result<Vec<Point3>, String> {
    let nums = text
        .split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| format!("bad coordinate `{t}`"))
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    if nums.len() % 3 != 0 {
        return Err(format!("{} coordinates do not form 3D tuples", nums.len()));
    }
    let mut pts: Vec<Point3> = nums
        .chunks(3)
        .map(|c| Point3::new(c[0], c[1], c[2]))
        .collect();
    if pts.len() < 4 || pts.first() != pts.last() {
        return Err("ring is not closed".into());
    }
    pts.pop();
    Ok(pts)
}

fn finish_opening(o: OpeningDraft, parent: String) -> Result<OpeningSolid> {
    let get = |n: &str| {
        o.numbers
            .iter()
            .find(|(k, _)| k == n)
            .map(|(_, v)| *v)
            .ok_or_else(|| Error::Schema(format!("opening `{}` lacks attribute `{n}`", o.id)))
    };
    Ok(OpeningSolid {
        kind: o
            .kind
            .ok_or_else(|| Error::Schema(format!("opening `{}` has no kind", o.id)))?,
        library_entry: o.library_entry.clone().unwrap_or_default(),
        anchor: Point3::new(get("anchor_x")?, get("anchor_y")?, get("anchor_z")?),
        width: get("width")?,
        height: get("height")?,
        depth: get("depth")?,
        triangles: o.triangles.clone(),
        id: o.id.clone(),
        parent,
    })
}
