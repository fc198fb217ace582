use std::fmt::Write as _;

use super::{fmt_f64, MeshBuilder};
use crate::error::Result;
use crate::geometry::{Point3, TriMesh, Vector3};

struct Element {
    name: String,
    count: usize,
    /// Scalar property names; a list property is recorded as `None`.
    properties: Vec<Option<String>>,
    header_line: usize,
}

/// Parses an ASCII PLY file with a `vertex` element (`x y z`, optionally
/// `nx ny nz`) and an optional `face` element with a `vertex_indices` list.
/// Other elements and properties are skipped.
pub fn parse_ply(text: &str, origin: &str) -> Result<TriMesh> {
    let mut b = MeshBuilder::new(origin);
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    match lines.next() {
        Some((_, "ply")) => {}
        _ => return Err(b.error(1, "missing 'ply' magic line")),
    }
    let mut elements: Vec<Element> = Vec::new();
    let mut ended = false;
    for (n, line) in lines.by_ref() {
        let mut tok = line.split_whitespace();
        match tok.next() {
            Some("format") => {
                if tok.next() != Some("ascii") {
                    return Err(b.error(n, "only ASCII PLY is supported"));
                }
            }
            Some("comment") | Some("obj_info") | None => {}
            Some("element") => {
                let name = tok.next().ok_or_else(|| b.error(n, "element without a name"))?;
                let count = tok
                    .next()
                    .and_then(|c| c.parse().ok())
                    .ok_or_else(|| b.error(n, "element without a valid count"))?;
                elements.push(Element {
                    name: name.to_string(),
                    count,
                    properties: Vec::new(),
                    header_line: n,
                });
            }
            Some("property") => {
                let el = elements.last_mut().ok_or_else(|| b.error(n, "property before any element"))?;
                let kind = tok.next().ok_or_else(|| b.error(n, "property without a type"))?;
                if kind == "list" {
                    let name = tok.nth(2).ok_or_else(|| b.error(n, "list property without a name"))?;
                    if el.name == "face" && name != "vertex_indices" && name != "vertex_index" {
                        return Err(b.error(n, format!("unsupported face list property '{name}'")));
                    }
                    el.properties.push(None);
                } else {
                    let name = tok.next().ok_or_else(|| b.error(n, "property without a name"))?;
                    el.properties.push(Some(name.to_string()));
                }
            }
            Some("end_header") => {
                ended = true;
                break;
            }
            Some(other) => return Err(b.error(n, format!("unexpected header keyword '{other}'"))),
        }
    }
    if !ended {
        return Err(b.error(text.lines().count(), "missing 'end_header'"));
    }
    let vertex = elements
        .iter()
        .position(|e| e.name == "vertex")
        .ok_or_else(|| b.error(1, "no vertex element"))?;
    let find = |name: &str| {
        elements[vertex]
            .properties
            .iter()
            .position(|p| p.as_deref() == Some(name))
    };
    let xyz = [find("x"), find("y"), find("z")];
    let nxyz = [find("nx"), find("ny"), find("nz")];
    let [Some(x), Some(y), Some(z)] = xyz else {
        return Err(b.error(elements[vertex].header_line, "vertex element lacks x, y or z"));
    };
    let has_normals = match nxyz {
        [Some(_), Some(_), Some(_)] => true,
        [None, None, None] => false,
        _ => return Err(b.error(elements[vertex].header_line, "vertex element has only some of nx, ny, nz")),
    };
    if elements[vertex].properties.iter().any(Option::is_none) {
        return Err(b.error(elements[vertex].header_line, "list properties on vertices are not supported"));
    }
    let vertex_count = elements[vertex].count;

    let mut eof_line = text.lines().count();
    for el in &elements {
        for _ in 0..el.count {
            let (n, line) = lines
                .next()
                .ok_or_else(|| b.error(eof_line, format!("file ends before all {} {} entries", el.count, el.name)))?;
            eof_line = n;
            let tokens: Vec<&str> = line.split_whitespace().collect();
            match el.name.as_str() {
                "vertex" => {
                    if tokens.len() != el.properties.len() {
                        return Err(b.error(
                            n,
                            format!("expected {} vertex values, found {}", el.properties.len(), tokens.len()),
                        ));
                    }
                    let mut vals = Vec::with_capacity(tokens.len());
                    for (t, p) in tokens.iter().zip(&el.properties) {
                        vals.push(b.number(n, Some(t), p.as_deref().unwrap_or("value"))?);
                    }
                    b.positions.push(Point3::new(vals[x], vals[y], vals[z]));
                    if has_normals {
                        let nv = Vector3::new(vals[nxyz[0].unwrap()], vals[nxyz[1].unwrap()], vals[nxyz[2].unwrap()]);
                        b.push_normal(n, nv)?;
                    }
                }
                "face" => {
                    let mut tok = tokens.iter().copied();
                    let mut poly = Vec::new();
                    for p in &el.properties {
                        match p {
                            None => {
                                let count = b.number(n, tok.next(), "face vertex count")?;
                                if count < 0.0 || count.fract() != 0.0 {
                                    return Err(b.error(n, "face vertex count must be a nonnegative integer"));
                                }
                                for _ in 0..count as usize {
                                    poly.push(b.index(n, tok.next(), vertex_count)?);
                                }
                            }
                            Some(name) => {
                                b.number(n, tok.next(), name)?;
                            }
                        }
                    }
                    if tok.next().is_some() {
                        return Err(b.error(n, "extra values after face"));
                    }
                    b.push_polygon(n, &poly)?;
                }
                _ => {}
            }
        }
    }
    b.finish(has_normals)
}

/// ASCII PLY with normals when the vertices carry them.
pub fn write_ply_string(mesh: &TriMesh) -> String {
    let normals = mesh.vertices.normals.as_ref();
    let mut s = String::new();
    s.push_str("ply\nformat ascii 1.0\n");
    let _ = writeln!(s, "element vertex {}", mesh.vertex_count());
    s.push_str("property float x\nproperty float y\nproperty float z\n");
    if normals.is_some() {
        s.push_str("property float nx\nproperty float ny\nproperty float nz\n");
    }
    if !mesh.faces.is_empty() {
        let _ = writeln!(s, "element face {}", mesh.faces.len());
        s.push_str("property list uchar int vertex_indices\n");
    }
    s.push_str("end_header\n");
    for (i, p) in mesh.positions().iter().enumerate() {
        let _ = write!(s, "{} {} {}", fmt_f64(p.x), fmt_f64(p.y), fmt_f64(p.z));
        if let Some(n) = normals {
            let n = n[i];
            let _ = write!(s, " {} {} {}", fmt_f64(n.x), fmt_f64(n.y), fmt_f64(n.z));
        }
        s.push('\n');
    }
    for f in &mesh.faces {
        let _ = writeln!(s, "3 {} {} {}", f[0], f[1], f[2]);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::synthdata::shapes::unit_cube;

    fn line_of(r: Result<TriMesh>) -> usize {
        match r {
            Err(Error::Format { line, .. }) => line,
            other => panic!("expected a format error, got {other:?}"),
        }
    }

    #[test]
    fn round_trip_preserves_every_bit() {
        let mut m = unit_cube();
        m.vertices.positions[3].x = 0.1 + 0.2;
        m.vertices.positions[5].z = -1.0e-17;
        let back = parse_ply(&write_ply_string(&m), "t").unwrap();
        assert_eq!(back, m);
        let m = m.with_vertex_normals();
        assert_eq!(parse_ply(&write_ply_string(&m), "t").unwrap(), m);
    }

    #[test]
    fn reads_foreign_layouts() {
        let text = "ply\nformat ascii 1.0\ncomment made elsewhere\nelement vertex 4\nproperty float nx\nproperty float ny\nproperty float nz\nproperty float z\nproperty float y\nproperty float x\nproperty uchar red\nelement face 1\nproperty list uchar int vertex_index\nelement edge 0\nproperty int a\nend_header\n0 0 2 0 0 0 9\n0 0 1 0 0 1 9\n0 0 1 0 1 1 9\n0 0 1 0 1 0 9\n4 0 1 2 3\n";
        let m = parse_ply(text, "t").unwrap();
        assert_eq!(m.positions()[1], Point3::new(1.0, 0.0, 0.0));
        assert_eq!(m.vertices.normals.as_ref().unwrap()[0], Vector3::z());
        assert_eq!(m.faces, vec![[0, 1, 2], [0, 2, 3]]);
    }

    #[test]
    fn point_clouds_have_no_faces() {
        let text = "ply\nformat ascii 1.0\nelement vertex 2\nproperty float x\nproperty float y\nproperty float z\nend_header\n1 2 3\n4 5 6\n";
        let m = parse_ply(text, "t").unwrap();
        assert_eq!(m.vertex_count(), 2);
        assert!(m.faces.is_empty());
        assert!(m.vertices.normals.is_none());
    }

    #[test]
    fn diagnostics_point_at_the_bad_line() {
        let head = "ply\nformat ascii 1.0\nelement vertex 3\nproperty float x\nproperty float y\nproperty float z\nelement face 1\nproperty list uchar int vertex_indices\nend_header\n";
        let ok = format!("{head}0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n");
        assert!(parse_ply(&ok, "t").is_ok());
        assert_eq!(line_of(parse_ply(&format!("{head}0 0 0\nnan 0 0\n0 1 0\n3 0 1 2\n"), "t")), 11);
        assert_eq!(line_of(parse_ply(&format!("{head}0 0 0\n1 0 inf\n0 1 0\n3 0 1 2\n"), "t")), 11);
        assert_eq!(line_of(parse_ply(&format!("{head}0 0 0\n1 0 0\n0 1 0\n3 0 1 3\n"), "t")), 13);
        assert_eq!(line_of(parse_ply(&format!("{head}0 0 0\n1 0 0\n0 1 0\n3 0 1 -1\n"), "t")), 13);
        assert_eq!(line_of(parse_ply(&format!("{head}0 0 0\n1 0\n0 1 0\n3 0 1 2\n"), "t")), 11);
        assert_eq!(line_of(parse_ply(&format!("{head}0 0 0\n1 0 0\n"), "t")), 11);
        assert_eq!(line_of(parse_ply("plx\n", "t")), 1);
        assert_eq!(line_of(parse_ply("ply\nformat binary_little_endian 1.0\n", "t")), 2);
    }
}
