//! ASCII PLY and OFF meshes, correspondence CSV and atomic file writes.

pub mod manifest;
mod off;
mod ply;

use std::path::Path;

pub use off::{parse_off, write_off_string};
pub use ply::{parse_ply, write_ply_string};

use crate::error::{Error, Result};
use crate::geometry::{Correspondence, Point3, PointCloud, TriMesh, Vector3};

/// Writes through a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| Error::invalid(format!("{} is not a file path", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    std::fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        Error::io(path, e)
    })
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

enum MeshFormat {
    Ply,
    Off,
}

fn format_of(path: &Path) -> Result<MeshFormat> {
    match path.extension().and_then(|e| e.to_str()).map(|e| e.to_ascii_lowercase()) {
        Some(e) if e == "ply" => Ok(MeshFormat::Ply),
        Some(e) if e == "off" => Ok(MeshFormat::Off),
        _ => Err(Error::invalid(format!(
            "{}: unknown mesh extension (expected .ply or .off)",
            path.display()
        ))),
    }
}

/// Reads a mesh or point cloud (a mesh with no faces), choosing the format by
/// file extension.
pub fn read_mesh(path: &Path) -> Result<TriMesh> {
    let format = format_of(path)?;
    let text = read_text(path)?;
    let origin = path.display().to_string();
    match format {
        MeshFormat::Ply => parse_ply(&text, &origin),
        MeshFormat::Off => parse_off(&text, &origin),
    }
}

pub fn write_mesh(path: &Path, mesh: &TriMesh) -> Result<()> {
    let text = match format_of(path)? {
        MeshFormat::Ply => write_ply_string(mesh),
        MeshFormat::Off => write_off_string(mesh),
    };
    write_atomic(path, text.as_bytes())
}

pub fn write_point_cloud(path: &Path, cloud: &PointCloud) -> Result<()> {
    write_mesh(
        path,
        &TriMesh {
            vertices: cloud.clone(),
            faces: Vec::new(),
        },
    )
}

pub fn correspondence_csv(map: &Correspondence) -> String {
    let mut s = String::from("part_index,full_index\n");
    for (i, j) in map.target_indices.iter().enumerate() {
        s.push_str(&format!("{i},{j}\n"));
    }
    s
}

/// Parses `part_index,full_index` rows; part indices must be `0..n` in order.
pub fn parse_correspondence_csv(text: &str, origin: &str, full_size: usize) -> Result<Correspondence> {
    let err = |line: usize, message: String| Error::Format {
        path: origin.to_string(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == "part_index,full_index" => {}
        _ => return Err(err(1, "expected header 'part_index,full_index'".into())),
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (a, b) = line
            .split_once(',')
            .ok_or_else(|| err(i + 1, "expected two comma-separated indices".into()))?;
        let a: usize = a.trim().parse().map_err(|e| err(i + 1, format!("bad part index: {e}")))?;
        let b: usize = b.trim().parse().map_err(|e| err(i + 1, format!("bad full index: {e}")))?;
        if a != out.len() {
            return Err(err(i + 1, format!("expected part index {}, found {a}", out.len())));
        }
        if b >= full_size {
            return Err(err(i + 1, format!("full index {b} out of range for {full_size} vertices")));
        }
        out.push(b);
    }
    Ok(Correspondence { target_indices: out })
}

/// Shared validation for parsed vertex data.
pub(crate) struct MeshBuilder<'a> {
    pub origin: &'a str,
    pub positions: Vec<Point3>,
    pub normals: Vec<Vector3>,
    pub faces: Vec<[usize; 3]>,
}

impl<'a> MeshBuilder<'a> {
    pub fn new(origin: &'a str) -> Self {
        MeshBuilder {
            origin,
            positions: Vec::new(),
            normals: Vec::new(),
            faces: Vec::new(),
        }
    }

    pub fn error(&self, line: usize, message: impl Into<String>) -> Error {
        Error::Format {
            path: self.origin.to_string(),
            line,
            message: message.into(),
        }
    }

    pub fn number(&self, line: usize, token: Option<&str>, what: &str) -> Result<f64> {
        let t = token.ok_or_else(|| self.error(line, format!("missing {what}")))?;
        let v: f64 = t
            .parse()
            .map_err(|_| self.error(line, format!("cannot parse {what} '{t}' as a number")))?;
        if !v.is_finite() {
            return Err(self.error(line, format!("{what} is not finite ({t})")));
        }
        Ok(v)
    }

    pub fn index(&self, line: usize, token: Option<&str>, vertex_count: usize) -> Result<usize> {
        let t = token.ok_or_else(|| self.error(line, "face is missing a vertex index"))?;
        let i: i64 = t
            .parse()
            .map_err(|_| self.error(line, format!("cannot parse vertex index '{t}'")))?;
        if i < 0 || i as usize >= vertex_count {
            return Err(self.error(line, format!("vertex index {i} out of range for {vertex_count} vertices")));
        }
        Ok(i as usize)
    }

    pub fn push_normal(&mut self, line: usize, n: Vector3) -> Result<()> {
        let len = n.norm();
        if !(len > 1e-12) {
            return Err(self.error(line, "normal has zero length"));
        }
        // Already-unit normals are kept verbatim so files round-trip exactly.
        self.normals.push(if (len - 1.0).abs() <= 1e-9 { n } else { n / len });
        Ok(())
    }

    /// Adds a polygon, fan-triangulated.
    pub fn push_polygon(&mut self, line: usize, poly: &[usize]) -> Result<()> {
        if poly.len() < 3 {
            return Err(self.error(line, format!("face has {} vertices; at least 3 are needed", poly.len())));
        }
        for k in 1..poly.len() - 1 {
            let f = [poly[0], poly[k], poly[k + 1]];
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(self.error(line, "face repeats a vertex"));
            }
            self.faces.push(f);
        }
        Ok(())
    }

    pub fn finish(self, has_normals: bool) -> Result<TriMesh> {
        let vertices = if has_normals {
            PointCloud::with_normals(self.positions, self.normals)?
        } else {
            PointCloud::new(self.positions)
        };
        Ok(TriMesh {
            vertices,
            faces: self.faces,
        })
    }
}

/// Shortest decimal form that parses back to the same `f64`.
pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthdata::shapes::icosphere;

    #[test]
    fn correspondence_csv_round_trip() {
        let map = Correspondence {
            target_indices: vec![4, 0, 2],
        };
        let text = correspondence_csv(&map);
        assert!(text.starts_with("part_index,full_index\n0,4\n"));
        assert_eq!(parse_correspondence_csv(&text, "c", 5).unwrap(), map);
        assert!(matches!(
            parse_correspondence_csv(&text, "c", 4),
            Err(Error::Format { line: 2, .. })
        ));
    }

    #[test]
    fn files_round_trip_by_extension() {
        let dir = tempfile::tempdir().unwrap();
        let mesh = icosphere(1).with_vertex_normals();
        let ply = dir.path().join("a.ply");
        write_mesh(&ply, &mesh).unwrap();
        assert_eq!(read_mesh(&ply).unwrap(), mesh);
        let off = dir.path().join("a.OFF");
        write_mesh(&off, &mesh).unwrap();
        let back = read_mesh(&off).unwrap();
        assert_eq!(back.positions(), mesh.positions());
        assert_eq!(back.faces, mesh.faces);
        assert!(read_mesh(&dir.path().join("a.obj")).is_err());
        assert!(matches!(read_mesh(&dir.path().join("missing.ply")), Err(Error::Io { .. })));
    }
}
