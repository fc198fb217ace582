use std::fmt::Write as _;

use super::{fmt_f64, MeshBuilder};
use crate::error::Result;
use crate::geometry::{Point3, TriMesh};

/// Parses an OFF file: `OFF`, a counts line `V F E`, `V` vertex lines, then
/// `F` polygon lines. `#` starts a comment.
pub fn parse_off(text: &str, origin: &str) -> Result<TriMesh> {
    let mut b = MeshBuilder::new(origin);
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (n, first) = lines.next().ok_or_else(|| b.error(1, "empty file"))?;
    let rest = first
        .strip_prefix("OFF")
        .ok_or_else(|| b.error(n, "missing 'OFF' header"))?
        .trim();
    let (n, counts) = if rest.is_empty() {
        lines.next().ok_or_else(|| b.error(n, "missing counts line"))?
    } else {
        (n, rest)
    };
    let mut tok = counts.split_whitespace();
    let mut count = |what: &str| -> Result<usize> {
        tok.next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| b.error(n, format!("missing or invalid {what} count")))
    };
    let (nv, nf) = (count("vertex")?, count("face")?);
    let mut last = n;
    for _ in 0..nv {
        let (n, line) = lines
            .next()
            .ok_or_else(|| b.error(last, format!("file ends before all {nv} vertices")))?;
        last = n;
        let mut t = line.split_whitespace();
        let x = b.number(n, t.next(), "x")?;
        let y = b.number(n, t.next(), "y")?;
        let z = b.number(n, t.next(), "z")?;
        if t.next().is_some() {
            return Err(b.error(n, "extra values after vertex coordinates"));
        }
        b.positions.push(Point3::new(x, y, z));
    }
    for _ in 0..nf {
        let (n, line) = lines
            .next()
            .ok_or_else(|| b.error(last, format!("file ends before all {nf} faces")))?;
        last = n;
        let mut t = line.split_whitespace();
        let k = b.number(n, t.next(), "face vertex count")?;
        if k < 0.0 || k.fract() != 0.0 {
            return Err(b.error(n, "face vertex count must be a nonnegative integer"));
        }
        let poly = (0..k as usize)
            .map(|_| b.index(n, t.next(), nv))
            .collect::<Result<Vec<_>>>()?;
        // Trailing per-face colour values are allowed.
        b.push_polygon(n, &poly)?;
    }
    b.finish(false)
}

/// OFF text. Normals are not representable and are dropped.
pub fn write_off_string(mesh: &TriMesh) -> String {
    let mut s = String::from("OFF\n");
    let _ = writeln!(s, "{} {} 0", mesh.vertex_count(), mesh.faces.len());
    for p in mesh.positions() {
        let _ = writeln!(s, "{} {} {}", fmt_f64(p.x), fmt_f64(p.y), fmt_f64(p.z));
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
    use crate::synthdata::shapes::icosphere;

    #[test]
    fn round_trip() {
        let m = icosphere(2);
        assert_eq!(parse_off(&write_off_string(&m), "t").unwrap(), m);
    }

    #[test]
    fn inline_counts_comments_and_quads() {
        let m = parse_off("OFF 4 1 0\n# square\n0 0 0\n1 0 0\n1 1 0 # corner\n0 1 0\n4 0 1 2 3 255 0 0\n", "t").unwrap();
        assert_eq!(m.faces, vec![[0, 1, 2], [0, 2, 3]]);
    }

    #[test]
    fn diagnostics() {
        let line = |t: &str| match parse_off(t, "t") {
            Err(Error::Format { line, .. }) => line,
            other => panic!("{other:?}"),
        };
        assert_eq!(line("OFF\n3 1 0\n0 0 0\n1 NaN 0\n0 1 0\n3 0 1 2\n"), 4);
        assert_eq!(line("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 7\n"), 6);
        assert_eq!(line("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 1\n"), 6);
        assert_eq!(line("OFF\n3 1 0\n0 0 0\n1 0 0\n"), 4);
        assert_eq!(line("COFF\n"), 1);
    }
}
