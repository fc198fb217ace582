//! Reading and writing ASCII PLY / OFF meshes and correspondence CSV files,
//! including the positional diagnostics for malformed input.
//!
//! ```text
//! cargo run --release --example file_formats
//! ```

use partwhole::formats::{correspondence_csv, parse_correspondence_csv, parse_off, parse_ply, write_off_string, write_ply_string};
use partwhole::geometry::Correspondence;
use partwhole::synthdata::shapes::unit_cube;

fn main() -> partwhole::Result<()> {
    let cube = unit_cube().with_vertex_normals();
    let ply = write_ply_string(&cube);
    println!("{}", ply.lines().take(12).collect::<Vec<_>>().join("\n"));
    let back = parse_ply(&ply, "cube.ply")?;
    println!("PLY round trip keeps vertices: {}", back.vertices.positions == cube.vertices.positions);

    let off = write_off_string(&cube);
    let back = parse_off(&off, "cube.off")?;
    println!("OFF round trip: {} vertices, {} faces", back.vertex_count(), back.faces.len());

    // Quads are split into triangles.
    let quad = "OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n";
    println!("quad becomes {} triangles", parse_off(quad, "quad.off")?.faces.len());

    for (name, text) in [
        ("nan.off", "OFF\n1 0 0\n0 nan 0\n"),
        ("range.off", "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 7\n"),
        ("short.ply", "ply\nformat ascii 1.0\nelement vertex 2\nproperty float x\nproperty float y\nproperty float z\nend_header\n0 0 0\n"),
    ] {
        let err = if name.ends_with(".ply") { parse_ply(text, name) } else { parse_off(text, name) };
        println!("{name}: {}", err.unwrap_err());
    }

    let map = Correspondence::new(vec![3, 0, 2], 8)?;
    let csv = correspondence_csv(&map);
    print!("{csv}");
    println!("parsed back: {:?}", parse_correspondence_csv(&csv, "map.csv", 8)?.target_indices);
    Ok(())
}
