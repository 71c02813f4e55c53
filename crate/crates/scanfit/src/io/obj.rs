use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::Point3;

use super::IoError;
use crate::geometry::TriMesh;

/// Reads a Wavefront OBJ mesh: `v` and `f` directives only, with polygons
/// fan-triangulated and negative (relative) indices resolved. Texture and
/// normal references (`f v/vt/vn`) are accepted and discarded.
pub fn read_obj(path: &Path) -> Result<TriMesh, IoError> {
    let file = File::open(path).map_err(|e| IoError::file(path, e))?;
    let reader = BufReader::new(file);
    let mut vertices: Vec<Point3<f64>> = Vec::new();
    let mut faces: Vec<[u32; 3]> = Vec::new();

    for (ln, line) in reader.lines().enumerate() {
        let line_no = ln + 1;
        let line = line.map_err(|e| IoError::file(path, e))?;
        let mut words = line.split_whitespace();
        match words.next() {
            Some("v") => {
                let mut coord = [0.0f64; 3];
                for (k, slot) in coord.iter_mut().enumerate() {
                    let w = words.next().ok_or_else(|| {
                        IoError::parse(path, line_no, format!("vertex missing coordinate {k}"))
                    })?;
                    *slot = w.parse().map_err(|_| {
                        IoError::parse(path, line_no, format!("bad coordinate '{w}'"))
                    })?;
                }
                vertices.push(Point3::new(coord[0], coord[1], coord[2]));
            }
            Some("f") => {
                let mut idx: Vec<u32> = Vec::with_capacity(4);
                for w in words {
                    let first = w.split('/').next().unwrap_or("");
                    let raw: i64 = first.parse().map_err(|_| {
                        IoError::parse(path, line_no, format!("bad face index '{w}'"))
                    })?;
                    let resolved = if raw > 0 {
                        raw - 1
                    } else if raw < 0 {
                        vertices.len() as i64 + raw
                    } else {
                        return Err(IoError::parse(path, line_no, "face index 0 is invalid"));
                    };
                    if resolved < 0 || resolved >= vertices.len() as i64 {
                        return Err(IoError::parse(
                            path,
                            line_no,
                            format!("face index {raw} out of range"),
                        ));
                    }
                    idx.push(resolved as u32);
                }
                if idx.len() < 3 {
                    return Err(IoError::parse(path, line_no, "face with <3 vertices"));
                }
                for k in 1..idx.len() - 1 {
                    faces.push([idx[0], idx[k], idx[k + 1]]);
                }
            }
            _ => {} // comments, groups, materials, normals, uvs: ignored
        }
    }
    Ok(TriMesh::new(vertices, faces)?)
}

/// Writes a mesh as Wavefront OBJ (positions and triangles only).
pub fn write_obj(path: &Path, mesh: &TriMesh) -> Result<(), IoError> {
    let file = File::create(path).map_err(|e| IoError::file(path, e))?;
    let mut w = BufWriter::new(file);
    for v in &mesh.vertices {
        writeln!(w, "v {} {} {}", v.x, v.y, v.z).map_err(|e| IoError::file(path, e))?;
    }
    for f in &mesh.faces {
        writeln!(w, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1)
            .map_err(|e| IoError::file(path, e))?;
    }
    w.flush().map_err(|e| IoError::file(path, e))
}
