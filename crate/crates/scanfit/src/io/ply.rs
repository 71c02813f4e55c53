use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::Point3;

use super::IoError;
use crate::geometry::TriMesh;

/// A mesh plus optional per-vertex instance labels (as stored in the PLY
/// vertex property `instance_id`).
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledMesh {
    pub mesh: TriMesh,
    pub labels: Option<Vec<i32>>,
}

impl LabeledMesh {
    pub fn unlabeled(mesh: TriMesh) -> Self {
        Self { mesh, labels: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlyFormat {
    Ascii,
    BinaryLittleEndian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Scalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Scalar {
    fn parse(word: &str) -> Option<Scalar> {
        Some(match word {
            "char" | "int8" => Scalar::I8,
            "uchar" | "uint8" => Scalar::U8,
            "short" | "int16" => Scalar::I16,
            "ushort" | "uint16" => Scalar::U16,
            "int" | "int32" => Scalar::I32,
            "uint" | "uint32" => Scalar::U32,
            "float" | "float32" => Scalar::F32,
            "double" | "float64" => Scalar::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Scalar::I8 | Scalar::U8 => 1,
            Scalar::I16 | Scalar::U16 => 2,
            Scalar::I32 | Scalar::U32 | Scalar::F32 => 4,
            Scalar::F64 => 8,
        }
    }

    fn read_f64(self, bytes: &[u8]) -> f64 {
        match self {
            Scalar::I8 => bytes[0] as i8 as f64,
            Scalar::U8 => bytes[0] as f64,
            Scalar::I16 => i16::from_le_bytes([bytes[0], bytes[1]]) as f64,
            Scalar::U16 => u16::from_le_bytes([bytes[0], bytes[1]]) as f64,
            Scalar::I32 => i32::from_le_bytes(bytes[..4].try_into().unwrap()) as f64,
            Scalar::U32 => u32::from_le_bytes(bytes[..4].try_into().unwrap()) as f64,
            Scalar::F32 => f32::from_le_bytes(bytes[..4].try_into().unwrap()) as f64,
            Scalar::F64 => f64::from_le_bytes(bytes[..8].try_into().unwrap()),
        }
    }
}

#[derive(Debug)]
enum Property {
    Scalar { name: String, kind: Scalar },
    List { count: Scalar, item: Scalar },
}

#[derive(Debug)]
struct Element {
    name: String,
    count: usize,
    properties: Vec<Property>,
}

fn read_header_line(
    r: &mut BufReader<File>,
    path: &Path,
    line_no: &mut usize,
) -> Result<String, IoError> {
    let mut buf = Vec::new();
    let n = r.read_until(b'\n', &mut buf).map_err(|e| IoError::file(path, e))?;
    if n == 0 {
        return Err(IoError::parse(path, *line_no, "unexpected end of header"));
    }
    *line_no += 1;
    Ok(String::from_utf8_lossy(&buf).trim_end().to_string())
}

/// Reads an ASCII or binary little-endian PLY mesh. Vertex coordinates may
/// be float or double; an integer vertex property named `instance_id` is
/// returned as labels; any other vertex properties are skipped. Polygonal
/// faces are fan-triangulated.
pub fn read_ply(path: &Path) -> Result<LabeledMesh, IoError> {
    let file = File::open(path).map_err(|e| IoError::file(path, e))?;
    let mut reader = BufReader::new(file);

    // --- Header ---
    let mut line_no = 0usize;
    let magic = read_header_line(&mut reader, path, &mut line_no)?;
    if magic.trim() != "ply" {
        return Err(IoError::parse(path, 1, "missing 'ply' magic"));
    }
    let mut format = None;
    let mut elements: Vec<Element> = Vec::new();
    loop {
        let line = read_header_line(&mut reader, path, &mut line_no)?;
        let words: Vec<&str> = line.split_whitespace().collect();
        match words.first().copied() {
            None | Some("comment") | Some("obj_info") => continue,
            Some("format") => {
                format = Some(match words.get(1).copied() {
                    Some("ascii") => PlyFormat::Ascii,
                    Some("binary_little_endian") => PlyFormat::BinaryLittleEndian,
                    other => {
                        return Err(IoError::parse(
                            path,
                            line_no,
                            format!("unsupported format {other:?}"),
                        ))
                    }
                });
            }
            Some("element") => {
                let (name, count) = match (words.get(1), words.get(2)) {
                    (Some(n), Some(c)) => (
                        n.to_string(),
                        c.parse::<usize>().map_err(|_| {
                            IoError::parse(path, line_no, "bad element count")
                        })?,
                    ),
                    _ => return Err(IoError::parse(path, line_no, "malformed element")),
                };
                elements.push(Element { name, count, properties: Vec::new() });
            }
            Some("property") => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| IoError::parse(path, line_no, "property before element"))?;
                if words.get(1) == Some(&"list") {
                    let count = Scalar::parse(words.get(2).copied().unwrap_or(""))
                        .ok_or_else(|| IoError::parse(path, line_no, "bad list count type"))?;
                    let item = Scalar::parse(words.get(3).copied().unwrap_or(""))
                        .ok_or_else(|| IoError::parse(path, line_no, "bad list item type"))?;
                    el.properties.push(Property::List { count, item });
                } else {
                    let kind = Scalar::parse(words.get(1).copied().unwrap_or(""))
                        .ok_or_else(|| IoError::parse(path, line_no, "bad property type"))?;
                    let name = words
                        .get(2)
                        .ok_or_else(|| IoError::parse(path, line_no, "missing property name"))?
                        .to_string();
                    el.properties.push(Property::Scalar { name, kind });
                }
            }
            Some("end_header") => break,
            Some(other) => {
                return Err(IoError::parse(path, line_no, format!("unknown keyword '{other}'")))
            }
        }
    }
    let format = format.ok_or_else(|| IoError::parse(path, line_no, "missing format line"))?;

    // --- Body ---
    let mut vertices: Vec<Point3<f64>> = Vec::new();
    let mut labels: Vec<i32> = Vec::new();
    let mut has_labels = false;
    let mut faces: Vec<[u32; 3]> = Vec::new();

    match format {
        PlyFormat::Ascii => {
            let mut lines = reader.lines();
            let mut next_line = |line_no: &mut usize| -> Result<Vec<f64>, IoError> {
                loop {
                    let line = lines
                        .next()
                        .ok_or_else(|| IoError::parse(path, *line_no, "unexpected end of data"))?
                        .map_err(|e| IoError::file(path, e))?;
                    *line_no += 1;
                    if line.trim().is_empty() {
                        continue;
                    }
                    return line
                        .split_whitespace()
                        .map(|w| {
                            w.parse::<f64>().map_err(|_| {
                                IoError::parse(path, *line_no, format!("bad number '{w}'"))
                            })
                        })
                        .collect();
                }
            };
            for el in &elements {
                for _ in 0..el.count {
                    let nums = next_line(&mut line_no)?;
                    consume_row(path, line_no, el, &nums, &mut vertices, &mut labels,
                                &mut has_labels, &mut faces)?;
                }
            }
        }
        PlyFormat::BinaryLittleEndian => {
            let mut body = Vec::new();
            reader.read_to_end(&mut body).map_err(|e| IoError::file(path, e))?;
            let mut off = 0usize;
            let mut take = |n: usize| -> Result<&[u8], IoError> {
                if off + n > body.len() {
                    return Err(IoError::parse(path, line_no, "binary body truncated"));
                }
                let s = &body[off..off + n];
                off += n;
                Ok(s)
            };
            for el in &elements {
                for _ in 0..el.count {
                    let mut nums: Vec<f64> = Vec::with_capacity(el.properties.len() + 4);
                    for prop in &el.properties {
                        match prop {
                            Property::Scalar { kind, .. } => {
                                let raw = take(kind.size())?;
                                nums.push(kind.read_f64(raw));
                            }
                            Property::List { count, item } => {
                                let n = count.read_f64(take(count.size())?) as usize;
                                nums.push(n as f64);
                                for _ in 0..n {
                                    let raw = take(item.size())?;
                                    nums.push(item.read_f64(raw));
                                }
                            }
                        }
                    }
                    consume_row(path, line_no, el, &nums, &mut vertices, &mut labels,
                                &mut has_labels, &mut faces)?;
                }
            }
        }
    }

    let mesh = TriMesh::new(vertices, faces)?;
    let labels = if has_labels {
        if labels.len() != mesh.vertex_count() {
            return Err(IoError::parse(path, 0, "instance_id count mismatch"));
        }
        Some(labels)
    } else {
        None
    };
    Ok(LabeledMesh { mesh, labels })
}

/// Interprets one element row (already decoded to f64 slots, lists prefixed
/// by their length) as a vertex or face.
#[allow(clippy::too_many_arguments)]
fn consume_row(
    path: &Path,
    line_no: usize,
    el: &Element,
    nums: &[f64],
    vertices: &mut Vec<Point3<f64>>,
    labels: &mut Vec<i32>,
    has_labels: &mut bool,
    faces: &mut Vec<[u32; 3]>,
) -> Result<(), IoError> {
    match el.name.as_str() {
        "vertex" => {
            let (mut x, mut y, mut z) = (None, None, None);
            let mut label = None;
            let mut cursor = 0usize;
            for prop in &el.properties {
                match prop {
                    Property::Scalar { name, .. } => {
                        let v = *nums
                            .get(cursor)
                            .ok_or_else(|| IoError::parse(path, line_no, "short vertex row"))?;
                        cursor += 1;
                        match name.as_str() {
                            "x" => x = Some(v),
                            "y" => y = Some(v),
                            "z" => z = Some(v),
                            "instance_id" => label = Some(v as i32),
                            _ => {}
                        }
                    }
                    Property::List { .. } => {
                        let n = *nums
                            .get(cursor)
                            .ok_or_else(|| IoError::parse(path, line_no, "short vertex row"))?
                            as usize;
                        cursor += 1 + n;
                    }
                }
            }
            let (x, y, z) = match (x, y, z) {
                (Some(x), Some(y), Some(z)) => (x, y, z),
                _ => return Err(IoError::parse(path, line_no, "vertex missing x/y/z")),
            };
            vertices.push(Point3::new(x, y, z));
            if let Some(l) = label {
                *has_labels = true;
                labels.push(l);
            } else if *has_labels {
                return Err(IoError::parse(path, line_no, "vertex missing instance_id"));
            }
            Ok(())
        }
        "face" => {
            let mut cursor = 0usize;
            for prop in &el.properties {
                match prop {
                    Property::List { .. } => {
                        let n = *nums
                            .get(cursor)
                            .ok_or_else(|| IoError::parse(path, line_no, "short face row"))?
                            as usize;
                        let idx = &nums[cursor + 1..cursor + 1 + n];
                        cursor += 1 + n;
                        if n < 3 {
                            return Err(IoError::parse(path, line_no, "face with <3 vertices"));
                        }
                        for k in 1..n - 1 {
                            faces.push([idx[0] as u32, idx[k] as u32, idx[k + 1] as u32]);
                        }
                    }
                    Property::Scalar { .. } => {
                        cursor += 1;
                    }
                }
            }
            Ok(())
        }
        _ => Ok(()), // unknown elements are skipped
    }
}

/// Writes a PLY mesh with double-precision coordinates (so geometry
/// round-trips exactly) and, when labels are given, a per-vertex
/// `instance_id` int property.
pub fn write_ply(
    path: &Path,
    mesh: &TriMesh,
    labels: Option<&[i32]>,
    format: PlyFormat,
) -> Result<(), IoError> {
    if let Some(l) = labels {
        if l.len() != mesh.vertex_count() {
            return Err(IoError::Geometry(
                crate::geometry::GeometryError::LabelCountMismatch {
                    labels: l.len(),
                    vertices: mesh.vertex_count(),
                },
            ));
        }
    }
    let file = File::create(path).map_err(|e| IoError::file(path, e))?;
    let mut w = BufWriter::new(file);
    let fmt_line = match format {
        PlyFormat::Ascii => "format ascii 1.0",
        PlyFormat::BinaryLittleEndian => "format binary_little_endian 1.0",
    };
    write!(
        w,
        "ply\n{fmt_line}\nelement vertex {}\nproperty double x\nproperty double y\nproperty double z\n",
        mesh.vertex_count()
    )
    .map_err(|e| IoError::file(path, e))?;
    if labels.is_some() {
        writeln!(w, "property int instance_id").map_err(|e| IoError::file(path, e))?;
    }
    write!(
        w,
        "element face {}\nproperty list uchar int vertex_indices\nend_header\n",
        mesh.face_count()
    )
    .map_err(|e| IoError::file(path, e))?;

    match format {
        PlyFormat::Ascii => {
            for (i, v) in mesh.vertices.iter().enumerate() {
                if let Some(l) = labels {
                    writeln!(w, "{} {} {} {}", v.x, v.y, v.z, l[i])
                } else {
                    writeln!(w, "{} {} {}", v.x, v.y, v.z)
                }
                .map_err(|e| IoError::file(path, e))?;
            }
            for f in &mesh.faces {
                writeln!(w, "3 {} {} {}", f[0], f[1], f[2]).map_err(|e| IoError::file(path, e))?;
            }
        }
        PlyFormat::BinaryLittleEndian => {
            for (i, v) in mesh.vertices.iter().enumerate() {
                for c in [v.x, v.y, v.z] {
                    w.write_all(&c.to_le_bytes()).map_err(|e| IoError::file(path, e))?;
                }
                if let Some(l) = labels {
                    w.write_all(&l[i].to_le_bytes()).map_err(|e| IoError::file(path, e))?;
                }
            }
            for f in &mesh.faces {
                w.write_all(&[3u8]).map_err(|e| IoError::file(path, e))?;
                for &i in f {
                    w.write_all(&(i as i32).to_le_bytes())
                        .map_err(|e| IoError::file(path, e))?;
                }
            }
        }
    }
    w.flush().map_err(|e| IoError::file(path, e))
}
