use nalgebra::{Point3, Vector3};

use super::{GeometryError, Pose9};

/// An indexed triangle mesh with double-precision vertices.
///
/// Faces are triples of vertex indices; winding is preserved but nothing in
/// the engine depends on it (depth rendering does not cull back faces).
#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    pub vertices: Vec<Point3<f64>>,
    pub faces: Vec<[u32; 3]>,
}

impl TriMesh {
    /// Builds a mesh after checking that every face index is in range and
    /// no face repeats a vertex.
    pub fn new(vertices: Vec<Point3<f64>>, faces: Vec<[u32; 3]>) -> Result<Self, GeometryError> {
        let count = vertices.len();
        for (fi, face) in faces.iter().enumerate() {
            for &idx in face {
                if idx as usize >= count {
                    return Err(GeometryError::FaceIndexOutOfRange {
                        face: fi,
                        index: idx,
                        count,
                    });
                }
            }
            if face[0] == face[1] || face[1] == face[2] || face[0] == face[2] {
                let dup = if face[0] == face[1] || face[0] == face[2] {
                    face[0]
                } else {
                    face[1]
                };
                return Err(GeometryError::DegenerateFace { face: fi, index: dup });
            }
        }
        Ok(Self { vertices, faces })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    /// The three corner positions of face `fi`.
    pub fn triangle(&self, fi: usize) -> [Point3<f64>; 3] {
        let [a, b, c] = self.faces[fi];
        [
            self.vertices[a as usize],
            self.vertices[b as usize],
            self.vertices[c as usize],
        ]
    }

    /// Area of face `fi` (half the cross-product magnitude).
    pub fn face_area(&self, fi: usize) -> f64 {
        let [a, b, c] = self.triangle(fi);
        0.5 * (b - a).cross(&(c - a)).norm()
    }

    /// Total surface area.
    pub fn surface_area(&self) -> f64 {
        (0..self.faces.len()).map(|fi| self.face_area(fi)).sum()
    }

    /// Axis-aligned bounds as (min, max); `None` for a vertexless mesh.
    pub fn aabb(&self) -> Option<(Point3<f64>, Point3<f64>)> {
        let first = *self.vertices.first()?;
        let mut lo = first;
        let mut hi = first;
        for v in &self.vertices[1..] {
            for k in 0..3 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        Some((lo, hi))
    }

    /// Centroid of the axis-aligned bounds (not the area centroid).
    pub fn aabb_center(&self) -> Option<Point3<f64>> {
        let (lo, hi) = self.aabb()?;
        Some(Point3::from((lo.coords + hi.coords) * 0.5))
    }

    /// Returns a copy with every vertex mapped through `pose`.
    pub fn transformed(&self, pose: &Pose9) -> TriMesh {
        TriMesh {
            vertices: self.vertices.iter().map(|v| pose.apply(v)).collect(),
            faces: self.faces.clone(),
        }
    }

    /// Returns a copy with every vertex translated by `offset`.
    pub fn translated(&self, offset: Vector3<f64>) -> TriMesh {
        TriMesh {
            vertices: self.vertices.iter().map(|v| v + offset).collect(),
            faces: self.faces.clone(),
        }
    }

    /// Appends another mesh, offsetting its face indices.
    pub fn append(&mut self, other: &TriMesh) {
        let base = self.vertices.len() as u32;
        self.vertices.extend_from_slice(&other.vertices);
        self.faces
            .extend(other.faces.iter().map(|f| [f[0] + base, f[1] + base, f[2] + base]));
    }

    /// Keeps only the faces for which `keep` returns true, dropping vertices
    /// that are no longer referenced and remapping indices to stay compact.
    /// Surviving vertices keep their relative order.
    pub fn filter_faces<F>(&self, mut keep: F) -> (TriMesh, Vec<u32>)
    where
        F: FnMut(usize, &[u32; 3]) -> bool,
    {
        let kept: Vec<[u32; 3]> = self
            .faces
            .iter()
            .enumerate()
            .filter(|(fi, face)| keep(*fi, face))
            .map(|(_, face)| *face)
            .collect();

        let mut remap = vec![u32::MAX; self.vertices.len()];
        let mut vertices = Vec::new();
        let mut old_indices = Vec::new();
        let mut faces = Vec::with_capacity(kept.len());
        for face in &kept {
            let mut new_face = [0u32; 3];
            for (slot, &idx) in new_face.iter_mut().zip(face.iter()) {
                if remap[idx as usize] == u32::MAX {
                    remap[idx as usize] = vertices.len() as u32;
                    vertices.push(self.vertices[idx as usize]);
                    old_indices.push(idx);
                }
                *slot = remap[idx as usize];
            }
            faces.push(new_face);
        }
        (TriMesh { vertices, faces }, old_indices)
    }

    /// Unit-cube helper used across tests and synthetic scenes: an
    /// axis-aligned box centered at the origin with the given half extents,
    /// 8 vertices and 12 triangles.
    pub fn box_mesh(hx: f64, hy: f64, hz: f64) -> TriMesh {
        let vertices = vec![
            Point3::new(-hx, -hy, -hz),
            Point3::new(hx, -hy, -hz),
            Point3::new(hx, hy, -hz),
            Point3::new(-hx, hy, -hz),
            Point3::new(-hx, -hy, hz),
            Point3::new(hx, -hy, hz),
            Point3::new(hx, hy, hz),
            Point3::new(-hx, hy, hz),
        ];
        let faces = vec![
            [0, 2, 1],
            [0, 3, 2],
            [4, 5, 6],
            [4, 6, 7],
            [0, 1, 5],
            [0, 5, 4],
            [2, 3, 7],
            [2, 7, 6],
            [1, 2, 6],
            [1, 6, 5],
            [0, 4, 7],
            [0, 7, 3],
        ];
        TriMesh { vertices, faces }
    }

    /// Splits every triangle into four by edge midpoints, `levels` times.
    /// Vertices are not shared between split triangles; the surface is
    /// unchanged as a point set.
    pub fn subdivided(&self, levels: u32) -> TriMesh {
        let mut mesh = self.clone();
        for _ in 0..levels {
            let mut vertices = Vec::with_capacity(mesh.faces.len() * 6);
            let mut faces = Vec::with_capacity(mesh.faces.len() * 4);
            for fi in 0..mesh.faces.len() {
                let [a, b, c] = mesh.triangle(fi);
                let ab = Point3::from((a.coords + b.coords) * 0.5);
                let bc = Point3::from((b.coords + c.coords) * 0.5);
                let ca = Point3::from((c.coords + a.coords) * 0.5);
                let base = vertices.len() as u32;
                vertices.extend_from_slice(&[a, b, c, ab, bc, ca]);
                faces.push([base, base + 3, base + 5]);
                faces.push([base + 3, base + 1, base + 4]);
                faces.push([base + 5, base + 4, base + 2]);
                faces.push([base + 3, base + 4, base + 5]);
            }
            mesh = TriMesh { vertices, faces };
        }
        mesh
    }
}
