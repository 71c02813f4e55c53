use nalgebra::Point3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{GeometryError, PointCloud, TriMesh};

/// Draws `n` points uniformly over the surface of `mesh`, area-weighted
/// across triangles. Deterministic for a fixed `(mesh, n, seed)` — including
/// under parallel execution, because each triangle consumes its own random
/// stream keyed by `(seed, triangle index)`:
///
/// 1. one stream keyed by `seed` alone decides how many points land on each
///    triangle (n draws against the cumulative-area table), then
/// 2. each triangle generates its quota of barycentric samples from its own
///    stream, and the groups are concatenated in ascending triangle order.
pub fn sample_surface(mesh: &TriMesh, n: usize, seed: u64) -> Result<PointCloud, GeometryError> {
    let areas: Vec<f64> = (0..mesh.face_count()).map(|fi| mesh.face_area(fi)).collect();
    let mut cumulative = Vec::with_capacity(areas.len());
    let mut total = 0.0;
    for a in &areas {
        total += a;
        cumulative.push(total);
    }
    if !(total > 0.0) {
        return Err(GeometryError::ZeroAreaMesh);
    }
    if n == 0 {
        return Ok(PointCloud::default());
    }

    // Stage 1: per-triangle quotas.
    let mut counts = vec![0u32; areas.len()];
    let mut pick_rng = stream(seed, 0, Tag::TrianglePicks);
    for _ in 0..n {
        let x = pick_rng.gen_range(0.0..total);
        // First triangle whose cumulative area exceeds x; zero-area
        // triangles can never satisfy this.
        let ti = cumulative.partition_point(|&c| c <= x).min(areas.len() - 1);
        counts[ti] += 1;
    }

    // Stage 2: per-triangle barycentric points, concatenated in triangle
    // order. Safe to run in parallel: streams are independent.
    let groups: Vec<Vec<Point3<f64>>> = counts
        .par_iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(ti, &c)| {
            let [a, b, cc] = mesh.triangle(ti);
            let mut rng = stream(seed, ti as u64, Tag::Barycentric);
            (0..c)
                .map(|_| {
                    let r1: f64 = rng.gen();
                    let r2: f64 = rng.gen();
                    let s = r1.sqrt();
                    // Uniform over the triangle: (1−√r1)·A + √r1(1−r2)·B + √r1·r2·C
                    Point3::from(
                        a.coords * (1.0 - s) + b.coords * (s * (1.0 - r2)) + cc.coords * (s * r2),
                    )
                })
                .collect()
        })
        .collect();

    let mut points = Vec::with_capacity(n);
    for g in groups {
        points.extend(g);
    }
    Ok(PointCloud::new(points))
}

enum Tag {
    TrianglePicks,
    Barycentric,
}

/// A ChaCha8 stream keyed by (seed, triangle, role); distinct keys give
/// independent streams.
fn stream(seed: u64, triangle: u64, tag: Tag) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&triangle.to_le_bytes());
    key[16] = match tag {
        Tag::TrianglePicks => 0,
        Tag::Barycentric => 1,
    };
    ChaCha8Rng::from_seed(key)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn density_proportional_to_area() {
        // A unit square split into a 1/5 and a 4/5 triangle.
        let mesh = TriMesh::new(
            vec![
                Point3::new(0.0, 0.0, 0.0),
                Point3::new(1.0, 0.0, 0.0),
                Point3::new(1.0, 1.0, 0.0),
                Point3::new(0.0, 1.0, 0.0),
                Point3::new(0.2, 0.0, 0.0),
            ],
            // Triangle 0: (0,0),(0.2,0),(0,1) — area 0.1.
            // Triangle 1: the remaining quadrilateral area 0.9 as two faces.
            vec![[0, 4, 3], [4, 1, 3], [1, 2, 3]],
        )
        .unwrap();
        let n = 10_000;
        let cloud = sample_surface(&mesh, n, 5).unwrap();
        assert_eq!(cloud.len(), n);
        // Count samples in triangle 0 by its x range and the diagonal test.
        let total_area = mesh.surface_area();
        assert_relative_eq!(total_area, 1.0, epsilon = 1e-12);
        let in_t0 = cloud
            .points
            .iter()
            .filter(|p| p.y <= 1.0 - p.x / 0.2 + 1e-12)
            .count();
        let expected = n as f64 * mesh.face_area(0);
        let got = in_t0 as f64;
        assert!(
            (got - expected).abs() / expected < 0.05,
            "triangle share {got} vs expected {expected}"
        );
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let mesh = TriMesh::new(
            vec![
                Point3::new(0.0, 0.0, 0.0),
                Point3::new(1.0, 0.0, 0.0),
                Point3::new(0.0, 1.0, 0.0),
            ],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let a = sample_surface(&mesh, 3, 17).unwrap();
        let b = sample_surface(&mesh, 3, 17).unwrap();
        assert_eq!(a, b);
        let c = sample_surface(&mesh, 3, 18).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn samples_lie_on_cube_surface() {
        let mesh = TriMesh::box_mesh(1.0, 1.0, 1.0); // side 2, centered
        let cloud = sample_surface(&mesh, 10_000, 3).unwrap();
        for p in &cloud.points {
            let max_norm = p.x.abs().max(p.y.abs()).max(p.z.abs());
            assert!((max_norm - 1.0).abs() < 1e-12, "point {p} off the surface");
        }
    }

    #[test]
    fn zero_area_mesh_is_rejected() {
        let mesh = TriMesh::new(
            vec![
                Point3::new(0.0, 0.0, 0.0),
                Point3::new(1.0, 1.0, 1.0),
                Point3::new(2.0, 2.0, 2.0),
            ],
            vec![[0, 1, 2]],
        )
        .unwrap();
        assert!(matches!(
            sample_surface(&mesh, 10, 0),
            Err(GeometryError::ZeroAreaMesh)
        ));
    }

    #[test]
    fn zero_area_triangles_are_never_picked() {
        let mesh = TriMesh::new(
            vec![
                Point3::new(0.0, 0.0, 0.0),
                Point3::new(1.0, 0.0, 0.0),
                Point3::new(0.0, 1.0, 0.0),
                Point3::new(5.0, 5.0, 5.0),
                Point3::new(6.0, 6.0, 6.0),
                Point3::new(7.0, 7.0, 7.0),
            ],
            vec![[3, 4, 5], [0, 1, 2]], // degenerate face first
        )
        .unwrap();
        let cloud = sample_surface(&mesh, 2000, 9).unwrap();
        for p in &cloud.points {
            assert!(p.z.abs() < 1e-12, "sampled the degenerate line at {p}");
        }
    }

    #[test]
    fn requesting_zero_points_returns_empty() {
        let mesh = TriMesh::box_mesh(1.0, 1.0, 1.0);
        assert!(sample_surface(&mesh, 0, 1).unwrap().is_empty());
    }

    #[test]
    fn sample_count_is_exact() {
        let mesh = TriMesh::box_mesh(0.3, 0.8, 0.1);
        for n in [1, 2, 7, 100, 1234] {
            assert_eq!(sample_surface(&mesh, n, 11).unwrap().len(), n);
        }
    }
}
