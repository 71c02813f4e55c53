use nalgebra::Point3;

use super::{Camera, DepthMap, Mask};
use crate::geometry::{Pose9, TriMesh};

/// Geometry closer than this to the camera plane is clipped away.
const Z_NEAR: f64 = 1e-4;

/// Renders the depth of a set of posed meshes with a software z-buffer.
///
/// Pixels are sampled at their centers `(x + 0.5, y + 0.5)`; depth is
/// interpolated perspective-correct; triangles crossing the near plane are
/// clipped; back faces are kept (scan meshes have no consistent winding).
/// Pixels no triangle covers stay invalid (0).
pub fn render_depth(meshes: &[(&TriMesh, Pose9)], camera: &Camera) -> DepthMap {
    render_depth_with_owners(meshes, camera).0
}

/// As [`render_depth`], additionally reporting which mesh owns each pixel
/// (index into `meshes`, or -1 where invalid). Depth ties go to the earlier
/// mesh/triangle in iteration order, so ownership is deterministic.
pub fn render_depth_with_owners(
    meshes: &[(&TriMesh, Pose9)],
    camera: &Camera,
) -> (DepthMap, Vec<i32>) {
    let mut z_buffer = vec![f64::INFINITY; camera.width * camera.height];
    let mut owners = vec![-1i32; camera.width * camera.height];

    for (mesh_id, (mesh, pose)) in meshes.iter().enumerate() {
        // World → camera for every vertex once per mesh.
        let cam_verts: Vec<Point3<f64>> = mesh
            .vertices
            .iter()
            .map(|v| camera.to_camera(&pose.apply(v)))
            .collect();
        for face in &mesh.faces {
            let tri = [
                cam_verts[face[0] as usize],
                cam_verts[face[1] as usize],
                cam_verts[face[2] as usize],
            ];
            for clipped in clip_near(&tri) {
                rasterize_triangle(&clipped, camera, mesh_id as i32, &mut z_buffer, &mut owners);
            }
        }
    }

    let values = z_buffer
        .into_iter()
        .map(|z| if z.is_finite() { z } else { 0.0 })
        .collect();
    (
        DepthMap { width: camera.width, height: camera.height, values },
        owners,
    )
}

/// The pixels where `target` is the front-most surface once `occluders` are
/// drawn too — the *visible* silhouette, not the free-floating projection.
pub fn render_mask(
    target: (&TriMesh, Pose9),
    occluders: &[(&TriMesh, Pose9)],
    camera: &Camera,
) -> Mask {
    let mut meshes = Vec::with_capacity(1 + occluders.len());
    meshes.push(target);
    meshes.extend_from_slice(occluders);
    let (_, owners) = render_depth_with_owners(&meshes, camera);
    Mask {
        width: camera.width,
        height: camera.height,
        values: owners.into_iter().map(|o| o == 0).collect(),
    }
}

/// Sutherland–Hodgman clip of one camera-space triangle against z ≥ Z_NEAR.
/// Yields 0, 1 or 2 triangles (a clipped triangle is at most a quad).
fn clip_near(tri: &[Point3<f64>; 3]) -> Vec<[Point3<f64>; 3]> {
    let inside = |p: &Point3<f64>| p.z >= Z_NEAR;
    if tri.iter().all(inside) {
        return vec![*tri];
    }
    let mut poly: Vec<Point3<f64>> = Vec::with_capacity(4);
    for i in 0..3 {
        let a = tri[i];
        let b = tri[(i + 1) % 3];
        let (ain, bin) = (inside(&a), inside(&b));
        if ain {
            poly.push(a);
        }
        if ain != bin {
            // Edge crosses the plane: interpolate the crossing point.
            let t = (Z_NEAR - a.z) / (b.z - a.z);
            poly.push(a + (b - a) * t);
        }
    }
    match poly.len() {
        0..=2 => Vec::new(),
        3 => vec![[poly[0], poly[1], poly[2]]],
        _ => vec![[poly[0], poly[1], poly[2]], [poly[0], poly[2], poly[3]]],
    }
}

fn rasterize_triangle(
    tri: &[Point3<f64>; 3],
    camera: &Camera,
    mesh_id: i32,
    z_buffer: &mut [f64],
    owners: &mut [i32],
) {
    // Project. All z ≥ Z_NEAR after clipping.
    let mut pts = [[0.0f64; 2]; 3];
    let mut inv_z = [0.0f64; 3];
    for k in 0..3 {
        let p = &tri[k];
        pts[k] = [
            camera.fx * p.x / p.z + camera.cx,
            camera.fy * p.y / p.z + camera.cy,
        ];
        inv_z[k] = 1.0 / p.z;
    }

    let edge = |a: [f64; 2], b: [f64; 2], px: f64, py: f64| {
        (b[0] - a[0]) * (py - a[1]) - (b[1] - a[1]) * (px - a[0])
    };

    // Orientation: twice the signed screen area. Flip winding if negative so
    // the inside test is always e ≥ 0 (no back-face culling).
    let area2 = edge(pts[0], pts[1], pts[2][0], pts[2][1]);
    if area2 == 0.0 || !area2.is_finite() {
        return;
    }
    let (p0, p1, p2, iz0, iz1, iz2) = if area2 > 0.0 {
        (pts[0], pts[1], pts[2], inv_z[0], inv_z[1], inv_z[2])
    } else {
        (pts[0], pts[2], pts[1], inv_z[0], inv_z[2], inv_z[1])
    };

    // Pixel-center bounding box, clamped to the image.
    let min_x = p0[0].min(p1[0]).min(p2[0]);
    let max_x = p0[0].max(p1[0]).max(p2[0]);
    let min_y = p0[1].min(p1[1]).min(p2[1]);
    let max_y = p0[1].max(p1[1]).max(p2[1]);
    let x0 = (min_x - 0.5).ceil().max(0.0) as usize;
    let y0 = (min_y - 0.5).ceil().max(0.0) as usize;
    if min_x - 0.5 > (camera.width - 1) as f64 || min_y - 0.5 > (camera.height - 1) as f64 {
        return;
    }
    let x1 = ((max_x - 0.5).floor().min((camera.width - 1) as f64)).max(0.0) as usize;
    let y1 = ((max_y - 0.5).floor().min((camera.height - 1) as f64)).max(0.0) as usize;
    if max_x < 0.5 || max_y < 0.5 {
        return;
    }

    for y in y0..=y1 {
        let py = y as f64 + 0.5;
        for x in x0..=x1 {
            let px = x as f64 + 0.5;
            let e0 = edge(p1, p2, px, py);
            let e1 = edge(p2, p0, px, py);
            let e2 = edge(p0, p1, px, py);
            if e0 < 0.0 || e1 < 0.0 || e2 < 0.0 {
                continue;
            }
            let sum = e0 + e1 + e2;
            if sum <= 0.0 {
                continue;
            }
            // Perspective-correct depth: 1/z interpolates linearly in screen
            // space, so z = Σe / Σ(e·1/z). Kept in this unnormalized form to
            // avoid an extra rounding step on constant-depth surfaces.
            let denom = e0 * iz0 + e1 * iz1 + e2 * iz2;
            if denom <= 0.0 {
                continue;
            }
            let z = sum / denom;
            let idx = y * camera.width + x;
            if z < z_buffer[idx] {
                z_buffer[idx] = z;
                owners[idx] = mesh_id;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::{Isometry3, Vector3};

    fn camera_64x48() -> Camera {
        Camera::new(60.0, 60.0, 32.0, 24.0, 64, 48, Isometry3::identity()).unwrap()
    }

    /// Two triangles forming a fronto-parallel square of half-size `h` at
    /// depth `z`, centered on the optical axis.
    fn quad_at(h: f64, z: f64) -> TriMesh {
        TriMesh::new(
            vec![
                Point3::new(-h, -h, z),
                Point3::new(h, -h, z),
                Point3::new(h, h, z),
                Point3::new(-h, h, z),
            ],
            vec![[0, 1, 2], [0, 2, 3]],
        )
        .unwrap()
    }

    #[test]
    fn empty_scene_is_all_invalid() {
        let d = render_depth(&[], &camera_64x48());
        assert_eq!(d.valid_count(), 0);
        assert!(d.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn full_frustum_plane_at_z2_reads_exactly_two() {
        let cam = camera_64x48();
        // Large enough to cover every pixel at z = 2.
        let quad = quad_at(5.0, 2.0);
        let d = render_depth(&[(&quad, Pose9::identity())], &cam);
        assert_eq!(d.valid_count(), 64 * 48);
        for &v in &d.values {
            assert_eq!(v, 2.0, "expected exact 2.0, got {v}");
        }
    }

    #[test]
    fn z_buffer_keeps_the_nearer_surface() {
        let cam = camera_64x48();
        let near = quad_at(0.02, 1.0); // small quad at z=1
        let far = quad_at(5.0, 3.0); // full-frame quad at z=3
        let d = render_depth(&[(&far, Pose9::identity()), (&near, Pose9::identity())], &cam);
        // Center pixel is covered by both; nearer one wins (z=1 inverts
        // exactly, being a power of two).
        assert_eq!(d.get(32, 24), 1.0);
        // A corner pixel only sees the far quad. Inverse-depth interpolation
        // reconstructs non-power-of-two depths to within an ulp or two.
        assert_relative_eq!(d.get(0, 0), 3.0, epsilon = 1e-12);
    }

    #[test]
    fn determinism_bit_identical() {
        let cam = camera_64x48();
        let a = quad_at(0.7, 1.3);
        let b = quad_at(2.0, 2.7);
        let meshes = [(&a, Pose9::identity()), (&b, Pose9::identity())];
        let d1 = render_depth(&meshes, &cam);
        let d2 = render_depth(&meshes, &cam);
        assert_eq!(d1, d2);
    }

    #[test]
    fn triangles_behind_the_camera_are_clipped() {
        let cam = camera_64x48();
        let behind = quad_at(5.0, -2.0);
        let d = render_depth(&[(&behind, Pose9::identity())], &cam);
        assert_eq!(d.valid_count(), 0);
    }

    #[test]
    fn triangle_straddling_near_plane_renders_front_part() {
        let cam = camera_64x48();
        // A triangle running from z = -1 (behind) to z = +2 (in front).
        let mesh = TriMesh::new(
            vec![
                Point3::new(0.0, -0.5, -1.0),
                Point3::new(0.5, 0.5, 2.0),
                Point3::new(-0.5, 0.5, 2.0),
            ],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let d = render_depth(&[(&mesh, Pose9::identity())], &cam);
        assert!(d.valid_count() > 0);
        for &v in d.values.iter().filter(|&&v| DepthMap::is_valid_value(v)) {
            assert!(v >= Z_NEAR && v <= 2.0 + 1e-9);
        }
    }

    #[test]
    fn winding_does_not_matter() {
        let cam = camera_64x48();
        let quad = quad_at(0.5, 2.0);
        let mut flipped = quad.clone();
        for f in &mut flipped.faces {
            f.swap(1, 2);
        }
        let d1 = render_depth(&[(&quad, Pose9::identity())], &cam);
        let d2 = render_depth(&[(&flipped, Pose9::identity())], &cam);
        assert_eq!(d1, d2);
    }

    #[test]
    fn mask_without_occluders_is_the_footprint() {
        let cam = camera_64x48();
        let quad = quad_at(5.0, 2.0);
        let m = render_mask((&quad, Pose9::identity()), &[], &cam);
        assert_eq!(m.count(), 64 * 48);
    }

    #[test]
    fn mask_of_fully_hidden_target_is_empty() {
        let cam = camera_64x48();
        let target = quad_at(0.5, 3.0);
        let blocker = quad_at(5.0, 1.0);
        let m = render_mask(
            (&target, Pose9::identity()),
            &[(&blocker, Pose9::identity())],
            &cam,
        );
        assert!(m.is_empty());
    }

    #[test]
    fn partially_occluded_mask_matches_two_depth_oracle() {
        let cam = camera_64x48();
        let target = quad_at(1.0, 2.0);
        // Occluder covering roughly the left half of the view, nearer.
        let occ = TriMesh::new(
            vec![
                Point3::new(-3.0, -3.0, 1.5),
                Point3::new(0.0, -3.0, 1.5),
                Point3::new(0.0, 3.0, 1.5),
                Point3::new(-3.0, 3.0, 1.5),
            ],
            vec![[0, 1, 2], [0, 2, 3]],
        )
        .unwrap();
        let mask = render_mask(
            (&target, Pose9::identity()),
            &[(&occ, Pose9::identity())],
            &cam,
        );
        // Oracle: two independent depth renders compared per pixel; the
        // target owns a pixel when it is valid and not strictly behind the
        // occluder.
        let dt = render_depth(&[(&target, Pose9::identity())], &cam);
        let do_ = render_depth(&[(&occ, Pose9::identity())], &cam);
        for i in 0..dt.values.len() {
            let expect = DepthMap::is_valid_value(dt.values[i])
                && (!DepthMap::is_valid_value(do_.values[i]) || dt.values[i] <= do_.values[i]);
            assert_eq!(mask.values[i], expect, "pixel {i}");
        }
        assert!(!mask.is_empty());
        assert!(mask.count() < dt.valid_count());
    }

    #[test]
    fn fused_split_renders_equal_joint_render() {
        use rand::{Rng, SeedableRng};
        let cam = camera_64x48();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..20 {
            // Two random boxes in front of the camera.
            let mk = |rng: &mut rand_chacha::ChaCha8Rng| {
                let hx = rng.gen_range(0.1..0.8);
                let hy = rng.gen_range(0.1..0.8);
                let hz = rng.gen_range(0.1..0.8);
                let mesh = TriMesh::box_mesh(hx, hy, hz);
                let pose = Pose9::new(
                    Vector3::new(
                        rng.gen_range(-1.0..1.0),
                        rng.gen_range(-1.0..1.0),
                        rng.gen_range(2.0..5.0),
                    ),
                    nalgebra::UnitQuaternion::from_euler_angles(
                        rng.gen_range(-1.0..1.0),
                        rng.gen_range(-1.0..1.0),
                        rng.gen_range(-1.0..1.0),
                    ),
                    Vector3::new(1.0, 1.0, 1.0),
                )
                .unwrap();
                (mesh, pose)
            };
            let (ma, pa) = mk(&mut rng);
            let (mb, pb) = mk(&mut rng);
            let joint = render_depth(&[(&ma, pa), (&mb, pb)], &cam);
            let da = render_depth(&[(&ma, pa)], &cam);
            let db = render_depth(&[(&mb, pb)], &cam);
            let fused = crate::render::fuse_depth(&da, &db).unwrap();
            assert_eq!(fused, joint, "fused split render differs from joint render");
        }
    }

    #[test]
    fn translation_along_optical_axis_shifts_depth_exactly() {
        let cam = camera_64x48();
        let quad = quad_at(5.0, 2.0);
        let near = render_depth(&[(&quad, Pose9::identity())], &cam);
        let shifted = render_depth(
            &[(&quad, Pose9::from_translation(Vector3::new(0.0, 0.0, 2.0)))],
            &cam,
        );
        for i in 0..near.values.len() {
            if DepthMap::is_valid_value(near.values[i]) {
                assert_eq!(shifted.values[i] - near.values[i], 2.0);
            }
        }
    }

    #[test]
    fn valid_pixels_reproject_onto_input_triangles() {
        use rand::{Rng, SeedableRng};
        let cam = camera_64x48();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let mesh = TriMesh::box_mesh(0.6, 0.4, 0.5);
        let pose = Pose9::new(
            Vector3::new(0.2, -0.1, 3.0),
            nalgebra::UnitQuaternion::from_euler_angles(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            ),
            Vector3::new(1.0, 1.2, 0.8),
        )
        .unwrap();
        let d = render_depth(&[(&mesh, pose)], &cam);
        assert!(d.valid_count() > 100);
        // Camera-space triangles for the oracle.
        let world = mesh.transformed(&pose);
        let cam_tris: Vec<[Point3<f64>; 3]> = (0..world.face_count())
            .map(|fi| {
                let [a, b, c] = world.triangle(fi);
                [cam.to_camera(&a), cam.to_camera(&b), cam.to_camera(&c)]
            })
            .collect();
        for y in 0..cam.height {
            for x in 0..cam.width {
                let z = d.get(x, y);
                if !DepthMap::is_valid_value(z) {
                    continue;
                }
                let p = cam.unproject_pixel(x, y, z);
                let dist = cam_tris
                    .iter()
                    .map(|t| point_triangle_distance(&p, t))
                    .fold(f64::INFINITY, f64::min);
                assert!(dist < 1e-6, "pixel ({x},{y}) reprojects {dist} m off-surface");
            }
        }
    }

    /// Closest distance from a point to a triangle (used only as a test
    /// oracle).
    fn point_triangle_distance(p: &Point3<f64>, tri: &[Point3<f64>; 3]) -> f64 {
        let (a, b, c) = (tri[0], tri[1], tri[2]);
        let ab = b - a;
        let ac = c - a;
        let ap = p - a;
        let d1 = ab.dot(&ap);
        let d2 = ac.dot(&ap);
        if d1 <= 0.0 && d2 <= 0.0 {
            return ap.norm();
        }
        let bp = p - b;
        let d3 = ab.dot(&bp);
        let d4 = ac.dot(&bp);
        if d3 >= 0.0 && d4 <= d3 {
            return bp.norm();
        }
        let vc = d1 * d4 - d3 * d2;
        if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
            let v = d1 / (d1 - d3);
            return (ap - ab * v).norm();
        }
        let cp = p - c;
        let d5 = ab.dot(&cp);
        let d6 = ac.dot(&cp);
        if d6 >= 0.0 && d5 <= d6 {
            return cp.norm();
        }
        let vb = d5 * d2 - d1 * d6;
        if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
            let w = d2 / (d2 - d6);
            return (ap - ac * w).norm();
        }
        let va = d3 * d6 - d5 * d4;
        if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
            let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
            return (bp - (c - b) * w).norm();
        }
        let denom = 1.0 / (va + vb + vc);
        let v = vb * denom;
        let w = vc * denom;
        (ap - ab * v - ac * w).norm()
    }
}
