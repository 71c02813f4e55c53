use super::{FrameSelection, ObjectAnnotation, RgbdScan, SceneError};
use crate::config::FrameSampling;
use crate::geometry::{fit_obb_gravity_aligned, points_in_obb, Obb, PointCloud, TriMesh};

/// Selects the frames used to evaluate one object.
///
/// A frame qualifies when at least one of the box's 8 corners projects
/// inside the image with positive camera-space depth — partial views still
/// constrain the objective. Qualifying frames are thinned to `n_t`:
/// evenly spaced over the qualifying list (first and last always kept when
/// `n_t ≥ 2`), or with a fixed stride when so configured.
pub fn select_frames(
    scan: &RgbdScan,
    object_id: &str,
    obb: &Obb,
    n_t: usize,
    mode: FrameSampling,
) -> Result<FrameSelection, SceneError> {
    assert!(n_t >= 1, "n_t must be at least 1");
    let corners = obb.corners();
    let qualifying: Vec<usize> = scan
        .frames
        .iter()
        .enumerate()
        .filter(|(_, frame)| {
            corners.iter().any(|c| {
                let cam = frame.camera.to_camera(c);
                frame
                    .camera
                    .project_camera_point(&cam)
                    .map(|(u, v)| frame.camera.in_image(u, v))
                    .unwrap_or(false)
            })
        })
        .map(|(i, _)| i)
        .collect();
    if qualifying.is_empty() {
        return Err(SceneError::NoVisibleFrames { object: object_id.to_string() });
    }
    let indices = if qualifying.len() <= n_t {
        qualifying
    } else {
        match mode {
            FrameSampling::Even => {
                let last = (qualifying.len() - 1) as f64;
                let mut picked: Vec<usize> = if n_t == 1 {
                    vec![qualifying[0]]
                } else {
                    (0..n_t)
                        .map(|j| {
                            let pos = (j as f64 * last / (n_t - 1) as f64).round() as usize;
                            qualifying[pos]
                        })
                        .collect()
                };
                picked.dedup();
                picked
            }
            FrameSampling::Stride => {
                let stride = qualifying.len().div_ceil(n_t);
                qualifying.into_iter().step_by(stride).take(n_t).collect()
            }
        }
    };
    Ok(FrameSelection { object_id: object_id.to_string(), indices })
}

/// Fills in whichever of box/segmentation is missing: a missing box is
/// fitted around the segmented vertices; a missing segmentation collects the
/// vertices inside the box grown by `margin`. A fully specified annotation
/// is returned unchanged (the operation is idempotent).
pub fn derive_missing_supervision(
    scan: &RgbdScan,
    ann: &ObjectAnnotation,
    margin: f64,
) -> Result<ObjectAnnotation, SceneError> {
    let mut out = ann.clone();
    match (&ann.obb, &ann.segmentation) {
        (Some(_), Some(_)) => {}
        (None, Some(seg)) => {
            let cloud = segmentation_positions(scan, &out.id, seg)?;
            out.obb = Some(fit_obb_gravity_aligned(&cloud, scan.gravity)?);
            out.obb_derived = true;
        }
        (Some(obb), None) => {
            let all = PointCloud::new(scan.scene_mesh.vertices.clone());
            let seg: Vec<u32> =
                points_in_obb(obb, &all, margin).into_iter().map(|i| i as u32).collect();
            if seg.is_empty() {
                return Err(SceneError::EmptySegmentation { object: out.id.clone() });
            }
            out.segmentation = Some(seg);
            out.segmentation_derived = true;
        }
        (None, None) => {
            return Err(SceneError::NoSupervision { object: out.id.clone() });
        }
    }
    Ok(out)
}

/// The scene mesh with the annotated object cut out: every segmented vertex
/// is deleted together with all faces touching it, and the remaining
/// indices are remapped compactly. An empty segmentation returns the scene
/// unchanged.
pub fn remove_object(scan: &RgbdScan, ann: &ObjectAnnotation) -> Result<TriMesh, SceneError> {
    let seg = ann
        .segmentation
        .as_ref()
        .ok_or_else(|| SceneError::EmptySegmentation { object: ann.id.clone() })?;
    if seg.is_empty() {
        return Ok(scan.scene_mesh.clone());
    }
    let removed = segment_flags(scan, seg);
    let (mesh, _) = scan
        .scene_mesh
        .filter_faces(|_, face| !face.iter().any(|&v| removed[v as usize]));
    Ok(mesh)
}

/// The annotated object's own faces: exactly those touching a segmented
/// vertex — the complement of [`remove_object`], so the two partition the
/// scene's faces.
pub fn object_submesh(scan: &RgbdScan, ann: &ObjectAnnotation) -> Result<TriMesh, SceneError> {
    let seg = ann
        .segmentation
        .as_ref()
        .ok_or_else(|| SceneError::EmptySegmentation { object: ann.id.clone() })?;
    let flagged = segment_flags(scan, seg);
    let (mesh, _) = scan
        .scene_mesh
        .filter_faces(|_, face| face.iter().any(|&v| flagged[v as usize]));
    Ok(mesh)
}

/// Positions of the segmented scene-mesh vertices.
pub fn object_point_cloud(scan: &RgbdScan, ann: &ObjectAnnotation) -> Result<PointCloud, SceneError> {
    let seg = ann
        .segmentation
        .as_ref()
        .ok_or_else(|| SceneError::EmptySegmentation { object: ann.id.clone() })?;
    segmentation_positions(scan, &ann.id, seg)
}

fn segmentation_positions(
    scan: &RgbdScan,
    object_id: &str,
    seg: &[u32],
) -> Result<PointCloud, SceneError> {
    if seg.is_empty() {
        return Err(SceneError::EmptySegmentation { object: object_id.to_string() });
    }
    Ok(PointCloud::new(
        seg.iter().map(|&i| scan.scene_mesh.vertices[i as usize]).collect(),
    ))
}

fn segment_flags(scan: &RgbdScan, seg: &[u32]) -> Vec<bool> {
    let mut flags = vec![false; scan.scene_mesh.vertex_count()];
    for &i in seg {
        flags[i as usize] = true;
    }
    flags
}
