//! Visual overlay export: per-frame sensor depth, the composed depth
//! (scene with every annotated object replaced by its fitted model), and a
//! silhouette outline of the fitted models.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::cad::{CadDatabase, CadError};
use crate::geometry::{Pose9, TriMesh};
use crate::pipeline::SceneAnnotations;
use crate::render::{
    render_depth_with_owners, save_depth_png, save_mask_png, Camera, Mask, RenderError,
};
use crate::scene::{derive_missing_supervision, remove_object, ObjectAnnotation, RgbdScan, SceneError};

#[derive(Debug, Error)]
pub enum OverlayError {
    #[error("annotated object {object} is not present in the scan")]
    UnknownObject { object: String },
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error(transparent)]
    Cad(#[from] CadError),
    #[error("failed to create {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy)]
pub struct OverlayOptions {
    /// Render every `stride`-th frame (1 = all frames).
    pub stride: usize,
    /// Meters per count in the written 16-bit depth PNGs.
    pub depth_scale: f64,
    /// Margin for deriving segmentations from boxes when a scan annotation
    /// carries only an oriented box.
    pub segmentation_margin: f64,
}

impl Default for OverlayOptions {
    fn default() -> Self {
        Self { stride: 1, depth_scale: crate::synth::DEPTH_SCALE, segmentation_margin: 0.02 }
    }
}

/// The scan with every annotated object carved out, plus the fitted model
/// for each object posed in world space.
pub struct ComposedScene {
    pub hole_mesh: TriMesh,
    /// One `(model mesh, predicted pose)` pair per annotated object, in
    /// document order.
    pub placed: Vec<(TriMesh, Pose9)>,
}

impl ComposedScene {
    fn render_meshes(&self) -> Vec<(&TriMesh, Pose9)> {
        let mut meshes = vec![(&self.hole_mesh, Pose9::identity())];
        meshes.extend(self.placed.iter().map(|(m, p)| (m, *p)));
        meshes
    }

    /// Composed depth and the mask of pixels where a fitted model is the
    /// front-most surface.
    pub fn render_frame(&self, camera: &Camera) -> (crate::render::DepthMap, Mask) {
        let meshes = self.render_meshes();
        let (depth, owners) = render_depth_with_owners(&meshes, camera);
        let values = owners.iter().map(|&o| o >= 1).collect();
        (depth, Mask { width: camera.width, height: camera.height, values })
    }
}

/// Carves all annotated objects out of the scan mesh (union of their
/// segmentations) and pairs the result with the fitted models at their
/// predicted poses.
pub fn compose_scene(
    scan: &RgbdScan,
    doc: &SceneAnnotations,
    db: &CadDatabase,
    segmentation_margin: f64,
) -> Result<ComposedScene, OverlayError> {
    let mut union: BTreeSet<u32> = BTreeSet::new();
    let mut placed = Vec::with_capacity(doc.objects.len());
    for obj in &doc.objects {
        let ann = scan
            .annotations
            .iter()
            .find(|a| a.id == obj.object_id)
            .ok_or_else(|| OverlayError::UnknownObject { object: obj.object_id.clone() })?;
        let ann = derive_missing_supervision(scan, ann, segmentation_margin)?;
        union.extend(ann.segmentation.as_deref().unwrap_or(&[]));
        placed.push((db.model(&obj.model_id)?.mesh.clone(), obj.pose));
    }
    let pseudo = ObjectAnnotation {
        id: "all annotated objects".into(),
        class_label: String::new(),
        obb: None,
        segmentation: Some(union.into_iter().collect()),
        obb_derived: false,
        segmentation_derived: true,
    };
    let hole_mesh = remove_object(scan, &pseudo)?;
    Ok(ComposedScene { hole_mesh, placed })
}

/// Boundary pixels of a mask: set pixels with at least one unset
/// 4-neighbor (image-border pixels count as boundary).
pub fn outline(mask: &Mask) -> Mask {
    let mut out = Mask::new_empty(mask.width, mask.height);
    for y in 0..mask.height {
        for x in 0..mask.width {
            if !mask.get(x, y) {
                continue;
            }
            let edge = x == 0
                || y == 0
                || x + 1 == mask.width
                || y + 1 == mask.height
                || !mask.get(x - 1, y)
                || !mask.get(x + 1, y)
                || !mask.get(x, y - 1)
                || !mask.get(x, y + 1);
            if edge {
                out.values[y * mask.width + x] = true;
            }
        }
    }
    out
}

/// Writes per-frame overlay PNGs into `out_dir`:
/// `frame_NNNN_sensor.png` (always), and — when the document annotates at
/// least one object — `frame_NNNN_composed.png` and
/// `frame_NNNN_outline.png`. Returns the written paths in order.
pub fn render_overlays(
    scan: &RgbdScan,
    doc: &SceneAnnotations,
    db: &CadDatabase,
    out_dir: &Path,
    options: &OverlayOptions,
) -> Result<Vec<PathBuf>, OverlayError> {
    std::fs::create_dir_all(out_dir)
        .map_err(|source| OverlayError::Io { path: out_dir.display().to_string(), source })?;
    let composed =
        (!doc.objects.is_empty()).then(|| compose_scene(scan, doc, db, options.segmentation_margin));
    let composed = composed.transpose()?;

    let stride = options.stride.max(1);
    let mut written = Vec::new();
    for (idx, frame) in scan.frames.iter().enumerate().step_by(stride) {
        let sensor_path = out_dir.join(format!("frame_{idx:04}_sensor.png"));
        save_depth_png(&frame.depth, &sensor_path, options.depth_scale)?;
        written.push(sensor_path);

        if let Some(composed) = &composed {
            let (depth, model_mask) = composed.render_frame(&frame.camera);
            let composed_path = out_dir.join(format!("frame_{idx:04}_composed.png"));
            save_depth_png(&depth, &composed_path, options.depth_scale)?;
            written.push(composed_path);

            let outline_path = out_dir.join(format!("frame_{idx:04}_outline.png"));
            save_mask_png(&outline(&model_mask), &outline_path)?;
            written.push(outline_path);
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::procgen;
    use crate::render::render_mask;
    use crate::synth::{self, OrbitSpec, PlacedObject, ShellSpec, SyntheticSceneSpec};

    fn iou(a: &Mask, b: &Mask) -> f64 {
        let inter = a.values.iter().zip(&b.values).filter(|(x, y)| **x && **y).count();
        let union = a.values.iter().zip(&b.values).filter(|(x, y)| **x || **y).count();
        if union == 0 {
            1.0
        } else {
            inter as f64 / union as f64
        }
    }

    fn scene() -> (RgbdScan, SceneAnnotations, CadDatabase) {
        let db = CadDatabase::from_meshes(vec![(
            "chair00".to_string(),
            "chair".to_string(),
            procgen::random_chair(5),
        )])
        .unwrap();
        let model = db.model("chair00").unwrap();
        let spec = SyntheticSceneSpec {
            scene_id: "overlay-test".into(),
            shell: ShellSpec { width: 4.0, depth: 4.0, height: 2.6 },
            objects: vec![PlacedObject {
                id: "obj0".into(),
                model_id: "chair00".into(),
                class: "chair".into(),
                pose: synth::resting_pose(model, 0.3, -0.2, 0.4, nalgebra::Vector3::repeat(1.0)),
            }],
            cameras: OrbitSpec {
                count: 4,
                radius: 1.4,
                height: 1.2,
                target: [0.3, 0.4, -0.2],
                fx: 70.0,
                fy: 70.0,
                width: 80,
                height_px: 60,
            },
            noise_std: 0.0,
            seed: 9,
        };
        let (scan, truth) = synth::build_scene(&spec, &db).unwrap();
        (scan, truth, db)
    }

    #[test]
    fn ground_truth_composition_matches_object_footprint() {
        let (scan, truth, db) = scene();
        let composed = compose_scene(&scan, &truth, &db, 0.02).unwrap();
        let (model_mesh, pose) = &composed.placed[0];
        for frame in &scan.frames {
            let (_, visible) = composed.render_frame(&frame.camera);
            let footprint = render_mask(
                (model_mesh, *pose),
                &[(&composed.hole_mesh, Pose9::identity())],
                &frame.camera,
            );
            assert!(
                iou(&visible, &footprint) >= 0.99,
                "composed model mask diverges from direct footprint"
            );
        }
    }

    #[test]
    fn empty_document_writes_sensor_frames_only() {
        let (scan, mut truth, db) = scene();
        truth.objects.clear();
        let dir = tempfile::tempdir().unwrap();
        let written =
            render_overlays(&scan, &truth, &db, dir.path(), &OverlayOptions::default()).unwrap();
        assert_eq!(written.len(), scan.frames.len());
        assert!(written.iter().all(|p| p.file_name().unwrap().to_str().unwrap().contains("sensor")));
    }

    #[test]
    fn stride_selects_every_nth_frame() {
        let (scan, truth, db) = scene();
        let dir = tempfile::tempdir().unwrap();
        let options = OverlayOptions { stride: 2, ..OverlayOptions::default() };
        let written = render_overlays(&scan, &truth, &db, dir.path(), &options).unwrap();
        let names: Vec<_> = written
            .iter()
            .map(|p| p.file_name().unwrap().to_str().unwrap().to_string())
            .collect();
        assert_eq!(names.len(), 6); // frames 0 and 2, three files each
        assert!(names.iter().all(|n| n.starts_with("frame_0000") || n.starts_with("frame_0002")));
    }

    #[test]
    fn overlay_bytes_are_deterministic() {
        let (scan, truth, db) = scene();
        let d1 = tempfile::tempdir().unwrap();
        let d2 = tempfile::tempdir().unwrap();
        let w1 = render_overlays(&scan, &truth, &db, d1.path(), &OverlayOptions::default()).unwrap();
        let w2 = render_overlays(&scan, &truth, &db, d2.path(), &OverlayOptions::default()).unwrap();
        assert_eq!(w1.len(), w2.len());
        for (a, b) in w1.iter().zip(&w2) {
            assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
        }
    }

    #[test]
    fn unknown_object_id_is_an_error() {
        let (scan, mut truth, db) = scene();
        truth.objects[0].object_id = "ghost".into();
        assert!(matches!(
            compose_scene(&scan, &truth, &db, 0.02),
            Err(OverlayError::UnknownObject { .. })
        ));
    }

    #[test]
    fn outline_is_a_thin_boundary() {
        let mut mask = Mask::new_empty(8, 8);
        for y in 2..6 {
            for x in 2..6 {
                mask.values[y * 8 + x] = true;
            }
        }
        let edge = outline(&mask);
        let count = edge.values.iter().filter(|v| **v).count();
        assert_eq!(count, 12); // 4x4 block has 12 boundary pixels
        assert!(!edge.get(3, 3) && !edge.get(4, 4));
        assert!(edge.get(2, 2) && edge.get(5, 5));
    }
}
