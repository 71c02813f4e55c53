use std::path::{Path, PathBuf};

use nalgebra::{Isometry3, Matrix3, Matrix4, Translation3, UnitQuaternion};
use serde::{Deserialize, Serialize};

use super::{Frame, ObjectAnnotation, RgbdScan, SceneError};
use crate::geometry::{Axis, Obb};
use crate::io::read_ply;
use crate::render::{load_depth_png, Camera};

/// Wire format of a scan manifest (one JSON file per scene). All paths are
/// relative to the manifest's directory. Depth frames are 16-bit PNG with
/// `depth_scale` meters per count and 0 as the invalid value.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanManifest {
    pub scene_id: String,
    pub gravity_axis: Axis,
    pub mesh: PathBuf,
    pub frames: Vec<FrameEntry>,
    pub annotations: Vec<AnnotationEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrameEntry {
    pub intrinsics: IntrinsicsEntry,
    /// 4×4 camera-to-world matrix, row-major.
    pub camera_to_world: [f64; 16],
    pub depth: PathBuf,
    pub depth_scale: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rgb: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntrinsicsEntry {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: usize,
    pub height: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnnotationEntry {
    pub id: String,
    pub class: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub obb: Option<ObbEntry>,
    /// Explicit vertex indices into the scene mesh.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub segment_indices: Option<Vec<u32>>,
    /// Alternatively, the `instance_id` vertex label identifying the object.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance_id: Option<i32>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObbEntry {
    pub center: [f64; 3],
    pub half_extents: [f64; 3],
    pub rotation_wxyz: [f64; 4],
}

impl ObbEntry {
    pub fn from_obb(obb: &Obb) -> Self {
        let q = obb.rotation.quaternion();
        Self {
            center: obb.center.coords.into(),
            half_extents: obb.half_extents.into(),
            rotation_wxyz: [q.w, q.i, q.j, q.k],
        }
    }

    fn to_obb(&self, path: &Path) -> Result<Obb, SceneError> {
        let [w, x, y, z] = self.rotation_wxyz;
        let q = nalgebra::Quaternion::new(w, x, y, z);
        if (q.norm() - 1.0).abs() > 1e-6 {
            return Err(invalid(path, format!("obb quaternion norm {} ≠ 1", q.norm())));
        }
        Obb::new(
            self.center.into(),
            self.half_extents.into(),
            UnitQuaternion::from_quaternion(q),
        )
        .map_err(|e| invalid(path, e.to_string()))
    }
}

fn invalid(path: &Path, message: impl Into<String>) -> SceneError {
    SceneError::ManifestInvalid {
        path: path.display().to_string(),
        message: message.into(),
    }
}

/// Decodes a row-major 4×4 rigid transform, checking the bottom row and
/// re-orthonormalizing the rotation (tolerating ~1e-6 drift).
pub(crate) fn isometry_from_rows(m: &[f64; 16], path: &Path) -> Result<Isometry3<f64>, SceneError> {
    let mat = Matrix4::from_row_slice(m);
    let bottom = mat.row(3);
    if (bottom[0].abs() + bottom[1].abs() + bottom[2].abs()) > 1e-9
        || (bottom[3] - 1.0).abs() > 1e-9
    {
        return Err(invalid(path, "pose bottom row is not [0 0 0 1]"));
    }
    let rot: Matrix3<f64> = mat.fixed_view::<3, 3>(0, 0).into();
    let det = rot.determinant();
    if (det - 1.0).abs() > 1e-3 {
        return Err(invalid(path, format!("pose rotation determinant {det} ≠ 1")));
    }
    let ortho_err = (rot.transpose() * rot - Matrix3::identity()).norm();
    if ortho_err > 1e-3 {
        return Err(invalid(path, format!("pose rotation not orthonormal (err {ortho_err})")));
    }
    let q = UnitQuaternion::from_matrix(&rot);
    let t = Translation3::new(m[3], m[7], m[11]);
    Ok(Isometry3::from_parts(t, q))
}

pub(crate) fn isometry_to_rows(iso: &Isometry3<f64>) -> [f64; 16] {
    let m = iso.to_homogeneous();
    let mut out = [0.0; 16];
    for r in 0..4 {
        for c in 0..4 {
            out[r * 4 + c] = m[(r, c)];
        }
    }
    out
}

/// Loads a scan from its manifest: decodes every depth frame to meters,
/// reads the scene mesh (with instance labels when present), and resolves
/// annotations' segmentations.
pub fn load_scan(manifest_path: &Path) -> Result<RgbdScan, SceneError> {
    let text = std::fs::read_to_string(manifest_path).map_err(|_| SceneError::MissingAsset {
        path: manifest_path.display().to_string(),
    })?;
    let manifest: ScanManifest =
        serde_json::from_str(&text).map_err(|e| invalid(manifest_path, e.to_string()))?;
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));

    let mesh_path = base.join(&manifest.mesh);
    if !mesh_path.exists() {
        return Err(SceneError::MissingAsset { path: mesh_path.display().to_string() });
    }
    let labeled = read_ply(&mesh_path)?;

    let mut frames = Vec::with_capacity(manifest.frames.len());
    for entry in &manifest.frames {
        if !(entry.depth_scale > 0.0) {
            return Err(invalid(
                manifest_path,
                format!("depth_scale must be > 0, got {}", entry.depth_scale),
            ));
        }
        let world_to_camera = isometry_from_rows(&entry.camera_to_world, manifest_path)?.inverse();
        let i = &entry.intrinsics;
        let camera = Camera::new(i.fx, i.fy, i.cx, i.cy, i.width, i.height, world_to_camera)
            .map_err(|e| invalid(manifest_path, e.to_string()))?;
        let depth_path = base.join(&entry.depth);
        if !depth_path.exists() {
            return Err(SceneError::MissingAsset { path: depth_path.display().to_string() });
        }
        let depth =
            load_depth_png(&depth_path, entry.depth_scale).map_err(|e| SceneError::DepthDecode {
                path: depth_path.display().to_string(),
                source: Box::new(e),
            })?;
        if depth.width != i.width || depth.height != i.height {
            return Err(invalid(
                manifest_path,
                format!(
                    "depth {} is {}x{}, intrinsics say {}x{}",
                    depth_path.display(),
                    depth.width,
                    depth.height,
                    i.width,
                    i.height
                ),
            ));
        }
        frames.push(Frame { camera, depth, rgb_path: entry.rgb.as_ref().map(|p| base.join(p)) });
    }

    let mut annotations = Vec::with_capacity(manifest.annotations.len());
    for entry in &manifest.annotations {
        let obb = entry.obb.as_ref().map(|o| o.to_obb(manifest_path)).transpose()?;
        let segmentation = match (&entry.segment_indices, entry.instance_id) {
            (Some(idx), _) => {
                for &i in idx {
                    if i as usize >= labeled.mesh.vertex_count() {
                        return Err(invalid(
                            manifest_path,
                            format!("annotation '{}' segment index {i} out of range", entry.id),
                        ));
                    }
                }
                Some(idx.clone())
            }
            (None, Some(label)) => {
                let labels =
                    labeled.labels.as_ref().ok_or_else(|| SceneError::UnknownInstanceLabel {
                        object: entry.id.clone(),
                        label,
                    })?;
                let idx: Vec<u32> = labels
                    .iter()
                    .enumerate()
                    .filter(|(_, &l)| l == label)
                    .map(|(i, _)| i as u32)
                    .collect();
                if idx.is_empty() {
                    return Err(SceneError::UnknownInstanceLabel {
                        object: entry.id.clone(),
                        label,
                    });
                }
                Some(idx)
            }
            (None, None) => None,
        };
        let ann = ObjectAnnotation {
            id: entry.id.clone(),
            class_label: entry.class.clone(),
            obb,
            segmentation,
            obb_derived: false,
            segmentation_derived: false,
        };
        ann.validate()?;
        annotations.push(ann);
    }

    Ok(RgbdScan {
        scene_id: manifest.scene_id,
        frames,
        scene_mesh: labeled.mesh,
        vertex_labels: labeled.labels,
        gravity: manifest.gravity_axis,
        annotations,
    })
}

/// Writes a manifest JSON (assets are expected to be written separately by
/// the caller; paths inside the manifest stay as given).
pub fn save_scan(manifest: &ScanManifest, path: &Path) -> Result<(), SceneError> {
    let text = serde_json::to_string_pretty(manifest)
        .map_err(|e| invalid(path, format!("serialization failed: {e}")))?;
    crate::ops::write_atomic(path, text.as_bytes()).map_err(|e| SceneError::ManifestInvalid {
        path: path.display().to_string(),
        message: format!("write failed: {e}"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::TriMesh;
    use crate::io::{write_ply, PlyFormat};
    use crate::render::{save_depth_png, DepthMap};
    use nalgebra::Point3;

    fn write_minimal_scene(dir: &Path) -> PathBuf {
        let mesh = TriMesh::new(
            vec![
                Point3::new(0.0, 0.0, 2.0),
                Point3::new(1.0, 0.0, 2.0),
                Point3::new(0.0, 1.0, 2.0),
            ],
            vec![[0, 1, 2]],
        )
        .unwrap();
        write_ply(&dir.join("mesh.ply"), &mesh, Some(&[1, 1, 1]), PlyFormat::BinaryLittleEndian)
            .unwrap();
        let depth = DepthMap::from_values(4, 3, vec![2.0; 12]);
        save_depth_png(&depth, &dir.join("depth0.png"), 0.001).unwrap();
        let manifest = ScanManifest {
            scene_id: "mini".into(),
            gravity_axis: Axis::Y,
            mesh: "mesh.ply".into(),
            frames: vec![FrameEntry {
                intrinsics: IntrinsicsEntry {
                    fx: 10.0,
                    fy: 10.0,
                    cx: 2.0,
                    cy: 1.5,
                    width: 4,
                    height: 3,
                },
                camera_to_world: isometry_to_rows(&Isometry3::identity()),
                depth: "depth0.png".into(),
                depth_scale: 0.001,
                rgb: None,
            }],
            annotations: vec![AnnotationEntry {
                id: "obj0".into(),
                class: "triangle".into(),
                obb: None,
                segment_indices: None,
                instance_id: Some(1),
            }],
        };
        let path = dir.join("scan.json");
        save_scan(&manifest, &path).unwrap();
        path
    }

    #[test]
    fn minimal_manifest_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_minimal_scene(dir.path());
        let scan = load_scan(&path).unwrap();
        assert_eq!(scan.scene_id, "mini");
        assert_eq!(scan.frames.len(), 1);
        assert_eq!(scan.scene_mesh.vertex_count(), 3);
        assert_eq!(scan.annotations.len(), 1);
        assert_eq!(scan.annotations[0].segmentation.as_deref(), Some(&[0u32, 1, 2][..]));
        assert_eq!(scan.frames[0].depth.get(0, 0), 2.0);

        // Saving the parsed manifest again produces identical JSON.
        let text1 = std::fs::read_to_string(&path).unwrap();
        let reparsed: ScanManifest = serde_json::from_str(&text1).unwrap();
        let path2 = dir.path().join("scan2.json");
        save_scan(&reparsed, &path2).unwrap();
        assert_eq!(text1, std::fs::read_to_string(&path2).unwrap());
    }

    #[test]
    fn missing_depth_file_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_minimal_scene(dir.path());
        std::fs::remove_file(dir.path().join("depth0.png")).unwrap();
        let err = load_scan(&path).unwrap_err();
        match err {
            SceneError::MissingAsset { path } => assert!(path.contains("depth0.png")),
            other => panic!("expected MissingAsset, got {other}"),
        }
    }

    #[test]
    fn annotation_without_supervision_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_minimal_scene(dir.path());
        let mut manifest: ScanManifest =
            serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        manifest.annotations[0].instance_id = None;
        save_scan(&manifest, &path).unwrap();
        assert!(matches!(load_scan(&path), Err(SceneError::NoSupervision { .. })));
    }

    #[test]
    fn bad_pose_matrix_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_minimal_scene(dir.path());
        let mut manifest: ScanManifest =
            serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        manifest.frames[0].camera_to_world[0] = 5.0; // not a rotation
        save_scan(&manifest, &path).unwrap();
        assert!(matches!(load_scan(&path), Err(SceneError::ManifestInvalid { .. })));
    }

    #[test]
    fn isometry_rows_round_trip() {
        let iso = Isometry3::from_parts(
            Translation3::new(1.0, -2.0, 0.5),
            UnitQuaternion::from_euler_angles(0.2, -0.4, 1.1),
        );
        let rows = isometry_to_rows(&iso);
        let back = isometry_from_rows(&rows, Path::new("test")).unwrap();
        assert!((back.translation.vector - iso.translation.vector).norm() < 1e-12);
        assert!(back.rotation.angle_to(&iso.rotation) < 1e-12);
    }
}
