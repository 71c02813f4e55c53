//! Synthetic scene generation: place database models inside a room shell,
//! render an orbiting depth trajectory, and emit the scan (in memory or on
//! disk) together with ground-truth annotations. Because the scene mesh
//! literally contains the placed model triangles, the correct retrieval and
//! pose are known by construction.

use std::path::{Path, PathBuf};

use nalgebra::{Point3, UnitQuaternion, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cad::{CadDatabase, CadError, CadModel};
use crate::geometry::{Axis, Obb, Pose9};
use crate::io::write_ply;
use crate::objective::{ObjectiveBreakdown, ObjectiveWeights};
use crate::pipeline::SceneAnnotations;
use crate::procgen::room_shell;
use crate::render::{render_depth, save_depth_png, Camera, DepthMap, RenderError};
use crate::scene::{
    AnnotationEntry, Frame, FrameEntry, IntrinsicsEntry, ObbEntry, ObjectAnnotation, RgbdScan,
    ScanManifest, SceneError,
};

pub const DEPTH_SCALE: f64 = 0.001;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synthetic scene spec: {0}")]
    Invalid(String),
    #[error("failed to read spec {path}: {source}")]
    SpecRead {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("failed to parse spec {path}: {source}")]
    SpecParse {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error(transparent)]
    Cad(#[from] CadError),
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error(transparent)]
    Io(#[from] crate::io::IoError),
    #[error("failed to write {path}: {source}")]
    Write {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Open-top room: floor at y = 0, interior centered on the origin.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ShellSpec {
    pub width: f64,
    pub depth: f64,
    pub height: f64,
}

/// One model instance placed in the scene.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlacedObject {
    pub id: String,
    pub model_id: String,
    pub class: String,
    pub pose: Pose9,
}

/// A circular camera trajectory around `target`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct OrbitSpec {
    pub count: usize,
    pub radius: f64,
    /// Eye height above the floor.
    pub height: f64,
    pub target: [f64; 3],
    pub fx: f64,
    pub fy: f64,
    pub width: usize,
    pub height_px: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SyntheticSceneSpec {
    pub scene_id: String,
    pub shell: ShellSpec,
    pub objects: Vec<PlacedObject>,
    pub cameras: OrbitSpec,
    /// Standard deviation of Gaussian depth noise in meters (0 = exact).
    #[serde(default)]
    pub noise_std: f64,
    #[serde(default)]
    pub seed: u64,
}

impl SyntheticSceneSpec {
    pub fn load(path: &Path) -> Result<Self, SynthError> {
        let text = std::fs::read_to_string(path).map_err(|source| SynthError::SpecRead {
            path: path.display().to_string(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| SynthError::SpecParse {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn validate(&self, db: &CadDatabase) -> Result<(), SynthError> {
        if self.cameras.count == 0 {
            return Err(SynthError::Invalid("camera count must be ≥ 1".into()));
        }
        if !(self.cameras.radius > 0.0) {
            return Err(SynthError::Invalid("orbit radius must be > 0".into()));
        }
        if !(self.cameras.fx > 0.0 && self.cameras.fy > 0.0)
            || self.cameras.width == 0
            || self.cameras.height_px == 0
        {
            return Err(SynthError::Invalid("camera intrinsics invalid".into()));
        }
        if !(self.noise_std >= 0.0) {
            return Err(SynthError::Invalid("noise_std must be ≥ 0".into()));
        }
        if !(self.shell.width > 0.0 && self.shell.depth > 0.0 && self.shell.height > 0.0) {
            return Err(SynthError::Invalid("shell dimensions must be positive".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for obj in &self.objects {
            if !seen.insert(obj.id.as_str()) {
                return Err(SynthError::Invalid(format!("duplicate object id '{}'", obj.id)));
            }
            let model = db.model(&obj.model_id)?;
            let posed = model.mesh.transformed(&obj.pose);
            let (lo, hi) = posed.aabb().expect("models are never empty");
            let tol = 1e-9;
            let (hw, hd) = (self.shell.width / 2.0, self.shell.depth / 2.0);
            if lo.x < -hw - tol
                || hi.x > hw + tol
                || lo.z < -hd - tol
                || hi.z > hd + tol
                || lo.y < -tol
                || hi.y > self.shell.height + tol
            {
                return Err(SynthError::Invalid(format!(
                    "object '{}' extends outside the shell (bounds {:?}..{:?})",
                    obj.id,
                    (lo.x, lo.y, lo.z),
                    (hi.x, hi.y, hi.z)
                )));
            }
        }
        Ok(())
    }
}

/// The exact oriented box of a posed model: canonical bounds are centered at
/// the origin, so the box center is the pose translation and the extents are
/// the canonical half extents under the per-axis scale. This is what a
/// dataset annotation would supply for the object.
fn ground_truth_obb(model: &CadModel, pose: &Pose9, id: &str) -> Result<Obb, SynthError> {
    Obb::new(
        Point3::from(pose.translation),
        model.half_extents().component_mul(&pose.scale),
        pose.rotation,
    )
    .map_err(|e| SynthError::Invalid(format!("object '{id}' has a degenerate box: {e}")))
}

/// A pose that stands the (canonically centered) model on the floor at
/// (x, z) with a yaw about gravity.
pub fn resting_pose(model: &CadModel, x: f64, z: f64, yaw: f64, scale: Vector3<f64>) -> Pose9 {
    let he = model.half_extents();
    Pose9 {
        translation: Vector3::new(x, he.y * scale.y, z),
        rotation: UnitQuaternion::from_axis_angle(&Vector3::y_axis(), yaw),
        scale,
    }
}

fn orbit_cameras(spec: &OrbitSpec) -> Result<Vec<Camera>, SynthError> {
    let target = Point3::new(spec.target[0], spec.target[1], spec.target[2]);
    (0..spec.count)
        .map(|j| {
            let angle = 2.0 * std::f64::consts::PI * j as f64 / spec.count as f64;
            let eye = Point3::new(
                target.x + spec.radius * angle.cos(),
                spec.height,
                target.z + spec.radius * angle.sin(),
            );
            Camera::look_at(
                spec.fx,
                spec.fy,
                spec.width as f64 / 2.0,
                spec.height_px as f64 / 2.0,
                spec.width,
                spec.height_px,
                eye,
                target,
                Vector3::y(),
            )
            .map_err(SynthError::from)
        })
        .collect()
}

fn apply_noise(depth: &mut DepthMap, noise_std: f64, seed: u64, frame: usize) {
    if noise_std <= 0.0 {
        return;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(frame as u64 + 1);
    let normal = Normal::new(0.0, noise_std).expect("validated std");
    for v in &mut depth.values {
        if DepthMap::is_valid_value(*v) {
            *v = (*v + normal.sample(&mut rng)).max(1e-3);
        }
    }
}

/// Assembles the scene in memory: shell + posed models merged into one
/// instance-labeled mesh, an orbiting depth trajectory rendered from it, and
/// the ground-truth annotation document.
pub fn build_scene(
    spec: &SyntheticSceneSpec,
    db: &CadDatabase,
) -> Result<(RgbdScan, SceneAnnotations), SynthError> {
    spec.validate(db)?;

    let mut mesh = room_shell(spec.shell.width, spec.shell.depth, spec.shell.height);
    let mut labels = vec![-1i32; mesh.vertices.len()];
    let mut annotations = Vec::with_capacity(spec.objects.len());
    for (i, obj) in spec.objects.iter().enumerate() {
        let model = db.model(&obj.model_id)?;
        let posed = model.mesh.transformed(&obj.pose);
        let first = mesh.vertices.len() as u32;
        mesh.append(&posed);
        labels.extend(std::iter::repeat(i as i32).take(posed.vertices.len()));
        annotations.push(ObjectAnnotation {
            id: obj.id.clone(),
            class_label: obj.class.clone(),
            obb: Some(ground_truth_obb(model, &obj.pose, &obj.id)?),
            segmentation: Some((first..mesh.vertices.len() as u32).collect()),
            obb_derived: false,
            segmentation_derived: false,
        });
    }

    let cameras = orbit_cameras(&spec.cameras)?;
    let identity = Pose9::identity();
    let frames: Vec<Frame> = cameras
        .into_iter()
        .enumerate()
        .map(|(j, camera)| {
            let mut depth = render_depth(&[(&mesh, identity)], &camera);
            apply_noise(&mut depth, spec.noise_std, spec.seed, j);
            Frame { camera, depth, rgb_path: None }
        })
        .collect();

    let scan = RgbdScan {
        scene_id: spec.scene_id.clone(),
        frames,
        scene_mesh: mesh,
        vertex_labels: Some(labels),
        gravity: Axis::Y,
        annotations,
    };

    let truth = SceneAnnotations {
        scene_id: spec.scene_id.clone(),
        preset: None,
        weights: ObjectiveWeights::default(),
        objects: spec
            .objects
            .iter()
            .map(|obj| crate::pipeline::ObjectResult {
                object_id: obj.id.clone(),
                class: obj.class.clone(),
                model_id: obj.model_id.clone(),
                pose: obj.pose,
                cluster_id: None,
                breakdown: ObjectiveBreakdown { l_dpt: 0.0, l_sil: 0.0, l_cd: 0.0, total: 0.0 },
                top_k: Vec::new(),
            })
            .collect(),
        clusters: Vec::new(),
        failures: Vec::new(),
    };
    Ok((scan, truth))
}

/// Renders the scene and writes the full scan to `out_dir`: the labeled mesh
/// (`scene.ply`), quantized 16-bit depth frames, the scan manifest, and the
/// ground-truth annotations. Returns the manifest path.
pub fn write_scene(
    spec: &SyntheticSceneSpec,
    db: &CadDatabase,
    out_dir: &Path,
) -> Result<PathBuf, SynthError> {
    let (scan, truth) = build_scene(spec, db)?;
    std::fs::create_dir_all(out_dir).map_err(|source| SynthError::Write {
        path: out_dir.display().to_string(),
        source,
    })?;

    let mesh_name = "scene.ply";
    write_ply(
        &out_dir.join(mesh_name),
        &scan.scene_mesh,
        scan.vertex_labels.as_deref(),
        crate::io::PlyFormat::BinaryLittleEndian,
    )?;

    let mut frames = Vec::with_capacity(scan.frames.len());
    for (j, frame) in scan.frames.iter().enumerate() {
        let depth_name = format!("depth_{j:04}.png");
        save_depth_png(&frame.depth, &out_dir.join(&depth_name), DEPTH_SCALE)?;
        let cam = &frame.camera;
        frames.push(FrameEntry {
            intrinsics: IntrinsicsEntry {
                fx: cam.fx,
                fy: cam.fy,
                cx: cam.cx,
                cy: cam.cy,
                width: cam.width,
                height: cam.height,
            },
            camera_to_world: crate::scene::isometry_to_rows(&cam.camera_to_world()),
            depth: PathBuf::from(depth_name),
            depth_scale: DEPTH_SCALE,
            rgb: None,
        });
    }

    let manifest = ScanManifest {
        scene_id: spec.scene_id.clone(),
        gravity_axis: Axis::Y,
        mesh: PathBuf::from(mesh_name),
        frames,
        annotations: spec
            .objects
            .iter()
            .enumerate()
            .map(|(i, obj)| {
                let obb = scan.annotations[i].obb.as_ref().map(ObbEntry::from_obb);
                AnnotationEntry {
                    id: obj.id.clone(),
                    class: obj.class.clone(),
                    obb,
                    segment_indices: None,
                    instance_id: Some(i as i32),
                }
            })
            .collect(),
    };
    let manifest_path = out_dir.join("manifest.json");
    crate::scene::save_scan(&manifest, &manifest_path)?;
    truth
        .save(&out_dir.join("ground_truth.json"))
        .map_err(|e| SynthError::Invalid(e.to_string()))?;
    Ok(manifest_path)
}
