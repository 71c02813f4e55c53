//! Scene data model: an RGB-D scan (frames + fused mesh + annotations),
//! manifest loading/saving, frame selection, supervision derivation
//! (box ↔ segmentation), and object removal.

mod manifest;
mod preprocess;

pub use manifest::{
    load_scan, save_scan, AnnotationEntry, FrameEntry, IntrinsicsEntry, ObbEntry, ScanManifest,
};
pub(crate) use manifest::isometry_to_rows;
pub use preprocess::{
    derive_missing_supervision, object_point_cloud, object_submesh, remove_object, select_frames,
};

use std::path::PathBuf;

use thiserror::Error;

use crate::geometry::{Axis, Obb, TriMesh};
use crate::render::{Camera, DepthMap};

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("manifest {path} invalid: {message}")]
    ManifestInvalid { path: String, message: String },
    #[error("missing asset referenced by manifest: {path}")]
    MissingAsset { path: String },
    #[error("failed to decode depth frame {path}: {source}")]
    DepthDecode {
        path: String,
        #[source]
        source: Box<crate::render::RenderError>,
    },
    #[error("object '{object}' is visible in no frame")]
    NoVisibleFrames { object: String },
    #[error("object '{object}' has an empty segmentation")]
    EmptySegmentation { object: String },
    #[error("object '{object}' has neither box nor segmentation")]
    NoSupervision { object: String },
    #[error("object '{object}' references instance label {label} absent from the mesh")]
    UnknownInstanceLabel { object: String, label: i32 },
    #[error(transparent)]
    Geometry(#[from] crate::geometry::GeometryError),
    #[error(transparent)]
    Render(#[from] crate::render::RenderError),
    #[error(transparent)]
    Io(#[from] crate::io::IoError),
}

/// One registered frame of the scan.
#[derive(Debug, Clone)]
pub struct Frame {
    pub camera: Camera,
    pub depth: DepthMap,
    pub rgb_path: Option<PathBuf>,
}

/// A scanned scene: registered frames, the fused triangle mesh (optionally
/// instance-labeled per vertex), the gravity direction, and the target
/// object annotations.
#[derive(Debug, Clone)]
pub struct RgbdScan {
    pub scene_id: String,
    pub frames: Vec<Frame>,
    pub scene_mesh: TriMesh,
    /// Per-vertex instance labels aligned with `scene_mesh.vertices`.
    pub vertex_labels: Option<Vec<i32>>,
    pub gravity: Axis,
    pub annotations: Vec<ObjectAnnotation>,
}

/// Supervision for one target object. At least one of `obb` and
/// `segmentation` must be supplied; the other can be derived.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectAnnotation {
    pub id: String,
    pub class_label: String,
    pub obb: Option<Obb>,
    /// Vertex indices into the scene mesh.
    pub segmentation: Option<Vec<u32>>,
    /// True when the respective field was derived rather than supplied.
    pub obb_derived: bool,
    pub segmentation_derived: bool,
}

impl ObjectAnnotation {
    pub fn validate(&self) -> Result<(), SceneError> {
        if self.obb.is_none() && self.segmentation.is_none() {
            return Err(SceneError::NoSupervision { object: self.id.clone() });
        }
        Ok(())
    }
}

/// The ordered frame subset evaluated for one object.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameSelection {
    pub object_id: String,
    /// Strictly increasing indices into `RgbdScan::frames`.
    pub indices: Vec<usize>,
}

impl FrameSelection {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}
