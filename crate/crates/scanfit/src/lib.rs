//! Automatic CAD model retrieval and alignment for RGB-D indoor scans.
//!
//! Given a scanned scene (posed depth frames plus a reconstructed mesh) and
//! per-object supervision (an oriented box and/or an instance segmentation),
//! this crate searches a CAD database for the model that best explains the
//! depth observations of each object, detects objects that share one shape so
//! they receive a common model, and refines a 9-DoF pose (per-axis scale,
//! rotation, translation) for every retrieved model.
//!
//! The search is render-and-compare: candidate models are inserted into the
//! scene in place of the real object, rendered into the selected depth frames
//! with a software z-buffer, and scored by a combination of depth residuals,
//! silhouette overlap, and a one-way Chamfer distance.
//!
//! The crate is organized as a library; see the `examples/` directory for a
//! runnable walkthrough of each capability and `src/main.rs` for the thin
//! command-line wrapper (`annotate`, `synth`, `evaluate`, `render-overlays`).

pub mod cad;
pub mod config;
pub mod evaluate;
pub mod geometry;
pub mod io;
pub mod objective;
pub mod ops;
pub mod overlays;
pub mod pipeline;
pub mod procgen;
pub mod render;
pub mod scene;
pub mod synth;

pub use config::EngineConfig;
pub use geometry::{Axis, Obb, PointCloud, Pose9, TriMesh};
pub use objective::{ObjectiveBreakdown, ObjectiveWeights};
pub use pipeline::{ObjectResult, SceneAnnotations};
