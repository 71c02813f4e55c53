//! Geometric substrate: meshes, point clouds, 9-DoF transforms, oriented
//! boxes, surface sampling and Chamfer distances.
//!
//! Everything here is a pure function of its inputs; values are immutable
//! after construction and safe to share across threads.

mod chamfer;
mod cloud;
mod kdtree;
mod mesh;
mod obb;
mod pose;
mod sample;

pub use chamfer::{chamfer_one_way, chamfer_symmetric};
pub use cloud::PointCloud;
pub use kdtree::KdTree3;
pub use mesh::TriMesh;
pub use obb::{fit_obb_gravity_aligned, points_in_obb, Obb};
pub use pose::Pose9;
pub use sample::sample_surface;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised by the geometric primitives.
#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("mesh face {face} references vertex {index}, but only {count} vertices exist")]
    FaceIndexOutOfRange { face: usize, index: u32, count: usize },
    #[error("mesh face {face} references vertex {index} more than once")]
    DegenerateFace { face: usize, index: u32 },
    #[error("vertex label count {labels} does not match vertex count {vertices}")]
    LabelCountMismatch { labels: usize, vertices: usize },
    #[error("mesh has no triangles with positive area")]
    ZeroAreaMesh,
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("point cloud is degenerate: projected points are collinear")]
    DegenerateCloud,
    #[error("pose scale must be strictly positive, got ({0}, {1}, {2})")]
    NonPositiveScale(f64, f64, f64),
    #[error("oriented box half extents must be strictly positive, got ({0}, {1}, {2})")]
    NonPositiveExtent(f64, f64, f64),
    #[error("point cloud contains a non-finite coordinate at index {0}")]
    NonFinitePoint(usize),
}

/// One of the three canonical coordinate axes, used to declare gravity /
/// up directions for scans and CAD databases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    pub fn unit(self) -> nalgebra::Vector3<f64> {
        let mut v = nalgebra::Vector3::zeros();
        v[self.index()] = 1.0;
        v
    }

    /// The other two axes, in ascending index order.
    pub fn complement(self) -> [Axis; 2] {
        match self {
            Axis::X => [Axis::Y, Axis::Z],
            Axis::Y => [Axis::X, Axis::Z],
            Axis::Z => [Axis::X, Axis::Y],
        }
    }
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Axis::X => write!(f, "x"),
            Axis::Y => write!(f, "y"),
            Axis::Z => write!(f, "z"),
        }
    }
}

impl std::str::FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "x" => Ok(Axis::X),
            "y" => Ok(Axis::Y),
            "z" => Ok(Axis::Z),
            other => Err(format!("unknown axis '{other}', expected x, y or z")),
        }
    }
}
