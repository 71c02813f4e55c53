//! Mesh file I/O: PLY (ASCII and binary little-endian, with an optional
//! per-vertex `instance_id` label) and OBJ (fan-triangulated on read).

mod obj;
mod ply;

pub use obj::{read_obj, write_obj};
pub use ply::{read_ply, write_ply, LabeledMesh, PlyFormat};

use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },
    #[error("{path}: unsupported mesh format (expected .ply or .obj)")]
    UnsupportedFormat { path: String },
    #[error(transparent)]
    Geometry(#[from] crate::geometry::GeometryError),
}

impl IoError {
    pub(crate) fn file(path: &Path, source: std::io::Error) -> Self {
        IoError::File { path: path.display().to_string(), source }
    }

    pub(crate) fn parse(path: &Path, line: usize, message: impl Into<String>) -> Self {
        IoError::Parse {
            path: path.display().to_string(),
            line,
            message: message.into(),
        }
    }
}

/// Reads a mesh by extension: `.ply` (labels preserved) or `.obj`.
pub fn read_mesh(path: &Path) -> Result<LabeledMesh, IoError> {
    match path.extension().and_then(|e| e.to_str()) {
        Some(e) if e.eq_ignore_ascii_case("ply") => read_ply(path),
        Some(e) if e.eq_ignore_ascii_case("obj") => {
            Ok(LabeledMesh { mesh: read_obj(path)?, labels: None })
        }
        _ => Err(IoError::UnsupportedFormat { path: path.display().to_string() }),
    }
}
