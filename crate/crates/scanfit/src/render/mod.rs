//! Software depth rendering: pinhole cameras, a z-buffer triangle
//! rasterizer, depth-map fusion, and 16-bit PNG import/export.
//!
//! Depth is camera-space z in meters (not ray length), matching how sensor
//! depth frames are stored. A depth value ≤ 0 or non-finite marks an invalid
//! pixel.

mod camera;
mod depth;
mod export;
mod raster;

pub use camera::Camera;
pub use depth::{fuse_depth, DepthMap, Mask};
pub use export::{load_depth_png, save_depth_png, save_mask_png};
pub use raster::{render_depth, render_depth_with_owners, render_mask};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("camera intrinsics invalid: fx={fx}, fy={fy}, {width}x{height}")]
    InvalidCamera { fx: f64, fy: f64, width: usize, height: usize },
    #[error("depth map dimensions differ: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("camera look-at direction is degenerate")]
    DegenerateLookAt,
    #[error("failed to read depth image {path}: {source}")]
    DepthRead {
        path: String,
        #[source]
        source: image::ImageError,
    },
    #[error("failed to write image {path}: {source}")]
    ImageWrite {
        path: String,
        #[source]
        source: image::ImageError,
    },
    #[error("depth image {path} is not 16-bit grayscale")]
    DepthFormat { path: String },
}
