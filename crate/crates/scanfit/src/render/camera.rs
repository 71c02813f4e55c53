use nalgebra::{Isometry3, Matrix3, Point3, UnitQuaternion, Vector3};

use super::RenderError;

/// A pinhole camera: intrinsics in pixels plus the world-to-camera rigid
/// transform. Camera space follows the computer-vision convention — x right,
/// y down, z forward — so visible points have positive z and project to
/// `u = fx·x/z + cx`, `v = fy·y/z + cy` with the origin at the image's
/// top-left corner.
#[derive(Debug, Clone, PartialEq)]
pub struct Camera {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: usize,
    pub height: usize,
    pub world_to_camera: Isometry3<f64>,
}

impl Camera {
    pub fn new(
        fx: f64,
        fy: f64,
        cx: f64,
        cy: f64,
        width: usize,
        height: usize,
        world_to_camera: Isometry3<f64>,
    ) -> Result<Self, RenderError> {
        if !(fx > 0.0 && fy > 0.0) || width == 0 || height == 0 {
            return Err(RenderError::InvalidCamera { fx, fy, width, height });
        }
        Ok(Self { fx, fy, cx, cy, width, height, world_to_camera })
    }

    /// A camera at `eye` looking toward `target`, with `up` fixing the roll.
    /// Fails if the view direction is zero or parallel to `up`.
    pub fn look_at(
        fx: f64,
        fy: f64,
        cx: f64,
        cy: f64,
        width: usize,
        height: usize,
        eye: Point3<f64>,
        target: Point3<f64>,
        up: Vector3<f64>,
    ) -> Result<Self, RenderError> {
        let forward = target - eye;
        if forward.norm() < 1e-12 {
            return Err(RenderError::DegenerateLookAt);
        }
        let z_cam = forward.normalize();
        let x_raw = z_cam.cross(&up);
        if x_raw.norm() < 1e-9 {
            return Err(RenderError::DegenerateLookAt);
        }
        let x_cam = x_raw.normalize();
        let y_cam = z_cam.cross(&x_cam);
        let rot_c2w = Matrix3::from_columns(&[x_cam, y_cam, z_cam]);
        let q_c2w = UnitQuaternion::from_matrix(&rot_c2w);
        let camera_to_world = Isometry3::from_parts(eye.coords.into(), q_c2w);
        Self::new(fx, fy, cx, cy, width, height, camera_to_world.inverse())
    }

    pub fn camera_to_world(&self) -> Isometry3<f64> {
        self.world_to_camera.inverse()
    }

    /// World point into camera space.
    pub fn to_camera(&self, p: &Point3<f64>) -> Point3<f64> {
        self.world_to_camera.transform_point(p)
    }

    /// Projects a camera-space point with positive z to pixel coordinates.
    pub fn project_camera_point(&self, c: &Point3<f64>) -> Option<(f64, f64)> {
        if c.z <= 0.0 {
            return None;
        }
        Some((self.fx * c.x / c.z + self.cx, self.fy * c.y / c.z + self.cy))
    }

    /// True if (u, v) lies inside the image rectangle.
    pub fn in_image(&self, u: f64, v: f64) -> bool {
        u >= 0.0 && v >= 0.0 && u < self.width as f64 && v < self.height as f64
    }

    /// Back-projects pixel (x, y) at depth z into camera space, sampling at
    /// the pixel center.
    pub fn unproject_pixel(&self, x: usize, y: usize, z: f64) -> Point3<f64> {
        let u = x as f64 + 0.5;
        let v = y as f64 + 0.5;
        Point3::new((u - self.cx) / self.fx * z, (v - self.cy) / self.fy * z, z)
    }
}
