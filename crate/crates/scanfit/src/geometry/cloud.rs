use nalgebra::Point3;

use super::{GeometryError, Pose9};

/// A plain set of 3D points.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointCloud {
    pub points: Vec<Point3<f64>>,
}

impl PointCloud {
    pub fn new(points: Vec<Point3<f64>>) -> Self {
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Axis-aligned bounds as (min, max).
    pub fn aabb(&self) -> Result<(Point3<f64>, Point3<f64>), GeometryError> {
        let mut iter = self.points.iter();
        let first = *iter.next().ok_or(GeometryError::EmptyCloud)?;
        let mut lo = first;
        let mut hi = first;
        for p in iter {
            for k in 0..3 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        Ok((lo, hi))
    }

    /// Length of the axis-aligned bounding-box diagonal.
    pub fn aabb_diagonal(&self) -> Result<f64, GeometryError> {
        let (lo, hi) = self.aabb()?;
        Ok((hi - lo).norm())
    }

    /// Rescales the cloud about the center of its bounds so the bounding-box
    /// diagonal becomes exactly 1. Shape comparisons use this so that two
    /// clouds are compared scale-free.
    pub fn normalized_to_unit_diagonal(&self) -> Result<PointCloud, GeometryError> {
        let (lo, hi) = self.aabb()?;
        let diag = (hi - lo).norm();
        if diag <= 0.0 {
            // A single repeated point: map everything onto the origin.
            return Ok(PointCloud::new(vec![Point3::origin(); self.points.len()]));
        }
        let center = (lo.coords + hi.coords) * 0.5;
        let inv = 1.0 / diag;
        Ok(PointCloud::new(
            self.points
                .iter()
                .map(|p| Point3::from((p.coords - center) * inv))
                .collect(),
        ))
    }

    /// Returns a copy with every point mapped through `pose`.
    pub fn transformed(&self, pose: &Pose9) -> PointCloud {
        PointCloud::new(self.points.iter().map(|p| pose.apply(p)).collect())
    }

    /// Fails if any coordinate is NaN or infinite.
    pub fn check_finite(&self) -> Result<(), GeometryError> {
        for (i, p) in self.points.iter().enumerate() {
            if !(p.x.is_finite() && p.y.is_finite() && p.z.is_finite()) {
                return Err(GeometryError::NonFinitePoint(i));
            }
        }
        Ok(())
    }
}

impl From<Vec<Point3<f64>>> for PointCloud {
    fn from(points: Vec<Point3<f64>>) -> Self {
        Self { points }
    }
}
