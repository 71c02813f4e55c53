use nalgebra::{Matrix3, Matrix4, Point3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use super::GeometryError;

/// A 9-DoF transform from a model's canonical frame into the world:
/// per-axis scale first, then rotation, then translation.
///
/// `world = translation + rotation · (scale ⊙ canonical)`
///
/// Scale is applied along the canonical axes, so the composition is not a
/// similarity transform in general and two poses do not compose into a third.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose9 {
    pub translation: Vector3<f64>,
    pub rotation: UnitQuaternion<f64>,
    pub scale: Vector3<f64>,
}

impl Pose9 {
    pub fn new(
        translation: Vector3<f64>,
        rotation: UnitQuaternion<f64>,
        scale: Vector3<f64>,
    ) -> Result<Self, GeometryError> {
        if !(scale.x > 0.0 && scale.y > 0.0 && scale.z > 0.0) {
            return Err(GeometryError::NonPositiveScale(scale.x, scale.y, scale.z));
        }
        Ok(Self { translation, rotation, scale })
    }

    pub fn identity() -> Self {
        Self {
            translation: Vector3::zeros(),
            rotation: UnitQuaternion::identity(),
            scale: Vector3::new(1.0, 1.0, 1.0),
        }
    }

    /// Pure translation.
    pub fn from_translation(t: Vector3<f64>) -> Self {
        Self { translation: t, ..Self::identity() }
    }

    /// Rotation by `angle` radians about `axis` (must be nonzero), no
    /// translation or scale.
    pub fn from_axis_angle(axis: Vector3<f64>, angle: f64) -> Self {
        Self {
            rotation: UnitQuaternion::from_axis_angle(&nalgebra::Unit::new_normalize(axis), angle),
            ..Self::identity()
        }
    }

    /// Maps a canonical-frame point into the world.
    pub fn apply(&self, p: &Point3<f64>) -> Point3<f64> {
        Point3::from(self.translation + self.rotation * self.scale.component_mul(&p.coords))
    }

    /// Maps a world point back into the canonical frame. Exact inverse of
    /// `apply` (up to floating-point error); the inverse of a 9-DoF pose is
    /// not itself a 9-DoF pose because scale acts before rotation.
    pub fn apply_inverse(&self, q: &Point3<f64>) -> Point3<f64> {
        let r = self.rotation.inverse() * (q.coords - self.translation);
        Point3::from(r.component_div(&self.scale))
    }

    /// Rotates a canonical-frame direction into the world (scale + rotation,
    /// no translation).
    pub fn apply_vector(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * self.scale.component_mul(v)
    }

    /// The equivalent 4×4 homogeneous matrix: linear part `R · diag(s)`,
    /// last column the translation.
    pub fn to_homogeneous(&self) -> Matrix4<f64> {
        let linear: Matrix3<f64> =
            self.rotation.to_rotation_matrix().into_inner() * Matrix3::from_diagonal(&self.scale);
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&linear);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.translation);
        m
    }

    /// Returns the pose with `delta` yaw (radians about the given up axis)
    /// composed on the left of the rotation.
    pub fn with_extra_yaw(&self, up: Vector3<f64>, delta: f64) -> Self {
        let spin = UnitQuaternion::from_axis_angle(&nalgebra::Unit::new_normalize(up), delta);
        Self { rotation: spin * self.rotation, ..*self }
    }

    /// Quaternion coefficients in (w, x, y, z) order, as serialized.
    pub fn quaternion_wxyz(&self) -> [f64; 4] {
        let q = self.rotation.quaternion();
        [q.w, q.i, q.j, q.k]
    }
}

impl Default for Pose9 {
    fn default() -> Self {
        Self::identity()
    }
}

/// Wire form of a pose: translation in meters, rotation as a unit quaternion
/// in (w, x, y, z) order, per-axis scale. The quaternion norm is checked on
/// read (up to 1e-6 drift for hand-written files) but the coefficients are
/// kept bit-exact, so a save/load round trip reproduces the pose exactly.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct PoseWire {
    translation: [f64; 3],
    rotation_wxyz: [f64; 4],
    scale: [f64; 3],
}

impl Serialize for Pose9 {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        PoseWire {
            translation: self.translation.into(),
            rotation_wxyz: self.quaternion_wxyz(),
            scale: self.scale.into(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Pose9 {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let wire = PoseWire::deserialize(deserializer)?;
        let [w, x, y, z] = wire.rotation_wxyz;
        let q = nalgebra::Quaternion::new(w, x, y, z);
        let norm = q.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > 1e-6 {
            return Err(serde::de::Error::custom(format!(
                "rotation quaternion norm {norm} is not 1"
            )));
        }
        let scale = Vector3::from(wire.scale);
        Pose9::new(
            Vector3::from(wire.translation),
            UnitQuaternion::new_unchecked(q),
            scale,
        )
        .map_err(serde::de::Error::custom)
    }
}
