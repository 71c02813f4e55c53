use nalgebra::{Point3, UnitQuaternion, Vector3};

use super::{Axis, GeometryError, PointCloud};

/// Smallest half extent a fitted box may report; avoids zero-thickness boxes
/// for perfectly planar objects.
const MIN_HALF_EXTENT: f64 = 1e-12;

/// An oriented bounding box: a rotated frame centered at `center` with the
/// box spanning ±`half_extents` along the frame axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Obb {
    pub center: Point3<f64>,
    pub half_extents: Vector3<f64>,
    pub rotation: UnitQuaternion<f64>,
}

impl Obb {
    pub fn new(
        center: Point3<f64>,
        half_extents: Vector3<f64>,
        rotation: UnitQuaternion<f64>,
    ) -> Result<Self, GeometryError> {
        if !(half_extents.x > 0.0 && half_extents.y > 0.0 && half_extents.z > 0.0) {
            return Err(GeometryError::NonPositiveExtent(
                half_extents.x,
                half_extents.y,
                half_extents.z,
            ));
        }
        Ok(Self { center, half_extents, rotation })
    }

    /// Box-frame coordinates of a world point.
    pub fn to_local(&self, p: &Point3<f64>) -> Point3<f64> {
        Point3::from(self.rotation.inverse() * (p - self.center))
    }

    /// The eight corners; corner `i` takes the +half-extent side on axis `k`
    /// iff bit `k` of `i` is set.
    pub fn corners(&self) -> [Point3<f64>; 8] {
        let mut out = [Point3::origin(); 8];
        for (i, corner) in out.iter_mut().enumerate() {
            let local = Vector3::new(
                if i & 1 != 0 { self.half_extents.x } else { -self.half_extents.x },
                if i & 2 != 0 { self.half_extents.y } else { -self.half_extents.y },
                if i & 4 != 0 { self.half_extents.z } else { -self.half_extents.z },
            );
            *corner = Point3::from(self.center.coords + self.rotation * local);
        }
        out
    }

    /// Volume of the box.
    pub fn volume(&self) -> f64 {
        8.0 * self.half_extents.x * self.half_extents.y * self.half_extents.z
    }

    /// Signed yaw of the box frame about the given axis, assuming the
    /// rotation is a pure turn about that axis (as produced by the fitter).
    pub fn yaw_about(&self, up: Axis) -> f64 {
        self.rotation.scaled_axis().dot(&up.unit())
    }
}

/// Indices of the points whose box-frame coordinates satisfy
/// `|c_k| ≤ half_extents_k + margin` on every axis. The box is closed:
/// points exactly on a face are selected.
pub fn points_in_obb(obb: &Obb, cloud: &PointCloud, margin: f64) -> Vec<usize> {
    cloud
        .points
        .iter()
        .enumerate()
        .filter(|(_, p)| {
            let l = obb.to_local(p);
            (0..3).all(|k| l[k].abs() <= obb.half_extents[k] + margin)
        })
        .map(|(i, _)| i)
        .collect()
}

/// Fits a gravity-aligned oriented box: the minimum-area rectangle of the
/// cloud projected onto the plane orthogonal to `up`, extruded to the
/// cloud's extent along `up`.
///
/// The rectangle orientation comes from scanning convex-hull edges (the
/// minimum-area rectangle always has a side collinear with one); the yaw is
/// then normalized into [0°, 90°) — a rectangle is invariant under
/// quarter turns — and the final extents are recomputed over *all* points in
/// the chosen frame, so the box always contains the full cloud.
pub fn fit_obb_gravity_aligned(cloud: &PointCloud, up: Axis) -> Result<Obb, GeometryError> {
    if cloud.is_empty() {
        return Err(GeometryError::EmptyCloud);
    }
    let [a0, a1] = up.complement();
    let (i0, i1) = (a0.index(), a1.index());

    let planar: Vec<[f64; 2]> = cloud.points.iter().map(|p| [p[i0], p[i1]]).collect();
    let hull = convex_hull_2d(&planar);
    if hull.len() < 3 {
        return Err(GeometryError::DegenerateCloud);
    }

    // Candidate direction per hull edge; track the minimum rectangle area.
    let mut best: Option<(f64, f64)> = None; // (area, edge angle)
    for e in 0..hull.len() {
        let p = hull[e];
        let q = hull[(e + 1) % hull.len()];
        let (dx, dy) = (q[0] - p[0], q[1] - p[1]);
        let len = (dx * dx + dy * dy).sqrt();
        if len <= 0.0 {
            continue;
        }
        let (c, s) = (dx / len, dy / len);
        let (mut lo_u, mut hi_u) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut lo_v, mut hi_v) = (f64::INFINITY, f64::NEG_INFINITY);
        for h in &hull {
            let u = c * h[0] + s * h[1];
            let v = -s * h[0] + c * h[1];
            lo_u = lo_u.min(u);
            hi_u = hi_u.max(u);
            lo_v = lo_v.min(v);
            hi_v = hi_v.max(v);
        }
        let area = (hi_u - lo_u) * (hi_v - lo_v);
        if best.is_none_or(|(b, _)| area < b) {
            best = Some((area, dy.atan2(dx)));
        }
    }
    let (_, phi) = best.ok_or(GeometryError::DegenerateCloud)?;

    // Lift the planar angle to a 3D yaw about the up axis. The box frame's
    // first planar axis is axis `a0` turned by the yaw; pick the yaw whose
    // turned axis matches the winning edge direction.
    let u3 = a0.unit();
    let edge3 = u3 * phi.cos() + a1.unit() * phi.sin();
    let mut yaw = u3.cross(&edge3).dot(&up.unit()).atan2(u3.dot(&edge3));
    yaw = yaw.rem_euclid(std::f64::consts::FRAC_PI_2);
    if yaw >= std::f64::consts::FRAC_PI_2 {
        yaw -= std::f64::consts::FRAC_PI_2;
    }
    let rotation = UnitQuaternion::from_axis_angle(&nalgebra::Unit::new_normalize(up.unit()), yaw);

    // Recompute bounds over every point in the chosen frame.
    let inv = rotation.inverse();
    let mut lo = Vector3::repeat(f64::INFINITY);
    let mut hi = Vector3::repeat(f64::NEG_INFINITY);
    for p in &cloud.points {
        let l = inv * p.coords;
        for k in 0..3 {
            lo[k] = lo[k].min(l[k]);
            hi[k] = hi[k].max(l[k]);
        }
    }
    let center_local = (lo + hi) * 0.5;
    let half_extents = ((hi - lo) * 0.5).map(|e| e.max(MIN_HALF_EXTENT));
    Ok(Obb {
        center: Point3::from(rotation * center_local),
        half_extents,
        rotation,
    })
}

/// Andrew monotone-chain convex hull; collinear points are dropped, so the
/// result is strictly convex. Returns fewer than 3 points for degenerate
/// input.
fn convex_hull_2d(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut pts: Vec<[f64; 2]> = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| {
        (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
    };
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(pts.len() * 2);
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    // Upper chain; never pop into the lower chain.
    let lower = hull.len();
    for &p in pts.iter().rev().skip(1) {
        while hull.len() > lower && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop(); // last point duplicates the first
    hull
}
