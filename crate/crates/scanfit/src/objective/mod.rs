//! The render-and-compare objective: a depth term against two references
//! (scene-mesh render and sensor depth), a silhouette IoU term, and a
//! one-way Chamfer term, combined with dataset-dependent weights.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{DepthMaskSemantics, SilhouetteMode};
use crate::geometry::{chamfer_one_way, PointCloud, Pose9, TriMesh};
use crate::render::{fuse_depth, render_depth, render_mask, Camera, DepthMap, Mask};
use crate::scene::{object_submesh, remove_object, FrameSelection, ObjectAnnotation, RgbdScan};

#[derive(Debug, Error)]
pub enum ObjectiveError {
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("frame selection is empty")]
    EmptySelection,
    #[error(transparent)]
    Geometry(#[from] crate::geometry::GeometryError),
    #[error(transparent)]
    Render(#[from] crate::render::RenderError),
    #[error(transparent)]
    Scene(#[from] crate::scene::SceneError),
}

/// Weights of the objective. `lambda_m` and `lambda_s` scale the depth
/// comparison against the scene-mesh render and the sensor depth inside the
/// depth term; `lambda_sil` and `lambda_cd` scale the silhouette and
/// Chamfer terms of the total.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ObjectiveWeights {
    pub lambda_m: f64,
    pub lambda_s: f64,
    pub lambda_sil: f64,
    pub lambda_cd: f64,
}

impl Default for ObjectiveWeights {
    fn default() -> Self {
        Self::scannet()
    }
}

impl ObjectiveWeights {
    /// Preset tuned for ScanNet-style scans.
    pub fn scannet() -> Self {
        Self { lambda_m: 0.75, lambda_s: 0.9, lambda_sil: 0.3, lambda_cd: 2.0 }
    }

    /// Preset tuned for ARKitScenes-style scans (noisier mesh, stronger
    /// sensor trust).
    pub fn arkitscenes() -> Self {
        Self { lambda_m: 0.3, lambda_s: 1.3, lambda_sil: 0.4, lambda_cd: 1.5 }
    }

    pub fn validate(&self) -> Result<(), ObjectiveError> {
        for (name, v) in [
            ("lambda_m", self.lambda_m),
            ("lambda_s", self.lambda_s),
            ("lambda_sil", self.lambda_sil),
            ("lambda_cd", self.lambda_cd),
        ] {
            if !(v >= 0.0) {
                return Err(ObjectiveError::InvalidWeights(format!("{name} = {v} < 0")));
            }
        }
        if self.lambda_m == 0.0 && self.lambda_s == 0.0 {
            return Err(ObjectiveError::InvalidWeights(
                "at least one of lambda_m, lambda_s must be > 0".into(),
            ));
        }
        Ok(())
    }
}

/// The per-term values of one evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveBreakdown {
    pub l_dpt: f64,
    pub l_sil: f64,
    pub l_cd: f64,
    pub total: f64,
}

impl ObjectiveBreakdown {
    pub fn combine(w: &ObjectiveWeights, l_dpt: f64, l_sil: f64, l_cd: f64) -> Self {
        Self {
            l_dpt,
            l_sil,
            l_cd,
            total: l_dpt + w.lambda_sil * l_sil + w.lambda_cd * l_cd,
        }
    }
}

/// Everything about one frame that stays fixed while candidates vary:
/// camera, sensor depth, the render of the scene with the object removed
/// (the "hole" scene), the full-scene render, and the object's visible
/// silhouette in the full scene.
#[derive(Debug, Clone)]
pub struct CachedFrame {
    pub camera: Camera,
    pub sensor: DepthMap,
    pub hole: DepthMap,
    pub full: DepthMap,
    pub object_mask: Mask,
}

/// Per-object render cache, built once and shared read-only across all
/// candidate evaluations.
#[derive(Debug, Clone)]
pub struct FrameCache {
    pub frames: Vec<CachedFrame>,
}

/// Renders the fixed per-frame references for one object: the hole-scene
/// depth (scene minus object), the full-scene depth, and the object's
/// silhouette (visible or free-floating per the configured mode).
pub fn build_frame_cache(
    scan: &RgbdScan,
    ann: &ObjectAnnotation,
    selection: &FrameSelection,
    silhouette_mode: SilhouetteMode,
) -> Result<FrameCache, ObjectiveError> {
    if selection.is_empty() {
        return Err(ObjectiveError::EmptySelection);
    }
    let hole_mesh = remove_object(scan, ann)?;
    let submesh = object_submesh(scan, ann)?;
    let identity = Pose9::identity();

    let frames: Vec<CachedFrame> = selection
        .indices
        .par_iter()
        .map(|&fi| {
            let frame = &scan.frames[fi];
            let camera = frame.camera.clone();
            let hole = render_depth(&[(&hole_mesh, identity)], &camera);
            let full = render_depth(&[(&scan.scene_mesh, identity)], &camera);
            let object_mask = match silhouette_mode {
                SilhouetteMode::Visible => {
                    render_mask((&submesh, identity), &[(&hole_mesh, identity)], &camera)
                }
                SilhouetteMode::FreeFloating => render_mask((&submesh, identity), &[], &camera),
            };
            CachedFrame { camera, sensor: frame.depth.clone(), hole, full, object_mask }
        })
        .collect();
    Ok(FrameCache { frames })
}

/// The depth term: per frame, mean absolute depth difference between the
/// candidate composition and each reference over the pixels where both
/// carry values, each normalized by its own valid-pixel count and weighted;
/// frames (or references) with no comparable pixels contribute 0.
pub fn eval_l_dpt(
    cache: &FrameCache,
    candidate_depths: &[DepthMap],
    w: &ObjectiveWeights,
    semantics: DepthMaskSemantics,
) -> Result<f64, ObjectiveError> {
    if cache.frames.is_empty() || candidate_depths.len() != cache.frames.len() {
        return Err(ObjectiveError::EmptySelection);
    }
    let mut sum = 0.0;
    for (frame, cad) in cache.frames.iter().zip(candidate_depths) {
        sum += w.lambda_m * masked_mean_abs_diff(cad, &frame.full, semantics)
            + w.lambda_s * masked_mean_abs_diff(cad, &frame.sensor, semantics);
    }
    Ok(sum / cache.frames.len() as f64)
}

fn masked_mean_abs_diff(cad: &DepthMap, reference: &DepthMap, semantics: DepthMaskSemantics) -> f64 {
    let mut acc = 0.0;
    let mut count = 0usize;
    match semantics {
        DepthMaskSemantics::IntersectCandidate => {
            for (&c, &r) in cad.values.iter().zip(&reference.values) {
                if DepthMap::is_valid_value(c) && DepthMap::is_valid_value(r) {
                    acc += (c - r).abs();
                    count += 1;
                }
            }
        }
        DepthMaskSemantics::PenalizeUncovered { penalty } => {
            for (&c, &r) in cad.values.iter().zip(&reference.values) {
                if DepthMap::is_valid_value(r) {
                    acc += if DepthMap::is_valid_value(c) { (c - r).abs() } else { penalty };
                    count += 1;
                }
            }
        }
    }
    if count == 0 {
        0.0
    } else {
        acc / count as f64
    }
}

/// The silhouette term: mean over frames of 1 − IoU between the cached
/// object mask and the candidate mask. Two empty masks count as IoU 1
/// (a frame where both agree the object is invisible costs nothing).
pub fn eval_l_sil(cache: &FrameCache, candidate_masks: &[Mask]) -> Result<f64, ObjectiveError> {
    if cache.frames.is_empty() || candidate_masks.len() != cache.frames.len() {
        return Err(ObjectiveError::EmptySelection);
    }
    let mut sum = 0.0;
    for (frame, cad) in cache.frames.iter().zip(candidate_masks) {
        sum += 1.0 - mask_iou(&frame.object_mask, cad);
    }
    Ok(sum / cache.frames.len() as f64)
}

fn mask_iou(a: &Mask, b: &Mask) -> f64 {
    let mut inter = 0usize;
    let mut union = 0usize;
    for (&x, &y) in a.values.iter().zip(&b.values) {
        if x && y {
            inter += 1;
        }
        if x || y {
            union += 1;
        }
    }
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

/// The shape term: one-way Chamfer from the object's scene points to the
/// candidate's posed surface samples.
pub fn eval_l_cd(object_cloud: &PointCloud, cad_cloud_world: &PointCloud) -> Result<f64, ObjectiveError> {
    Ok(chamfer_one_way(object_cloud, cad_cloud_world)?)
}

/// Bundles the per-object inputs that stay fixed across candidate
/// evaluations.
pub struct ObjectiveContext<'a> {
    pub cache: &'a FrameCache,
    pub object_cloud: &'a PointCloud,
    pub weights: ObjectiveWeights,
    pub depth_semantics: DepthMaskSemantics,
    pub silhouette_mode: SilhouetteMode,
}

impl ObjectiveContext<'_> {
    /// Renders the candidate into every cached frame (composing its depth
    /// with the hole-scene render), compares silhouettes, transforms the
    /// cached canonical samples, and combines the three terms. Pure in its
    /// inputs — repeated calls return bit-identical breakdowns.
    pub fn evaluate(
        &self,
        mesh: &TriMesh,
        canonical_samples: &PointCloud,
        pose: &Pose9,
    ) -> Result<ObjectiveBreakdown, ObjectiveError> {
        let per_frame: Vec<(DepthMap, Mask)> = self
            .cache
            .frames
            .par_iter()
            .map(|frame| self.render_candidate_frame(frame, mesh, pose))
            .collect::<Result<_, _>>()?;
        let depths: Vec<DepthMap> = per_frame.iter().map(|(d, _)| d.clone()).collect();
        let masks: Vec<Mask> = per_frame.into_iter().map(|(_, m)| m).collect();

        let l_dpt = eval_l_dpt(self.cache, &depths, &self.weights, self.depth_semantics)?;
        let l_sil = eval_l_sil(self.cache, &masks)?;
        let world_samples = canonical_samples.transformed(pose);
        let l_cd = eval_l_cd(self.object_cloud, &world_samples)?;
        Ok(ObjectiveBreakdown::combine(&self.weights, l_dpt, l_sil, l_cd))
    }

    /// One frame's candidate composition: CAD-alone depth fused into the
    /// hole scene, and the CAD silhouette under the configured occlusion
    /// mode. Reuses the cached hole render — no scene re-render per
    /// candidate.
    fn render_candidate_frame(
        &self,
        frame: &CachedFrame,
        mesh: &TriMesh,
        pose: &Pose9,
    ) -> Result<(DepthMap, Mask), ObjectiveError> {
        let cad_depth = render_depth(&[(mesh, *pose)], &frame.camera);
        let fused = fuse_depth(&frame.hole, &cad_depth)?;
        let mask_values: Vec<bool> = match self.silhouette_mode {
            SilhouetteMode::Visible => cad_depth
                .values
                .iter()
                .zip(&frame.hole.values)
                .map(|(&c, &h)| {
                    DepthMap::is_valid_value(c) && (!DepthMap::is_valid_value(h) || c <= h)
                })
                .collect(),
            SilhouetteMode::FreeFloating => cad_depth
                .values
                .iter()
                .map(|&c| DepthMap::is_valid_value(c))
                .collect(),
        };
        let mask = Mask {
            width: cad_depth.width,
            height: cad_depth.height,
            values: mask_values,
        };
        Ok((fused, mask))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    fn dummy_camera(w: usize, h: usize) -> Camera {
        Camera::new(
            10.0,
            10.0,
            w as f64 / 2.0,
            h as f64 / 2.0,
            w,
            h,
            nalgebra::Isometry3::identity(),
        )
        .unwrap()
    }

    fn cache_from_grids(frames: Vec<(DepthMap, DepthMap, Mask)>) -> FrameCache {
        // (full, sensor, object mask); the hole render is unused by the
        // term evaluators, so an all-invalid map stands in.
        FrameCache {
            frames: frames
                .into_iter()
                .map(|(full, sensor, object_mask)| {
                    let camera = dummy_camera(full.width, full.height);
                    let hole = DepthMap::new_invalid(full.width, full.height);
                    CachedFrame { camera, sensor, hole, full, object_mask }
                })
                .collect(),
        }
    }

    #[test]
    fn weights_validation() {
        ObjectiveWeights::scannet().validate().unwrap();
        ObjectiveWeights::arkitscenes().validate().unwrap();
        let zero_depth = ObjectiveWeights { lambda_m: 0.0, lambda_s: 0.0, lambda_sil: 1.0, lambda_cd: 1.0 };
        assert!(zero_depth.validate().is_err());
        let negative = ObjectiveWeights { lambda_m: -0.1, ..ObjectiveWeights::scannet() };
        assert!(negative.validate().is_err());
    }

    #[test]
    fn depth_term_zero_when_candidate_matches_references() {
        let ref_map = DepthMap::from_values(2, 2, vec![1.0, 2.0, 0.0, 3.0]);
        let cache = cache_from_grids(vec![(
            ref_map.clone(),
            ref_map.clone(),
            Mask::new_empty(2, 2),
        )]);
        let w = ObjectiveWeights::scannet();
        let out = eval_l_dpt(&cache, &[ref_map], &w, DepthMaskSemantics::IntersectCandidate).unwrap();
        assert_eq!(out, 0.0);
    }

    #[test]
    fn constant_offset_costs_weight_sum_times_delta() {
        let delta = 0.125;
        let reference = DepthMap::from_values(2, 2, vec![1.0, 2.0, 3.0, 4.0]);
        let candidate = DepthMap::from_values(
            2,
            2,
            reference.values.iter().map(|v| v + delta).collect(),
        );
        let cache = cache_from_grids(vec![(
            reference.clone(),
            reference.clone(),
            Mask::new_empty(2, 2),
        )]);
        let w = ObjectiveWeights::scannet();
        let out =
            eval_l_dpt(&cache, &[candidate], &w, DepthMaskSemantics::IntersectCandidate).unwrap();
        assert_relative_eq!(out, (w.lambda_m + w.lambda_s) * delta, epsilon = 1e-12);
    }

    #[test]
    fn depth_term_matches_naive_reference_loop() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let w = ObjectiveWeights { lambda_m: 0.6, lambda_s: 1.1, lambda_sil: 0.0, lambda_cd: 0.0 };
        for _ in 0..20 {
            let n = 12usize;
            let grid = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<f64> {
                (0..n)
                    .map(|_| {
                        if rng.gen_bool(0.3) {
                            0.0
                        } else {
                            rng.gen_range(0.5..5.0)
                        }
                    })
                    .collect()
            };
            let full = DepthMap::from_values(4, 3, grid(&mut rng));
            let sensor = DepthMap::from_values(4, 3, grid(&mut rng));
            let cad = DepthMap::from_values(4, 3, grid(&mut rng));

            // Naive per-pixel re-implementation.
            let term = |reference: &DepthMap| -> f64 {
                let mut s = 0.0;
                let mut v = 0usize;
                for i in 0..n {
                    let c = cad.values[i];
                    let r = reference.values[i];
                    if c > 0.0 && r > 0.0 {
                        s += (c - r).abs();
                        v += 1;
                    }
                }
                if v == 0 {
                    0.0
                } else {
                    s / v as f64
                }
            };
            let expected = w.lambda_m * term(&full) + w.lambda_s * term(&sensor);

            let cache = cache_from_grids(vec![(full, sensor, Mask::new_empty(4, 3))]);
            let got = eval_l_dpt(&cache, &[cad], &w, DepthMaskSemantics::IntersectCandidate)
                .unwrap();
            assert!((got - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn uncovered_reference_pixels_can_be_penalized() {
        let reference = DepthMap::from_values(2, 1, vec![2.0, 2.0]);
        let candidate = DepthMap::from_values(2, 1, vec![2.0, 0.0]); // second pixel uncovered
        let w = ObjectiveWeights { lambda_m: 1.0, lambda_s: 0.0, lambda_sil: 0.0, lambda_cd: 0.0 };
        let cache = cache_from_grids(vec![(
            reference.clone(),
            DepthMap::new_invalid(2, 1),
            Mask::new_empty(2, 1),
        )]);
        // Intersection semantics ignore the hole.
        let lenient = eval_l_dpt(
            &cache,
            std::slice::from_ref(&candidate),
            &w,
            DepthMaskSemantics::IntersectCandidate,
        )
        .unwrap();
        assert_eq!(lenient, 0.0);
        // Penalizing semantics charge it.
        let strict = eval_l_dpt(
            &cache,
            &[candidate],
            &w,
            DepthMaskSemantics::PenalizeUncovered { penalty: 1.0 },
        )
        .unwrap();
        assert_relative_eq!(strict, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn silhouette_identical_masks_cost_zero() {
        let mut m = Mask::new_empty(2, 2);
        m.values[1] = true;
        let cache = cache_from_grids(vec![(
            DepthMap::new_invalid(2, 2),
            DepthMap::new_invalid(2, 2),
            m.clone(),
        )]);
        assert_eq!(eval_l_sil(&cache, &[m]).unwrap(), 0.0);
    }

    #[test]
    fn silhouette_disjoint_masks_cost_one() {
        let mut a = Mask::new_empty(2, 2);
        a.values[0] = true;
        let mut b = Mask::new_empty(2, 2);
        b.values[3] = true;
        let cache = cache_from_grids(vec![(
            DepthMap::new_invalid(2, 2),
            DepthMap::new_invalid(2, 2),
            a,
        )]);
        assert_eq!(eval_l_sil(&cache, &[b]).unwrap(), 1.0);
    }

    #[test]
    fn silhouette_partial_overlap_pixel_count_oracle() {
        // Masks overlapping in 1 of 3 union pixels: 1 − 1/3 = 2/3.
        let mut a = Mask::new_empty(2, 2);
        a.values[0] = true;
        a.values[1] = true;
        let mut b = Mask::new_empty(2, 2);
        b.values[1] = true;
        b.values[2] = true;
        let cache = cache_from_grids(vec![(
            DepthMap::new_invalid(2, 2),
            DepthMap::new_invalid(2, 2),
            a,
        )]);
        assert_relative_eq!(eval_l_sil(&cache, &[b]).unwrap(), 2.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn silhouette_of_two_empty_masks_costs_nothing() {
        let cache = cache_from_grids(vec![(
            DepthMap::new_invalid(2, 2),
            DepthMap::new_invalid(2, 2),
            Mask::new_empty(2, 2),
        )]);
        assert_eq!(eval_l_sil(&cache, &[Mask::new_empty(2, 2)]).unwrap(), 0.0);
    }

    #[test]
    fn chamfer_term_single_point_distance() {
        let object = PointCloud::new(vec![nalgebra::Point3::new(0.1, 0.0, 0.0)]);
        let cad = PointCloud::new(vec![
            nalgebra::Point3::origin(),
            nalgebra::Point3::new(5.0, 0.0, 0.0),
        ]);
        assert_relative_eq!(eval_l_cd(&object, &cad).unwrap(), 0.1, epsilon = 1e-12);
    }

    #[test]
    fn breakdown_combination_is_linear_in_each_weight() {
        let l = (0.2, 0.4, 0.05);
        let w1 = ObjectiveWeights { lambda_m: 0.75, lambda_s: 0.9, lambda_sil: 0.3, lambda_cd: 2.0 };
        let b1 = ObjectiveBreakdown::combine(&w1, l.0, l.1, l.2);
        assert_relative_eq!(
            b1.total,
            l.0 + w1.lambda_sil * l.1 + w1.lambda_cd * l.2,
            epsilon = 1e-15
        );
        // Doubling lambda_cd moves the total by exactly l_cd times the old value.
        let w2 = ObjectiveWeights { lambda_cd: 4.0, ..w1 };
        let b2 = ObjectiveBreakdown::combine(&w2, l.0, l.1, l.2);
        assert_relative_eq!(b2.total - b1.total, 2.0 * l.2, epsilon = 1e-15);
    }
}
