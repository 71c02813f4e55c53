//! 9-DoF pose refinement: moment-accumulating gradient descent on the full
//! objective, with the gradient obtained by central finite differences.
//!
//! The pose is parameterized relative to the starting pose by a 9-vector
//! θ = (δt, δr, δλ): translation offset in meters, a left-applied
//! axis-angle rotation increment in radians, and per-axis log-scale.
//! Each block has its own learning rate and probe step. The best pose
//! *visited* (including the start) is returned, so the result never scores
//! worse than the input.

use nalgebra::{UnitQuaternion, Vector3};
use rayon::prelude::*;

use crate::config::RefinementConfig;
use crate::geometry::{PointCloud, Pose9, TriMesh};
use crate::objective::{ObjectiveBreakdown, ObjectiveContext};

use super::PipelineError;

const ADAM_EPS: f64 = 1e-8;

fn pose_at(pose0: &Pose9, theta: &[f64; 9]) -> Pose9 {
    let translation = pose0.translation + Vector3::new(theta[0], theta[1], theta[2]);
    let increment = UnitQuaternion::from_scaled_axis(Vector3::new(theta[3], theta[4], theta[5]));
    let rotation = increment * pose0.rotation;
    let scale = Vector3::new(
        pose0.scale.x * theta[6].exp(),
        pose0.scale.y * theta[7].exp(),
        pose0.scale.z * theta[8].exp(),
    );
    Pose9 { translation, rotation, scale }
}

pub fn refine_pose(
    ctx: &ObjectiveContext,
    mesh: &TriMesh,
    samples: &PointCloud,
    pose0: &Pose9,
    cfg: &RefinementConfig,
    up: Vector3<f64>,
) -> Result<(Pose9, ObjectiveBreakdown), PipelineError> {
    cfg.validate()?;

    // Active parameters: yaw-only mode pins the rotation components that do
    // not spin about gravity.
    let mut active = [true; 9];
    if cfg.yaw_only {
        for k in 0..3 {
            active[3 + k] = up[k].abs() > 1e-9;
        }
    }
    let eps = [
        cfg.eps_translation,
        cfg.eps_translation,
        cfg.eps_translation,
        cfg.eps_rotation,
        cfg.eps_rotation,
        cfg.eps_rotation,
        cfg.eps_log_scale,
        cfg.eps_log_scale,
        cfg.eps_log_scale,
    ];
    let lr = [
        cfg.lr_translation,
        cfg.lr_translation,
        cfg.lr_translation,
        cfg.lr_rotation,
        cfg.lr_rotation,
        cfg.lr_rotation,
        cfg.lr_log_scale,
        cfg.lr_log_scale,
        cfg.lr_log_scale,
    ];
    let probe_indices: Vec<usize> = (0..9).filter(|&i| active[i]).collect();

    let eval = |theta: &[f64; 9]| -> Result<ObjectiveBreakdown, PipelineError> {
        Ok(ctx.evaluate(mesh, samples, &pose_at(pose0, theta))?)
    };

    let mut theta = [0.0f64; 9];
    let start = eval(&theta)?;
    let mut best_theta = theta;
    let mut best = start;

    let mut m = [0.0f64; 9];
    let mut v = [0.0f64; 9];
    for step in 1..=cfg.step_count {
        // Central differences: the 2·|active| probe evaluations are
        // independent and run concurrently; each is internally deterministic.
        let probes: Vec<(usize, f64)> = probe_indices
            .iter()
            .flat_map(|&i| [(i, 1.0), (i, -1.0)])
            .collect();
        let values: Vec<f64> = probes
            .par_iter()
            .map(|&(i, sign)| {
                let mut t = theta;
                t[i] += sign * eps[i];
                eval(&t).map(|b| b.total)
            })
            .collect::<Result<_, _>>()?;

        let mut grad = [0.0f64; 9];
        for (pi, &i) in probe_indices.iter().enumerate() {
            let plus = values[2 * pi];
            let minus = values[2 * pi + 1];
            grad[i] = (plus - minus) / (2.0 * eps[i]);
        }

        let bias1 = 1.0 - cfg.beta1.powi(step as i32);
        let bias2 = 1.0 - cfg.beta2.powi(step as i32);
        for &i in &probe_indices {
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * grad[i];
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
            let m_hat = m[i] / bias1;
            let v_hat = v[i] / bias2;
            theta[i] -= lr[i] * m_hat / (v_hat.sqrt() + ADAM_EPS);
        }

        let score = eval(&theta)?;
        if score.total < best.total {
            best = score;
            best_theta = theta;
        }
    }

    Ok((pose_at(pose0, &best_theta), best))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cad::CadDatabase;
    use crate::config::{EngineConfig, SilhouetteMode};
    use crate::objective::{build_frame_cache, FrameCache};
    use crate::procgen;
    use crate::scene::{object_point_cloud, select_frames, RgbdScan};
    use crate::synth::{build_scene, resting_pose, OrbitSpec, PlacedObject, ShellSpec,
        SyntheticSceneSpec};

    /// One chair in a small room, 3 low-resolution frames.
    fn tiny_scene() -> (RgbdScan, CadDatabase, Pose9) {
        let db = CadDatabase::from_meshes(vec![(
            "chair00".into(),
            "chair".into(),
            procgen::random_chair(11),
        )])
        .unwrap();
        let model = db.model("chair00").unwrap();
        let pose = resting_pose(model, 0.2, -0.1, 0.6, Vector3::new(1.0, 1.0, 1.0));
        let spec = SyntheticSceneSpec {
            scene_id: "tiny".into(),
            shell: ShellSpec { width: 3.0, depth: 3.0, height: 2.2 },
            objects: vec![PlacedObject {
                id: "obj0".into(),
                model_id: "chair00".into(),
                class: "chair".into(),
                pose,
            }],
            cameras: OrbitSpec {
                count: 3,
                radius: 1.3,
                height: 1.1,
                target: [0.0, 0.4, 0.0],
                fx: 70.0,
                fy: 70.0,
                width: 72,
                height_px: 56,
            },
            noise_std: 0.0,
            seed: 3,
        };
        let (scan, _) = build_scene(&spec, &db).unwrap();
        (scan, db, pose)
    }

    fn context_inputs(scan: &RgbdScan, cfg: &EngineConfig) -> (FrameCache, PointCloud) {
        let ann = crate::scene::derive_missing_supervision(
            scan,
            &scan.annotations[0],
            cfg.segmentation_margin,
        )
        .unwrap();
        let obb = ann.obb.clone().unwrap();
        let selection =
            select_frames(scan, &ann.id, &obb, cfg.n_frames, cfg.frame_sampling).unwrap();
        let cache = build_frame_cache(scan, &ann, &selection, SilhouetteMode::Visible).unwrap();
        let cloud = object_point_cloud(scan, &ann).unwrap();
        (cache, cloud)
    }

    #[test]
    fn start_at_minimum_is_a_fixed_point_for_the_score() {
        let (scan, db, gt_pose) = tiny_scene();
        let mut cfg = EngineConfig::default();
        cfg.n_frames = 3;
        cfg.refinement.step_count = 12;
        let (cache, cloud) = context_inputs(&scan, &cfg);
        let ctx = ObjectiveContext {
            cache: &cache,
            object_cloud: &cloud,
            weights: cfg.weights,
            depth_semantics: cfg.depth_mask_semantics,
            silhouette_mode: cfg.silhouette_mode,
        };
        let samples = db.sampled_points("chair00", 600, 0).unwrap();
        let mesh = &db.model("chair00").unwrap().mesh;
        let initial = ctx.evaluate(mesh, &samples, &gt_pose).unwrap();
        let (refined, score) =
            refine_pose(&ctx, mesh, &samples, &gt_pose, &cfg.refinement, Vector3::y()).unwrap();
        assert!(score.total <= initial.total, "{} > {}", score.total, initial.total);
        assert!((refined.translation - gt_pose.translation).norm() < 0.05);
    }

    #[test]
    fn translation_offset_is_pulled_back() {
        let (scan, db, gt_pose) = tiny_scene();
        let mut cfg = EngineConfig::default();
        cfg.n_frames = 3;
        cfg.refinement.step_count = 60;
        let (cache, cloud) = context_inputs(&scan, &cfg);
        let ctx = ObjectiveContext {
            cache: &cache,
            object_cloud: &cloud,
            weights: cfg.weights,
            depth_semantics: cfg.depth_mask_semantics,
            silhouette_mode: cfg.silhouette_mode,
        };
        let samples = db.sampled_points("chair00", 600, 0).unwrap();
        let mesh = &db.model("chair00").unwrap().mesh;
        let mut start = gt_pose;
        start.translation += Vector3::new(0.04, 0.0, -0.03);
        let initial = ctx.evaluate(mesh, &samples, &start).unwrap();
        let (refined, score) =
            refine_pose(&ctx, mesh, &samples, &start, &cfg.refinement, Vector3::y()).unwrap();
        assert!(score.total <= initial.total);
        let before = (start.translation - gt_pose.translation).norm();
        let after = (refined.translation - gt_pose.translation).norm();
        assert!(
            after < before / 2.0,
            "refinement did not reduce the offset: {before} -> {after}"
        );
    }

    #[test]
    fn yaw_only_mode_keeps_other_rotation_axes_fixed() {
        let (scan, db, gt_pose) = tiny_scene();
        let mut cfg = EngineConfig::default();
        cfg.n_frames = 3;
        cfg.refinement.step_count = 8;
        cfg.refinement.yaw_only = true;
        let (cache, cloud) = context_inputs(&scan, &cfg);
        let ctx = ObjectiveContext {
            cache: &cache,
            object_cloud: &cloud,
            weights: cfg.weights,
            depth_semantics: cfg.depth_mask_semantics,
            silhouette_mode: cfg.silhouette_mode,
        };
        let samples = db.sampled_points("chair00", 400, 0).unwrap();
        let mesh = &db.model("chair00").unwrap().mesh;
        let (refined, _) =
            refine_pose(&ctx, mesh, &samples, &gt_pose, &cfg.refinement, Vector3::y()).unwrap();
        // The relative rotation must be a pure yaw: its axis parallel to +y.
        let delta = refined.rotation * gt_pose.rotation.inverse();
        let axis_angle = delta.scaled_axis();
        assert!(axis_angle.x.abs() < 1e-12);
        assert!(axis_angle.z.abs() < 1e-12);
    }
}
