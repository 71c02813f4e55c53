//! Scene annotation pipeline: exhaustive per-object retrieval with top-k
//! retention, shape-clone clustering with joint model selection, and pose
//! refinement, producing one annotation document per scene.

mod cluster;
mod refine;

pub use cluster::{
    cluster_from_distances, cluster_retrievals, pairwise_shape_distances, Cluster, ShapePair,
};
pub use refine::refine_pose;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cad::{CadDatabase, CadError};
use crate::config::{ConfigError, EngineConfig, JointPool};
use crate::geometry::{GeometryError, Obb, PointCloud, Pose9};
use crate::objective::{
    build_frame_cache, FrameCache, ObjectiveBreakdown, ObjectiveContext, ObjectiveError,
    ObjectiveWeights,
};
use crate::scene::{
    derive_missing_supervision, object_point_cloud, select_frames, ObjectAnnotation, RgbdScan,
    SceneError,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("scan has no object annotations")]
    NoObjects,
    #[error("no candidate models to evaluate")]
    NoCandidates,
    #[error("a cluster needs at least 2 members, got {0}")]
    ClusterTooSmall(usize),
    #[error("duplicate object id '{0}'")]
    DuplicateObject(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
    #[error(transparent)]
    Cad(#[from] CadError),
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("failed to read annotations {path}: {message}")]
    DocumentRead { path: String, message: String },
    #[error("failed to write annotations {path}: {message}")]
    DocumentWrite { path: String, message: String },
}

/// One scored candidate: the model, the pose it was scored at, and its
/// objective breakdown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedCandidate {
    pub model_id: String,
    pub pose: Pose9,
    pub breakdown: ObjectiveBreakdown,
}

/// The final annotation for one object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectResult {
    pub object_id: String,
    pub class: String,
    pub model_id: String,
    pub pose: Pose9,
    /// Id of the shape-clone cluster this object belongs to, if any.
    pub cluster_id: Option<usize>,
    pub breakdown: ObjectiveBreakdown,
    /// The independent retrieval ranking (initial poses and scores) this
    /// result was selected from.
    pub top_k: Vec<RankedCandidate>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectFailure {
    pub object_id: String,
    pub error: String,
}

/// The per-scene annotation document — the primary output file format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneAnnotations {
    pub scene_id: String,
    /// Name of the weight preset, when one was selected.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    pub weights: ObjectiveWeights,
    /// Successfully annotated objects, ascending by object id.
    pub objects: Vec<ObjectResult>,
    pub clusters: Vec<Cluster>,
    /// Objects skipped with the reason, ascending by object id.
    pub failures: Vec<ObjectFailure>,
}

impl SceneAnnotations {
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path).map_err(|e| PipelineError::DocumentRead {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        serde_json::from_str(&text).map_err(|e| PipelineError::DocumentRead {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), PipelineError> {
        crate::ops::write_json_atomic(path, self).map_err(|e| PipelineError::DocumentWrite {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }
}

/// Scores every candidate model at its box-derived initial pose and keeps
/// the `k` lowest totals. Ties break on the lexicographically smaller model
/// id, so the ranking is independent of evaluation order and thread count.
pub fn retrieve_top_k(
    ctx: &ObjectiveContext,
    db: &CadDatabase,
    candidates: &[String],
    obb: &Obb,
    n_samples: usize,
    seed: u64,
    k: usize,
) -> Result<Vec<RankedCandidate>, PipelineError> {
    if candidates.is_empty() {
        return Err(PipelineError::NoCandidates);
    }
    let mut scored: Vec<RankedCandidate> = candidates
        .par_iter()
        .map(|id| -> Result<RankedCandidate, PipelineError> {
            let model = db.model(id)?;
            let pose = CadDatabase::initial_pose_from_obb(obb, model)?;
            let samples = db.sampled_points(id, n_samples, seed)?;
            let breakdown = ctx.evaluate(&model.mesh, &samples, &pose)?;
            Ok(RankedCandidate { model_id: id.clone(), pose, breakdown })
        })
        .collect::<Result<_, _>>()?;
    scored.sort_by(|a, b| {
        a.breakdown
            .total
            .total_cmp(&b.breakdown.total)
            .then_with(|| a.model_id.cmp(&b.model_id))
    });
    scored.truncate(k);
    Ok(scored)
}

/// One cluster member as seen by joint retrieval: its evaluation context and
/// the box its initial poses derive from.
pub struct JointMember<'a> {
    pub object_id: &'a str,
    pub ctx: ObjectiveContext<'a>,
    pub obb: &'a Obb,
}

/// Finds the single model minimizing the *sum* of objective totals over all
/// cluster members, each member evaluated at its own box-derived initial
/// pose. Returns the winning model id and the per-member scored candidates
/// (aligned with `members`).
pub fn joint_retrieve(
    members: &[JointMember],
    db: &CadDatabase,
    pool: &[String],
    n_samples: usize,
    seed: u64,
) -> Result<(String, Vec<RankedCandidate>), PipelineError> {
    if members.len() < 2 {
        return Err(PipelineError::ClusterTooSmall(members.len()));
    }
    if pool.is_empty() {
        return Err(PipelineError::NoCandidates);
    }
    let evaluated: Vec<(f64, String, Vec<RankedCandidate>)> = pool
        .par_iter()
        .map(|id| -> Result<(f64, String, Vec<RankedCandidate>), PipelineError> {
            let model = db.model(id)?;
            let samples = db.sampled_points(id, n_samples, seed)?;
            let mut sum = 0.0;
            let mut per_member = Vec::with_capacity(members.len());
            for member in members {
                let pose = CadDatabase::initial_pose_from_obb(member.obb, model)?;
                let breakdown = member.ctx.evaluate(&model.mesh, &samples, &pose)?;
                sum += breakdown.total;
                per_member.push(RankedCandidate { model_id: id.clone(), pose, breakdown });
            }
            Ok((sum, id.clone(), per_member))
        })
        .collect::<Result<_, _>>()?;
    let winner = evaluated
        .into_iter()
        .min_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)))
        .expect("pool is non-empty");
    Ok((winner.1, winner.2))
}

/// Everything computed for one object before any candidate is scored.
struct PreparedObject {
    ann: ObjectAnnotation,
    obb: Obb,
    cloud: PointCloud,
    cache: FrameCache,
    candidates: Vec<String>,
    top: Vec<RankedCandidate>,
}

impl PreparedObject {
    fn context<'a>(&'a self, config: &EngineConfig) -> ObjectiveContext<'a> {
        ObjectiveContext {
            cache: &self.cache,
            object_cloud: &self.cloud,
            weights: config.weights,
            depth_semantics: config.depth_mask_semantics,
            silhouette_mode: config.silhouette_mode,
        }
    }
}

fn prepare_object(
    scan: &RgbdScan,
    db: &CadDatabase,
    config: &EngineConfig,
    ann0: &ObjectAnnotation,
) -> Result<PreparedObject, PipelineError> {
    ann0.validate()?;
    let ann = derive_missing_supervision(scan, ann0, config.segmentation_margin)?;
    let obb = ann.obb.clone().expect("derivation guarantees a box");
    let selection = select_frames(scan, &ann.id, &obb, config.n_frames, config.frame_sampling)?;
    let cache = build_frame_cache(scan, &ann, &selection, config.silhouette_mode)?;
    let cloud = object_point_cloud(scan, &ann)?;
    let candidates = db.candidates_for_class(&ann.class_label, &config.class_map)?.to_vec();

    let ctx = ObjectiveContext {
        cache: &cache,
        object_cloud: &cloud,
        weights: config.weights,
        depth_semantics: config.depth_mask_semantics,
        silhouette_mode: config.silhouette_mode,
    };
    let top = retrieve_top_k(&ctx, db, &candidates, &obb, config.n_samples, config.seed, config.top_k)?;
    Ok(PreparedObject { ann, obb, cloud, cache, candidates, top })
}

/// Refines every top-k candidate from its initial pose and keeps the lowest
/// refined total (ties by model id).
fn refine_best_of_top_k(
    prepared: &PreparedObject,
    db: &CadDatabase,
    config: &EngineConfig,
    up: nalgebra::Vector3<f64>,
) -> Result<(String, Pose9, ObjectiveBreakdown), PipelineError> {
    let ctx = prepared.context(config);
    let mut best: Option<(String, Pose9, ObjectiveBreakdown)> = None;
    for candidate in &prepared.top {
        let model = db.model(&candidate.model_id)?;
        let samples = db.sampled_points(&candidate.model_id, config.n_samples, config.seed)?;
        let (pose, breakdown) = refine_pose(
            &ctx,
            &model.mesh,
            &samples,
            &candidate.pose,
            &config.refinement,
            up,
        )?;
        let better = match &best {
            None => true,
            Some((best_id, _, best_breakdown)) => {
                match breakdown.total.total_cmp(&best_breakdown.total) {
                    std::cmp::Ordering::Less => true,
                    std::cmp::Ordering::Equal => candidate.model_id < *best_id,
                    std::cmp::Ordering::Greater => false,
                }
            }
        };
        if better {
            best = Some((candidate.model_id.clone(), pose, breakdown));
        }
    }
    best.ok_or(PipelineError::NoCandidates)
}

/// Annotates every object of the scan: independent retrieval per object,
/// shape-clone clustering across the scene, joint model selection per
/// cluster, and pose refinement. One object's failure does not abort the
/// scene — it is recorded in the output instead.
pub fn annotate_scene(
    scan: &RgbdScan,
    db: &CadDatabase,
    config: &EngineConfig,
) -> Result<SceneAnnotations, PipelineError> {
    if scan.annotations.is_empty() {
        return Err(PipelineError::NoObjects);
    }
    config.validate()?;

    let mut prepared: BTreeMap<String, PreparedObject> = BTreeMap::new();
    let mut failures: Vec<ObjectFailure> = Vec::new();
    for ann in &scan.annotations {
        if prepared.contains_key(&ann.id)
            || failures.iter().any(|f| f.object_id == ann.id)
        {
            failures.push(ObjectFailure {
                object_id: ann.id.clone(),
                error: PipelineError::DuplicateObject(ann.id.clone()).to_string(),
            });
            continue;
        }
        match prepare_object(scan, db, config, ann) {
            Ok(p) => {
                prepared.insert(ann.id.clone(), p);
            }
            Err(e) => {
                log::warn!("object '{}' skipped: {e}", ann.id);
                failures.push(ObjectFailure { object_id: ann.id.clone(), error: e.to_string() });
            }
        }
    }

    // Cloning barrier: all independent retrievals must exist before shapes
    // can be compared across objects.
    let best_per_object: Vec<(String, String)> = prepared
        .iter()
        .map(|(id, p)| (id.clone(), p.top[0].model_id.clone()))
        .collect();
    let clusters = if best_per_object.len() >= 2 {
        cluster_retrievals(
            &best_per_object,
            db,
            config.tau,
            config.n_samples,
            config.seed,
            config.clone_normalization,
        )?
    } else {
        Vec::new()
    };

    let up = scan.gravity.unit();
    let mut results: BTreeMap<String, ObjectResult> = BTreeMap::new();
    let mut emitted_clusters: Vec<Cluster> = Vec::new();
    let mut handled: BTreeSet<String> = BTreeSet::new();

    for cluster in clusters {
        let members: Vec<&PreparedObject> =
            cluster.members.iter().map(|id| &prepared[id]).collect();
        let mut pool: BTreeSet<String> = BTreeSet::new();
        for member in &members {
            match config.joint_pool {
                JointPool::FullCategory => pool.extend(member.candidates.iter().cloned()),
                JointPool::TopKUnion => {
                    pool.extend(member.top.iter().map(|c| c.model_id.clone()))
                }
            }
        }
        let pool: Vec<String> = pool.into_iter().collect();
        let joint_members: Vec<JointMember> = cluster
            .members
            .iter()
            .zip(&members)
            .map(|(id, p)| JointMember { object_id: id.as_str(), ctx: p.context(config), obb: &p.obb })
            .collect();

        let cluster_outcome = joint_retrieve(&joint_members, db, &pool, config.n_samples, config.seed)
            .and_then(|(model_id, initial)| {
                let model = db.model(&model_id)?;
                let samples = db.sampled_points(&model_id, config.n_samples, config.seed)?;
                let mut member_results = Vec::with_capacity(members.len());
                for (member, start) in joint_members.iter().zip(&initial) {
                    let (pose, breakdown) = refine_pose(
                        &member.ctx,
                        &model.mesh,
                        &samples,
                        &start.pose,
                        &config.refinement,
                        up,
                    )?;
                    member_results.push((member.object_id.to_string(), pose, breakdown));
                }
                Ok((model_id, member_results))
            });

        match cluster_outcome {
            Ok((model_id, member_results)) => {
                for (object_id, pose, breakdown) in member_results {
                    let p = &prepared[&object_id];
                    results.insert(
                        object_id.clone(),
                        ObjectResult {
                            object_id: object_id.clone(),
                            class: p.ann.class_label.clone(),
                            model_id: model_id.clone(),
                            pose,
                            cluster_id: Some(cluster.id),
                            breakdown,
                            top_k: p.top.clone(),
                        },
                    );
                    handled.insert(object_id);
                }
                emitted_clusters.push(Cluster {
                    id: cluster.id,
                    members: cluster.members.clone(),
                    model_id: Some(model_id),
                });
            }
            Err(e) => {
                log::warn!("cluster {} failed: {e}", cluster.id);
                for id in &cluster.members {
                    failures.push(ObjectFailure { object_id: id.clone(), error: e.to_string() });
                    handled.insert(id.clone());
                }
            }
        }
    }

    for (id, p) in &prepared {
        if handled.contains(id) {
            continue;
        }
        match refine_best_of_top_k(p, db, config, up) {
            Ok((model_id, pose, breakdown)) => {
                results.insert(
                    id.clone(),
                    ObjectResult {
                        object_id: id.clone(),
                        class: p.ann.class_label.clone(),
                        model_id,
                        pose,
                        cluster_id: None,
                        breakdown,
                        top_k: p.top.clone(),
                    },
                );
            }
            Err(e) => {
                log::warn!("object '{id}' refinement failed: {e}");
                failures.push(ObjectFailure { object_id: id.clone(), error: e.to_string() });
            }
        }
    }

    failures.sort_by(|a, b| a.object_id.cmp(&b.object_id).then_with(|| a.error.cmp(&b.error)));
    Ok(SceneAnnotations {
        scene_id: scan.scene_id.clone(),
        preset: None,
        weights: config.weights,
        objects: results.into_values().collect(),
        clusters: emitted_clusters,
        failures,
    })
}
