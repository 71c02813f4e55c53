//! Shape-clone detection: bottom-up clustering of the models retrieved
//! independently per object, driven by pairwise symmetric Chamfer distance.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::cad::CadDatabase;
use crate::config::CloneNormalization;
use crate::geometry::{chamfer_symmetric, PointCloud};

use super::PipelineError;

/// A group of objects found to share one shape. `model_id` is filled once
/// joint retrieval has chosen the common model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cluster {
    pub id: usize,
    /// Member object ids, ascending.
    pub members: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_id: Option<String>,
}

/// The shape distance between the models retrieved for one pair of objects.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapePair {
    /// Lexicographically smaller object id of the pair.
    pub object_a: String,
    pub object_b: String,
    pub distance: f64,
}

/// Computes the symmetric Chamfer distance between the retrieved models of
/// every object pair. Each model's canonical samples are compared after the
/// configured normalization (unit-diagonal by default, so the threshold
/// measures shape rather than size). Distances between equal model ids are
/// exactly zero; distinct model pairs are computed once and reused.
pub fn pairwise_shape_distances(
    best: &[(String, String)],
    db: &CadDatabase,
    n_samples: usize,
    seed: u64,
    normalization: CloneNormalization,
) -> Result<Vec<ShapePair>, PipelineError> {
    let mut clouds: BTreeMap<&str, PointCloud> = BTreeMap::new();
    for (_, model_id) in best {
        if !clouds.contains_key(model_id.as_str()) {
            let samples = db.sampled_points(model_id, n_samples, seed)?;
            let cloud = match normalization {
                CloneNormalization::UnitDiagonal => samples.normalized_to_unit_diagonal()?,
                CloneNormalization::Raw => (*samples).clone(),
            };
            clouds.insert(model_id.as_str(), cloud);
        }
    }

    let mut model_pair_distance: BTreeMap<(&str, &str), f64> = BTreeMap::new();
    let mut pairs = Vec::with_capacity(best.len() * best.len().saturating_sub(1) / 2);
    for i in 0..best.len() {
        for j in (i + 1)..best.len() {
            let (obj_i, model_i) = (&best[i].0, best[i].1.as_str());
            let (obj_j, model_j) = (&best[j].0, best[j].1.as_str());
            let key = if model_i <= model_j { (model_i, model_j) } else { (model_j, model_i) };
            let distance = if model_i == model_j {
                0.0
            } else if let Some(&d) = model_pair_distance.get(&key) {
                d
            } else {
                let d = chamfer_symmetric(&clouds[key.0], &clouds[key.1])?;
                model_pair_distance.insert(key, d);
                d
            };
            let (object_a, object_b) = if obj_i <= obj_j {
                (obj_i.clone(), obj_j.clone())
            } else {
                (obj_j.clone(), obj_i.clone())
            };
            pairs.push(ShapePair { object_a, object_b, distance });
        }
    }
    sort_pairs(&mut pairs);
    Ok(pairs)
}

fn sort_pairs(pairs: &mut [ShapePair]) {
    pairs.sort_by(|p, q| {
        p.distance
            .total_cmp(&q.distance)
            .then_with(|| p.object_a.cmp(&q.object_a))
            .then_with(|| p.object_b.cmp(&q.object_b))
    });
}

/// Applies the clustering rules to precomputed pair distances. Pairs are
/// processed from lowest to highest distance (ties by id pair); for each
/// pair strictly below the threshold:
/// (a) neither object clustered → a new cluster holds the two;
/// (b) exactly one clustered → the other joins that cluster;
/// (c) both clustered, in different clusters → the clusters merge.
/// Every emitted cluster has ≥ 2 members; ids number the clusters by their
/// smallest member.
pub fn cluster_from_distances(pairs: &[ShapePair], tau: f64) -> Vec<Cluster> {
    let mut ordered = pairs.to_vec();
    sort_pairs(&mut ordered);

    let mut assignment: BTreeMap<String, usize> = BTreeMap::new();
    let mut sets: Vec<BTreeSet<String>> = Vec::new();
    for pair in &ordered {
        if !(pair.distance < tau) {
            break; // sorted ascending — nothing further qualifies
        }
        let a = assignment.get(&pair.object_a).copied();
        let b = assignment.get(&pair.object_b).copied();
        match (a, b) {
            (None, None) => {
                let idx = sets.len();
                sets.push(BTreeSet::from([pair.object_a.clone(), pair.object_b.clone()]));
                assignment.insert(pair.object_a.clone(), idx);
                assignment.insert(pair.object_b.clone(), idx);
            }
            (Some(c), None) => {
                sets[c].insert(pair.object_b.clone());
                assignment.insert(pair.object_b.clone(), c);
            }
            (None, Some(c)) => {
                sets[c].insert(pair.object_a.clone());
                assignment.insert(pair.object_a.clone(), c);
            }
            (Some(ca), Some(cb)) if ca != cb => {
                let absorbed = std::mem::take(&mut sets[cb]);
                for member in absorbed {
                    assignment.insert(member.clone(), ca);
                    sets[ca].insert(member);
                }
            }
            _ => {} // already in the same cluster
        }
    }

    let mut live: Vec<BTreeSet<String>> = sets.into_iter().filter(|s| s.len() >= 2).collect();
    live.sort_by(|x, y| x.iter().next().cmp(&y.iter().next()));
    live.into_iter()
        .enumerate()
        .map(|(id, members)| Cluster {
            id,
            members: members.into_iter().collect(),
            model_id: None,
        })
        .collect()
}

/// Shape-clone clustering over per-object retrieval winners: computes the
/// pair distances and applies the merge rules at threshold `tau`.
pub fn cluster_retrievals(
    best: &[(String, String)],
    db: &CadDatabase,
    tau: f64,
    n_samples: usize,
    seed: u64,
    normalization: CloneNormalization,
) -> Result<Vec<Cluster>, PipelineError> {
    let pairs = pairwise_shape_distances(best, db, n_samples, seed, normalization)?;
    Ok(cluster_from_distances(&pairs, tau))
}
