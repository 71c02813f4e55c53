use rayon::prelude::*;

use super::{GeometryError, KdTree3, PointCloud};

/// One-way Chamfer distance: the mean, over points of `p`, of the Euclidean
/// distance to the nearest point of `q`.
///
/// Note the *plain* norm — not the squared form common elsewhere. Every
/// threshold in the engine (notably the shape-clone cutoff) is calibrated
/// against this convention.
pub fn chamfer_one_way(p: &PointCloud, q: &PointCloud) -> Result<f64, GeometryError> {
    if p.is_empty() || q.is_empty() {
        return Err(GeometryError::EmptyCloud);
    }
    let tree = KdTree3::build(&q.points)?;
    Ok(chamfer_one_way_to_tree(p, &tree))
}

/// One-way Chamfer against a prebuilt tree; lets callers reuse the index
/// when one side stays fixed across many evaluations.
pub fn chamfer_one_way_to_tree(p: &PointCloud, q_tree: &KdTree3) -> f64 {
    // Distances are computed in (deterministic) input order, then folded
    // sequentially so the sum does not depend on thread count.
    let dists: Vec<f64> = p
        .points
        .par_iter()
        .map(|pt| q_tree.nearest(pt).1)
        .collect();
    dists.iter().sum::<f64>() / p.points.len() as f64
}

/// Symmetric Chamfer distance: the two one-way distances summed.
pub fn chamfer_symmetric(a: &PointCloud, b: &PointCloud) -> Result<f64, GeometryError> {
    Ok(chamfer_one_way(a, b)? + chamfer_one_way(b, a)?)
}
