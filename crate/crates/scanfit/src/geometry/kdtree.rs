use nalgebra::Point3;

use super::GeometryError;

/// An exact 3D k-d tree for nearest-neighbor queries.
///
/// Splits on the axis of largest spread with a median partition, so the tree
/// is balanced regardless of input order. Queries are exact (branch-and-bound
/// with the true splitting-plane distance), which keeps Chamfer values and
/// every threshold decision built on them reproducible.
#[derive(Debug, Clone)]
pub struct KdTree3 {
    nodes: Vec<Node>,
    root: i32,
}

#[derive(Debug, Clone)]
struct Node {
    point: Point3<f64>,
    /// Index of this point in the cloud the tree was built from.
    index: u32,
    axis: u8,
    left: i32,
    right: i32,
}

impl KdTree3 {
    /// Builds a tree over the given points. Fails on an empty slice.
    pub fn build(points: &[Point3<f64>]) -> Result<Self, GeometryError> {
        if points.is_empty() {
            return Err(GeometryError::EmptyCloud);
        }
        let mut entries: Vec<(Point3<f64>, u32)> = points
            .iter()
            .enumerate()
            .map(|(i, p)| (*p, i as u32))
            .collect();
        let mut nodes = Vec::with_capacity(points.len());
        let root = build_recursive(&mut entries, &mut nodes);
        Ok(Self { nodes, root })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// The nearest stored point to `query`: (original index, Euclidean
    /// distance).
    pub fn nearest(&self, query: &Point3<f64>) -> (usize, f64) {
        let mut best = (0usize, f64::INFINITY);
        self.search(self.root, query, &mut best);
        (best.0, best.1.sqrt())
    }

    fn search(&self, id: i32, query: &Point3<f64>, best: &mut (usize, f64)) {
        if id < 0 {
            return;
        }
        let node = &self.nodes[id as usize];
        let d2 = (node.point - query).norm_squared();
        if d2 < best.1 {
            *best = (node.index as usize, d2);
        }
        let axis = node.axis as usize;
        let delta = query[axis] - node.point[axis];
        let (near, far) = if delta < 0.0 {
            (node.left, node.right)
        } else {
            (node.right, node.left)
        };
        self.search(near, query, best);
        if delta * delta < best.1 {
            self.search(far, query, best);
        }
    }
}

fn build_recursive(entries: &mut [(Point3<f64>, u32)], nodes: &mut Vec<Node>) -> i32 {
    if entries.is_empty() {
        return -1;
    }
    // Axis of largest spread.
    let mut lo = entries[0].0;
    let mut hi = entries[0].0;
    for (p, _) in entries.iter() {
        for k in 0..3 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let mut axis = 0usize;
    let mut spread = hi[0] - lo[0];
    for k in 1..3 {
        if hi[k] - lo[k] > spread {
            spread = hi[k] - lo[k];
            axis = k;
        }
    }

    let mid = entries.len() / 2;
    entries.select_nth_unstable_by(mid, |a, b| a.0[axis].total_cmp(&b.0[axis]));
    let (point, index) = entries[mid];
    let (left_part, rest) = entries.split_at_mut(mid);
    let right_part = &mut rest[1..];
    let left = build_recursive(left_part, nodes);
    let right = build_recursive(right_part, nodes);
    nodes.push(Node { point, index, axis: axis as u8, left, right });
    (nodes.len() - 1) as i32
}
