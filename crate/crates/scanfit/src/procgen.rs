//! Parametric furniture generators. These exist to build synthetic scenes
//! and decoy model databases with known ground truth: every shape is a
//! composition of axis-aligned boxes in a y-up frame with the floor contact
//! at y = 0. Proportions vary independently of overall size, so two random
//! instances of a family are (almost surely) not related by a per-axis
//! scaling — a retrieval ranking cannot conflate them by rescaling alone.

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::TriMesh;

fn boxed(mesh: &mut TriMesh, half: Vector3<f64>, center: Vector3<f64>) {
    mesh.append(&TriMesh::box_mesh(half.x, half.y, half.z).translated(center));
}

fn empty_mesh() -> TriMesh {
    TriMesh { vertices: Vec::new(), faces: Vec::new() }
}

/// A four-legged chair with a seat slab and a backrest along −z.
#[derive(Debug, Clone, Copy)]
pub struct ChairParams {
    pub seat_w: f64,
    pub seat_d: f64,
    /// Top of the seat above the floor.
    pub seat_h: f64,
    pub seat_t: f64,
    /// Backrest height above the seat.
    pub back_h: f64,
    pub back_t: f64,
    pub leg_t: f64,
}

impl Default for ChairParams {
    fn default() -> Self {
        Self {
            seat_w: 0.45,
            seat_d: 0.45,
            seat_h: 0.45,
            seat_t: 0.05,
            back_h: 0.42,
            back_t: 0.05,
            leg_t: 0.05,
        }
    }
}

pub fn chair(p: &ChairParams) -> TriMesh {
    let mut m = empty_mesh();
    let (hw, hd) = (p.seat_w / 2.0, p.seat_d / 2.0);
    // Seat slab, top surface at seat_h.
    boxed(
        &mut m,
        Vector3::new(hw, p.seat_t / 2.0, hd),
        Vector3::new(0.0, p.seat_h - p.seat_t / 2.0, 0.0),
    );
    // Legs under the seat corners.
    let leg_h = p.seat_h - p.seat_t;
    let lt = p.leg_t / 2.0;
    for sx in [-1.0, 1.0] {
        for sz in [-1.0, 1.0] {
            boxed(
                &mut m,
                Vector3::new(lt, leg_h / 2.0, lt),
                Vector3::new(sx * (hw - lt), leg_h / 2.0, sz * (hd - lt)),
            );
        }
    }
    // Backrest rising from the rear edge (−z side).
    boxed(
        &mut m,
        Vector3::new(hw, p.back_h / 2.0, p.back_t / 2.0),
        Vector3::new(0.0, p.seat_h + p.back_h / 2.0, -(hd - p.back_t / 2.0)),
    );
    m
}

/// A table: top slab on four inset legs.
#[derive(Debug, Clone, Copy)]
pub struct TableParams {
    pub top_w: f64,
    pub top_d: f64,
    /// Top surface above the floor.
    pub height: f64,
    pub top_t: f64,
    pub leg_t: f64,
    /// Inset of the legs from the top's edge.
    pub leg_inset: f64,
}

impl Default for TableParams {
    fn default() -> Self {
        Self { top_w: 1.2, top_d: 0.7, height: 0.74, top_t: 0.05, leg_t: 0.06, leg_inset: 0.08 }
    }
}

pub fn table(p: &TableParams) -> TriMesh {
    let mut m = empty_mesh();
    let (hw, hd) = (p.top_w / 2.0, p.top_d / 2.0);
    boxed(
        &mut m,
        Vector3::new(hw, p.top_t / 2.0, hd),
        Vector3::new(0.0, p.height - p.top_t / 2.0, 0.0),
    );
    let leg_h = p.height - p.top_t;
    let lt = p.leg_t / 2.0;
    for sx in [-1.0, 1.0] {
        for sz in [-1.0, 1.0] {
            boxed(
                &mut m,
                Vector3::new(lt, leg_h / 2.0, lt),
                Vector3::new(sx * (hw - p.leg_inset - lt), leg_h / 2.0, sz * (hd - p.leg_inset - lt)),
            );
        }
    }
    m
}

/// An open bookshelf: two side panels, a back panel, and evenly spaced
/// shelf boards.
#[derive(Debug, Clone, Copy)]
pub struct BookshelfParams {
    pub width: f64,
    pub height: f64,
    pub depth: f64,
    pub panel_t: f64,
    pub shelf_count: usize,
}

impl Default for BookshelfParams {
    fn default() -> Self {
        Self { width: 0.8, height: 1.8, depth: 0.3, panel_t: 0.04, shelf_count: 4 }
    }
}

pub fn bookshelf(p: &BookshelfParams) -> TriMesh {
    let mut m = empty_mesh();
    let (hw, hh, hd) = (p.width / 2.0, p.height / 2.0, p.depth / 2.0);
    let t = p.panel_t / 2.0;
    // Side panels.
    for sx in [-1.0, 1.0] {
        boxed(&mut m, Vector3::new(t, hh, hd), Vector3::new(sx * (hw - t), hh, 0.0));
    }
    // Back panel (thin, on −z).
    boxed(&mut m, Vector3::new(hw, hh, t), Vector3::new(0.0, hh, -(hd - t)));
    // Shelves spanning between the sides, bottom board included.
    let inner_w = p.width - 2.0 * p.panel_t;
    let n = p.shelf_count.max(1);
    for k in 0..n {
        let y = (k as f64 / (n - 1).max(1) as f64) * (p.height - p.panel_t) + t;
        boxed(&mut m, Vector3::new(inner_w / 2.0, t, hd), Vector3::new(0.0, y, 0.0));
    }
    m
}

/// An open-top room shell: one floor quad and four wall quads, interior
/// centered on the origin with the floor at y = 0. Surfaces are unoriented
/// single quads — the renderer does not cull back faces.
pub fn room_shell(width: f64, depth: f64, height: f64) -> TriMesh {
    let (hw, hd) = (width / 2.0, depth / 2.0);
    let quad = |m: &mut TriMesh, a: [f64; 3], b: [f64; 3], c: [f64; 3], d: [f64; 3]| {
        let base = m.vertices.len() as u32;
        for p in [a, b, c, d] {
            m.vertices.push(nalgebra::Point3::new(p[0], p[1], p[2]));
        }
        m.faces.push([base, base + 1, base + 2]);
        m.faces.push([base, base + 2, base + 3]);
    };
    let mut m = empty_mesh();
    quad(&mut m, [-hw, 0.0, -hd], [hw, 0.0, -hd], [hw, 0.0, hd], [-hw, 0.0, hd]);
    quad(&mut m, [-hw, 0.0, -hd], [hw, 0.0, -hd], [hw, height, -hd], [-hw, height, -hd]);
    quad(&mut m, [-hw, 0.0, hd], [hw, 0.0, hd], [hw, height, hd], [-hw, height, hd]);
    quad(&mut m, [-hw, 0.0, -hd], [-hw, 0.0, hd], [-hw, height, hd], [-hw, height, -hd]);
    quad(&mut m, [hw, 0.0, -hd], [hw, 0.0, hd], [hw, height, hd], [hw, height, -hd]);
    m
}

/// A random chair whose proportions are drawn from `seed` — deterministic
/// per (seed) pair and distinct across seeds with overwhelming probability.
pub fn random_chair(seed: u64) -> TriMesh {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    chair(&ChairParams {
        seat_w: rng.gen_range(0.35..0.6),
        seat_d: rng.gen_range(0.35..0.6),
        seat_h: rng.gen_range(0.38..0.55),
        seat_t: rng.gen_range(0.03..0.08),
        back_h: rng.gen_range(0.3..0.6),
        back_t: rng.gen_range(0.03..0.08),
        leg_t: rng.gen_range(0.03..0.09),
    })
}

pub fn random_table(seed: u64) -> TriMesh {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    table(&TableParams {
        top_w: rng.gen_range(0.8..1.8),
        top_d: rng.gen_range(0.5..1.1),
        height: rng.gen_range(0.6..0.9),
        top_t: rng.gen_range(0.03..0.08),
        leg_t: rng.gen_range(0.04..0.1),
        leg_inset: rng.gen_range(0.02..0.15),
    })
}

pub fn random_bookshelf(seed: u64) -> TriMesh {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    bookshelf(&BookshelfParams {
        width: rng.gen_range(0.5..1.2),
        height: rng.gen_range(1.0..2.2),
        depth: rng.gen_range(0.22..0.45),
        panel_t: rng.gen_range(0.02..0.06),
        shelf_count: rng.gen_range(3..6),
    })
}

/// `count` models of one category, ids `{prefix}00`, `{prefix}01`, …; the
/// family's proportions are drawn per id from `seed`.
pub fn decoy_family(
    category: &str,
    prefix: &str,
    count: usize,
    seed: u64,
) -> Vec<(String, String, TriMesh)> {
    (0..count)
        .map(|i| {
            let id = format!("{prefix}{i:02}");
            let model_seed = seed ^ (i as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
            let mesh = match category {
                "table" => random_table(model_seed),
                "bookshelf" => random_bookshelf(model_seed),
                _ => random_chair(model_seed),
            };
            (id, category.to_string(), mesh)
        })
        .collect()
}
