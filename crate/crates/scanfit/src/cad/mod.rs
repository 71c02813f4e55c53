//! The CAD model database: category-indexed canonical meshes, memoized
//! surface samples (with an optional on-disk cache), and the box-based
//! initial pose.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use nalgebra::{Point3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::geometry::{sample_surface, Axis, GeometryError, Obb, PointCloud, Pose9, TriMesh};
use crate::io::read_mesh;

#[derive(Debug, Error)]
pub enum CadError {
    #[error("database manifest {path} invalid: {message}")]
    ManifestInvalid { path: String, message: String },
    #[error("failed to load mesh for model '{model}': {source}")]
    MeshParse {
        model: String,
        #[source]
        source: crate::io::IoError,
    },
    #[error("unknown model id '{0}'")]
    UnknownModel(String),
    #[error("class '{label}' maps to no category; available: {available:?}")]
    UnknownClass { label: String, available: Vec<String> },
    #[error("model '{model}' has zero extent along axis {axis}")]
    DegenerateModel { model: String, axis: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// One database model in its canonical frame: mesh re-centered so the
/// bounding box is symmetric about the origin (size untouched — per-axis
/// pose scale absorbs it), rotated at load so its up axis matches the
/// target convention.
#[derive(Debug, Clone)]
pub struct CadModel {
    pub id: String,
    pub category: String,
    pub mesh: TriMesh,
    pub bounds_min: Point3<f64>,
    pub bounds_max: Point3<f64>,
    /// Center of the mesh as found on disk (after up-axis alignment),
    /// recorded for traceability.
    pub original_center: Vector3<f64>,
    /// SHA-256 of the canonical mesh content; keys the disk sample cache.
    pub content_hash: String,
}

impl CadModel {
    pub fn half_extents(&self) -> Vector3<f64> {
        (self.bounds_max - self.bounds_min) * 0.5
    }
}

/// One line of the database manifest (JSON lines).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DbEntry {
    pub id: String,
    pub category: String,
    pub mesh_path: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub up_axis: Option<Axis>,
}

type SampleKey = (String, usize, u64);

/// The loaded database. Immutable after load except the sample cache,
/// which is a thread-safe memo table: concurrent first computations may
/// duplicate work but always return equal clouds.
pub struct CadDatabase {
    models: BTreeMap<String, CadModel>,
    category_index: BTreeMap<String, Vec<String>>,
    sample_cache: RwLock<HashMap<SampleKey, Arc<PointCloud>>>,
    cache_dir: Option<PathBuf>,
}

impl std::fmt::Debug for CadDatabase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CadDatabase")
            .field("models", &self.models.len())
            .field("categories", &self.category_index.keys().collect::<Vec<_>>())
            .finish()
    }
}

/// Loads a database manifest (JSON lines of `{id, category, mesh_path,
/// up_axis?}`). Meshes may be PLY or OBJ; each is rotated from its declared
/// up axis (default y) to `target_up`, then re-centered.
pub fn load_database(manifest_path: &Path, target_up: Axis) -> Result<CadDatabase, CadError> {
    let text =
        std::fs::read_to_string(manifest_path).map_err(|e| CadError::ManifestInvalid {
            path: manifest_path.display().to_string(),
            message: e.to_string(),
        })?;
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));

    let mut models = BTreeMap::new();
    for (ln, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let entry: DbEntry =
            serde_json::from_str(line).map_err(|e| CadError::ManifestInvalid {
                path: manifest_path.display().to_string(),
                message: format!("line {}: {e}", ln + 1),
            })?;
        if models.contains_key(&entry.id) {
            return Err(CadError::ManifestInvalid {
                path: manifest_path.display().to_string(),
                message: format!("duplicate model id '{}'", entry.id),
            });
        }
        let model = load_model(&entry, base, target_up)?;
        models.insert(entry.id.clone(), model);
    }

    let mut category_index: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (id, model) in &models {
        category_index.entry(model.category.clone()).or_default().push(id.clone());
    }
    // BTreeMap iteration is id-sorted, so each list is already lexicographic.

    Ok(CadDatabase {
        models,
        category_index,
        sample_cache: RwLock::new(HashMap::new()),
        cache_dir: None,
    })
}

fn load_model(entry: &DbEntry, base: &Path, target_up: Axis) -> Result<CadModel, CadError> {
    let path = base.join(&entry.mesh_path);
    let labeled = read_mesh(&path).map_err(|source| CadError::MeshParse {
        model: entry.id.clone(),
        source,
    })?;
    let mut mesh = labeled.mesh;

    // Quarter-turn into the target up convention.
    let from = entry.up_axis.unwrap_or(Axis::Y);
    if from != target_up {
        let q = UnitQuaternion::rotation_between(&from.unit(), &target_up.unit())
            .expect("distinct coordinate axes always admit a rotation");
        for v in &mut mesh.vertices {
            *v = Point3::from(q * v.coords);
        }
    }

    ingest_mesh(&entry.id, &entry.category, mesh)
}

/// Brings a mesh already in the target up convention into canonical form:
/// re-centered so the bounds are symmetric about the origin, with bounds and
/// content hash recorded.
fn ingest_mesh(id: &str, category: &str, mut mesh: TriMesh) -> Result<CadModel, CadError> {
    let (lo, hi) = mesh.aabb().ok_or_else(|| CadError::ManifestInvalid {
        path: id.to_string(),
        message: format!("model '{id}' has no vertices"),
    })?;
    let center = (lo.coords + hi.coords) * 0.5;
    for v in &mut mesh.vertices {
        *v = Point3::from(v.coords - center);
    }
    let (bounds_min, bounds_max) = mesh.aabb().unwrap();

    let content_hash = hash_mesh(&mesh);
    Ok(CadModel {
        id: id.to_string(),
        category: category.to_string(),
        mesh,
        bounds_min,
        bounds_max,
        original_center: center,
        content_hash,
    })
}

fn hash_mesh(mesh: &TriMesh) -> String {
    let mut hasher = Sha256::new();
    for v in &mesh.vertices {
        for c in [v.x, v.y, v.z] {
            hasher.update(c.to_le_bytes());
        }
    }
    for f in &mesh.faces {
        for &i in f {
            hasher.update(i.to_le_bytes());
        }
    }
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for b in digest {
        use std::fmt::Write;
        write!(hex, "{b:02x}").unwrap();
    }
    hex
}

impl CadDatabase {
    /// Builds a database from meshes already in memory and in the target up
    /// convention. Each entry is (id, category, mesh); meshes are re-centered
    /// exactly as `load_database` does.
    pub fn from_meshes(
        entries: impl IntoIterator<Item = (String, String, TriMesh)>,
    ) -> Result<Self, CadError> {
        let mut models = BTreeMap::new();
        for (id, category, mesh) in entries {
            if models.contains_key(&id) {
                return Err(CadError::ManifestInvalid {
                    path: id.clone(),
                    message: format!("duplicate model id '{id}'"),
                });
            }
            let model = ingest_mesh(&id, &category, mesh)?;
            models.insert(id, model);
        }
        let mut category_index: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for (id, model) in &models {
            category_index.entry(model.category.clone()).or_default().push(id.clone());
        }
        Ok(Self {
            models,
            category_index,
            sample_cache: RwLock::new(HashMap::new()),
            cache_dir: None,
        })
    }

    /// Enables the on-disk sample cache in `dir` (keyed by mesh content
    /// hash, sample count, and seed). The cache is an optimization only and
    /// can be deleted at any time.
    pub fn with_cache_dir(mut self, dir: PathBuf) -> Self {
        self.cache_dir = Some(dir);
        self
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    pub fn model(&self, id: &str) -> Result<&CadModel, CadError> {
        self.models.get(id).ok_or_else(|| CadError::UnknownModel(id.to_string()))
    }

    pub fn model_ids(&self) -> impl Iterator<Item = &String> {
        self.models.keys()
    }

    pub fn categories(&self) -> Vec<String> {
        self.category_index.keys().cloned().collect()
    }

    /// The model ids of the category a class label maps to, in lexicographic
    /// order (retrieval tie-breaking depends on this order). The label is
    /// first translated through `class_map` ("armchair" → "chair"); labels
    /// not in the map are used verbatim.
    pub fn candidates_for_class(
        &self,
        label: &str,
        class_map: &BTreeMap<String, String>,
    ) -> Result<&[String], CadError> {
        let category = class_map.get(label).map(|s| s.as_str()).unwrap_or(label);
        self.category_index
            .get(category)
            .map(|v| v.as_slice())
            .ok_or_else(|| CadError::UnknownClass {
                label: label.to_string(),
                available: self.categories(),
            })
    }

    /// Deterministic surface samples of a model's canonical mesh, memoized
    /// per (id, n, seed) in memory and optionally on disk.
    pub fn sampled_points(
        &self,
        id: &str,
        n: usize,
        seed: u64,
    ) -> Result<Arc<PointCloud>, CadError> {
        let key = (id.to_string(), n, seed);
        if let Some(hit) = self.sample_cache.read().unwrap().get(&key) {
            return Ok(hit.clone());
        }
        let model = self.model(id)?;

        let disk_path = self
            .cache_dir
            .as_ref()
            .map(|dir| dir.join(format!("{}-{}-{}.samples", model.content_hash, n, seed)));
        let cloud = match disk_path.as_ref().and_then(|p| read_sample_file(p, n)) {
            Some(c) => c,
            None => {
                let computed = sample_surface(&model.mesh, n, seed)?;
                if let Some(p) = &disk_path {
                    // Best effort: cache write failures are not fatal.
                    let _ = write_sample_file(p, &computed);
                }
                computed
            }
        };
        let arc = Arc::new(cloud);
        let mut cache = self.sample_cache.write().unwrap();
        // A concurrent thread may have raced us here; keep the first entry
        // so every caller shares one allocation.
        Ok(cache.entry(key).or_insert(arc).clone())
    }

    /// The pose that maps a model's canonical frame onto an oriented box:
    /// translation and rotation from the box, per-axis scale the ratio of
    /// half extents, so the transformed canonical bounds coincide with the
    /// box exactly.
    pub fn initial_pose_from_obb(obb: &Obb, model: &CadModel) -> Result<Pose9, CadError> {
        let he = model.half_extents();
        for k in 0..3 {
            if he[k] <= 1e-12 {
                return Err(CadError::DegenerateModel { model: model.id.clone(), axis: k });
            }
        }
        let scale = Vector3::new(
            obb.half_extents.x / he.x,
            obb.half_extents.y / he.y,
            obb.half_extents.z / he.z,
        );
        Ok(Pose9::new(obb.center.coords, obb.rotation, scale)?)
    }
}

const SAMPLE_MAGIC: &[u8; 8] = b"sfsamp01";

fn write_sample_file(path: &Path, cloud: &PointCloud) -> std::io::Result<()> {
    let mut bytes = Vec::with_capacity(16 + cloud.len() * 24);
    bytes.extend_from_slice(SAMPLE_MAGIC);
    bytes.extend_from_slice(&(cloud.len() as u64).to_le_bytes());
    for p in &cloud.points {
        for c in [p.x, p.y, p.z] {
            bytes.extend_from_slice(&c.to_le_bytes());
        }
    }
    crate::ops::write_atomic(path, &bytes)
}

fn read_sample_file(path: &Path, expected_n: usize) -> Option<PointCloud> {
    let bytes = std::fs::read(path).ok()?;
    if bytes.len() < 16 || &bytes[..8] != SAMPLE_MAGIC {
        return None;
    }
    let n = u64::from_le_bytes(bytes[8..16].try_into().ok()?) as usize;
    if n != expected_n || bytes.len() != 16 + n * 24 {
        return None;
    }
    let mut points = Vec::with_capacity(n);
    for i in 0..n {
        let off = 16 + i * 24;
        let x = f64::from_le_bytes(bytes[off..off + 8].try_into().ok()?);
        let y = f64::from_le_bytes(bytes[off + 8..off + 16].try_into().ok()?);
        let z = f64::from_le_bytes(bytes[off + 16..off + 24].try_into().ok()?);
        points.push(Point3::new(x, y, z));
    }
    Some(PointCloud::new(points))
}

/// Writes a database manifest as JSON lines.
pub fn save_database_manifest(path: &Path, entries: &[DbEntry]) -> std::io::Result<()> {
    let mut text = String::new();
    for e in entries {
        text.push_str(
            &serde_json::to_string(e)
                .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))?,
        );
        text.push('\n');
    }
    crate::ops::write_atomic(path, text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::fit_obb_gravity_aligned;
    use crate::io::{write_obj, write_ply, PlyFormat};
    use approx::assert_relative_eq;

    fn write_test_db(dir: &Path, shuffle: bool) -> PathBuf {
        let cube = TriMesh::box_mesh(0.5, 0.5, 0.5);
        let offset_cube = cube.translated(Vector3::new(5.0, 5.0, 5.0));
        let slab = TriMesh::box_mesh(1.0, 0.2, 0.6);
        write_ply(&dir.join("cube.ply"), &cube, None, PlyFormat::BinaryLittleEndian).unwrap();
        write_obj(&dir.join("offset.obj"), &offset_cube).unwrap();
        write_ply(&dir.join("slab.ply"), &slab, None, PlyFormat::Ascii).unwrap();
        let mut entries = vec![
            DbEntry {
                id: "chair-b".into(),
                category: "chair".into(),
                mesh_path: "cube.ply".into(),
                up_axis: None,
            },
            DbEntry {
                id: "chair-a".into(),
                category: "chair".into(),
                mesh_path: "offset.obj".into(),
                up_axis: None,
            },
            DbEntry {
                id: "table-a".into(),
                category: "table".into(),
                mesh_path: "slab.ply".into(),
                up_axis: None,
            },
        ];
        if shuffle {
            entries.reverse();
        }
        let path = dir.join(if shuffle { "db-shuffled.jsonl" } else { "db.jsonl" });
        save_database_manifest(&path, &entries).unwrap();
        path
    }

    #[test]
    fn loads_categories_sorted_and_recentered() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = write_test_db(dir.path(), false);
        let db = load_database(&manifest, Axis::Y).unwrap();
        assert_eq!(db.len(), 3);
        assert_eq!(db.categories(), vec!["chair".to_string(), "table".to_string()]);
        let chairs = db.candidates_for_class("chair", &BTreeMap::new()).unwrap();
        assert_eq!(chairs, &["chair-a".to_string(), "chair-b".to_string()]);
        // The offset cube was re-centered: bounds symmetric about origin.
        let m = db.model("chair-a").unwrap();
        assert_relative_eq!(m.bounds_min.coords, -m.bounds_max.coords, epsilon = 1e-12);
        assert_relative_eq!(m.original_center, Vector3::new(5.0, 5.0, 5.0), epsilon = 1e-12);
    }

    #[test]
    fn load_is_order_independent() {
        let dir = tempfile::tempdir().unwrap();
        let m1 = write_test_db(dir.path(), false);
        let m2 = write_test_db(dir.path(), true);
        let a = load_database(&m1, Axis::Y).unwrap();
        let b = load_database(&m2, Axis::Y).unwrap();
        let ids_a: Vec<_> = a.model_ids().cloned().collect();
        let ids_b: Vec<_> = b.model_ids().cloned().collect();
        assert_eq!(ids_a, ids_b);
        for id in ids_a {
            assert_eq!(a.model(&id).unwrap().mesh, b.model(&id).unwrap().mesh);
        }
    }

    #[test]
    fn duplicate_id_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let cube = TriMesh::box_mesh(0.5, 0.5, 0.5);
        write_ply(&dir.path().join("c.ply"), &cube, None, PlyFormat::Ascii).unwrap();
        let entries = vec![
            DbEntry { id: "x".into(), category: "c".into(), mesh_path: "c.ply".into(), up_axis: None },
            DbEntry { id: "x".into(), category: "c".into(), mesh_path: "c.ply".into(), up_axis: None },
        ];
        let path = dir.path().join("dup.jsonl");
        save_database_manifest(&path, &entries).unwrap();
        let err = load_database(&path, Axis::Y).unwrap_err();
        assert!(err.to_string().contains("duplicate model id"));
    }

    #[test]
    fn unknown_class_lists_available_categories() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = write_test_db(dir.path(), false);
        let db = load_database(&manifest, Axis::Y).unwrap();
        match db.candidates_for_class("sofa", &BTreeMap::new()) {
            Err(CadError::UnknownClass { label, available }) => {
                assert_eq!(label, "sofa");
                assert_eq!(available, vec!["chair".to_string(), "table".to_string()]);
            }
            other => panic!("expected UnknownClass, got {other:?}"),
        }
        // A class map entry fixes it.
        let mut map = BTreeMap::new();
        map.insert("sofa".to_string(), "chair".to_string());
        assert_eq!(db.candidates_for_class("sofa", &map).unwrap().len(), 2);
    }

    #[test]
    fn up_axis_rotation_maps_model_upright() {
        // A slab that is tall along +z in its own convention.
        let dir = tempfile::tempdir().unwrap();
        let tall_z = TriMesh::box_mesh(0.1, 0.2, 0.9);
        write_ply(&dir.path().join("t.ply"), &tall_z, None, PlyFormat::Ascii).unwrap();
        let entries = vec![DbEntry {
            id: "tall".into(),
            category: "c".into(),
            mesh_path: "t.ply".into(),
            up_axis: Some(Axis::Z),
        }];
        let path = dir.path().join("up.jsonl");
        save_database_manifest(&path, &entries).unwrap();
        let db = load_database(&path, Axis::Y).unwrap();
        let he = db.model("tall").unwrap().half_extents();
        // The long dimension now lies along y.
        assert_relative_eq!(he.y, 0.9, epsilon = 1e-12);
        assert_relative_eq!(he.x.min(he.z), 0.1, epsilon = 1e-12);
    }

    #[test]
    fn sampling_is_memoized_and_shared() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = write_test_db(dir.path(), false);
        let db = load_database(&manifest, Axis::Y).unwrap();
        let a = db.sampled_points("chair-b", 500, 7).unwrap();
        let b = db.sampled_points("chair-b", 500, 7).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        assert_eq!(a.len(), 500);
        assert!(db.sampled_points("nope", 10, 0).is_err());
    }

    #[test]
    fn disk_cache_returns_identical_clouds() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = write_test_db(dir.path(), false);
        let cache = dir.path().join("cache");

        let plain = load_database(&manifest, Axis::Y).unwrap();
        let no_cache = plain.sampled_points("table-a", 777, 3).unwrap();

        let warm = load_database(&manifest, Axis::Y)
            .unwrap()
            .with_cache_dir(cache.clone());
        let first = warm.sampled_points("table-a", 777, 3).unwrap();
        assert_eq!(*first, *no_cache);
        assert!(std::fs::read_dir(&cache).unwrap().count() > 0);

        // A fresh database instance must hit the disk file and agree.
        let reload = load_database(&manifest, Axis::Y).unwrap().with_cache_dir(cache);
        let second = reload.sampled_points("table-a", 777, 3).unwrap();
        assert_eq!(*second, *no_cache);
    }

    #[test]
    fn initial_pose_identity_for_matching_cube() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = write_test_db(dir.path(), false);
        let db = load_database(&manifest, Axis::Y).unwrap();
        let model = db.model("chair-b").unwrap(); // unit cube, he 0.5
        let obb = Obb::new(
            Point3::origin(),
            Vector3::new(0.5, 0.5, 0.5),
            UnitQuaternion::identity(),
        )
        .unwrap();
        let pose = CadDatabase::initial_pose_from_obb(&obb, model).unwrap();
        assert_eq!(pose.translation, Vector3::zeros());
        assert_relative_eq!(pose.scale, Vector3::new(1.0, 1.0, 1.0), epsilon = 1e-12);
        assert!(pose.rotation.angle() < 1e-12);
    }

    #[test]
    fn initial_pose_scales_half_extents() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = write_test_db(dir.path(), false);
        let db = load_database(&manifest, Axis::Y).unwrap();
        let model = db.model("chair-b").unwrap();
        let obb = Obb::new(
            Point3::new(1.0, 2.0, 3.0),
            Vector3::new(1.0, 2.0, 3.0),
            UnitQuaternion::identity(),
        )
        .unwrap();
        let pose = CadDatabase::initial_pose_from_obb(&obb, model).unwrap();
        assert_relative_eq!(pose.scale, Vector3::new(2.0, 4.0, 6.0), epsilon = 1e-12);
    }

    #[test]
    fn initial_pose_refits_to_the_same_box() {
        use rand::{Rng, SeedableRng};
        let dir = tempfile::tempdir().unwrap();
        let manifest = write_test_db(dir.path(), false);
        let db = load_database(&manifest, Axis::Y).unwrap();
        let model = db.model("table-a").unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let yaw = rng.gen_range(0.0..std::f64::consts::FRAC_PI_2 - 0.01);
            let obb = Obb::new(
                Point3::new(
                    rng.gen_range(-3.0..3.0),
                    rng.gen_range(-3.0..3.0),
                    rng.gen_range(-3.0..3.0),
                ),
                Vector3::new(
                    rng.gen_range(0.2..2.0),
                    rng.gen_range(0.2..2.0),
                    rng.gen_range(0.2..2.0),
                ),
                UnitQuaternion::from_axis_angle(&Vector3::y_axis(), yaw),
            )
            .unwrap();
            let pose = CadDatabase::initial_pose_from_obb(&obb, model).unwrap();
            // Transform the canonical corner points and refit.
            let corners = [
                model.bounds_min,
                Point3::new(model.bounds_max.x, model.bounds_min.y, model.bounds_min.z),
                Point3::new(model.bounds_min.x, model.bounds_max.y, model.bounds_min.z),
                Point3::new(model.bounds_min.x, model.bounds_min.y, model.bounds_max.z),
                Point3::new(model.bounds_max.x, model.bounds_max.y, model.bounds_min.z),
                Point3::new(model.bounds_max.x, model.bounds_min.y, model.bounds_max.z),
                Point3::new(model.bounds_min.x, model.bounds_max.y, model.bounds_max.z),
                model.bounds_max,
            ];
            let world = PointCloud::new(corners.iter().map(|c| pose.apply(c)).collect());
            let refit = fit_obb_gravity_aligned(&world, Axis::Y).unwrap();
            assert_relative_eq!(refit.center, obb.center, epsilon = 1e-9);
            // Yaw may come back rotated a quarter turn with swapped extents;
            // compare the corner sets instead.
            let mut got: Vec<_> = refit.corners().to_vec();
            let mut want: Vec<_> = obb.corners().to_vec();
            let sort = |v: &mut Vec<Point3<f64>>| {
                v.sort_by(|a, b| {
                    a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)).then(a.z.total_cmp(&b.z))
                })
            };
            sort(&mut got);
            sort(&mut want);
            for (g, w) in got.iter().zip(&want) {
                assert_relative_eq!(g.coords, w.coords, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn degenerate_model_is_rejected_for_pose_init() {
        let flat = TriMesh::new(
            vec![
                Point3::new(-1.0, 0.0, -1.0),
                Point3::new(1.0, 0.0, -1.0),
                Point3::new(0.0, 0.0, 1.0),
            ],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let model = CadModel {
            id: "flat".into(),
            category: "c".into(),
            content_hash: hash_mesh(&flat),
            bounds_min: flat.aabb().unwrap().0,
            bounds_max: flat.aabb().unwrap().1,
            original_center: Vector3::zeros(),
            mesh: flat,
        };
        let obb = Obb::new(
            Point3::origin(),
            Vector3::new(1.0, 1.0, 1.0),
            UnitQuaternion::identity(),
        )
        .unwrap();
        assert!(matches!(
            CadDatabase::initial_pose_from_obb(&obb, &model),
            Err(CadError::DegenerateModel { axis: 1, .. })
        ));
    }
}
