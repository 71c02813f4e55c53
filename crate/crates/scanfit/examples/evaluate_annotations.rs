//! Measuring how far one annotation document deviates from another.
//!
//! Builds a reference document, perturbs each object differently (a shifted
//! chair, a rotated and rescaled chair, a table swapped for a lookalike
//! model), and reports per-object and summary deviations: translation in
//! meters, rotation in degrees, relative scale error, and a
//! normalization-invariant shape distance between the assigned models. Run
//! with `cargo run --example evaluate_annotations`.

use nalgebra::{Unit, UnitQuaternion, Vector3};

use scanfit::cad::CadDatabase;
use scanfit::evaluate::{evaluate_annotations, write_report};
use scanfit::objective::{ObjectiveBreakdown, ObjectiveWeights};
use scanfit::pipeline::{ObjectResult, SceneAnnotations};
use scanfit::geometry::Pose9;
use scanfit::procgen;

fn object(id: &str, class: &str, model_id: &str, pose: Pose9) -> ObjectResult {
    ObjectResult {
        object_id: id.to_string(),
        class: class.to_string(),
        model_id: model_id.to_string(),
        pose,
        cluster_id: None,
        breakdown: ObjectiveBreakdown { l_dpt: 0.0, l_sil: 0.0, l_cd: 0.0, total: 0.0 },
        top_k: Vec::new(),
    }
}

fn doc(objects: Vec<ObjectResult>) -> SceneAnnotations {
    SceneAnnotations {
        scene_id: "eval_demo".to_string(),
        preset: None,
        weights: ObjectiveWeights::scannet(),
        objects,
        clusters: Vec::new(),
        failures: Vec::new(),
    }
}

fn main() {
    let db = CadDatabase::from_meshes(vec![
        ("chair00".to_string(), "chair".to_string(), procgen::random_chair(42)),
        ("table00".to_string(), "table".to_string(), procgen::random_table(43)),
        ("table01".to_string(), "table".to_string(), procgen::random_table(44)),
    ])
    .unwrap();

    let upright = |x: f64, z: f64, yaw: f64| Pose9 {
        translation: Vector3::new(x, 0.3, z),
        rotation: UnitQuaternion::from_axis_angle(&Vector3::y_axis(), yaw),
        scale: Vector3::repeat(1.0),
    };
    let reference = doc(vec![
        object("chair_a", "chair", "chair00", upright(-0.6, 0.2, 0.4)),
        object("chair_b", "chair", "chair00", upright(0.7, -0.3, 1.9)),
        object("table_a", "table", "table00", upright(0.0, 0.5, 0.0)),
    ]);

    // Perturb each object differently.
    let mut predicted = reference.clone();
    predicted.objects[0].pose.translation += Vector3::new(0.03, 0.0, -0.04);
    predicted.objects[1].pose.rotation = UnitQuaternion::from_axis_angle(
        &Unit::new_normalize(Vector3::new(0.1, 1.0, 0.05)),
        4.2f64.to_radians(),
    ) * predicted.objects[1].pose.rotation;
    predicted.objects[1].pose.scale = Vector3::new(1.05, 0.97, 1.02);
    predicted.objects[2].model_id = "table01".to_string();

    let report = evaluate_annotations(&predicted, &reference, &db, 2_000, 0).unwrap();
    println!("matched {} objects:", report.objects.len());
    println!(
        "  {:<8} {:>13} {:>12} {:>7} {:>7}",
        "object", "translation_m", "rotation_deg", "scale", "shape"
    );
    for dev in &report.objects {
        println!(
            "  {:<8} {:>13.4} {:>12.3} {:>7.4} {:>7.4}",
            dev.object_id, dev.translation_m, dev.rotation_deg, dev.scale, dev.shape
        );
    }

    println!("summary (mean / median / max):");
    for (name, stats) in &report.summary {
        println!("  {:<14} {:.4} / {:.4} / {:.4}", name, stats.mean, stats.median, stats.max);
    }

    // The report and its deviation histograms land on disk as JSON + PNG.
    let out = std::path::Path::new("target/example-output/evaluate_annotations");
    let written = write_report(&report, out).unwrap();
    println!("wrote:");
    for path in &written {
        println!("  {}", path.display());
    }
}
