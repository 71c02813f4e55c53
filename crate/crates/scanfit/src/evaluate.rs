//! Annotation evaluation: per-object deviation of translation, rotation,
//! scale, and shape between a predicted and a reference annotation set,
//! with self-describing aggregate statistics and histograms.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use image::{GrayImage, Luma};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cad::{CadDatabase, CadError};
use crate::geometry::{chamfer_symmetric, GeometryError, Pose9};
use crate::pipeline::SceneAnnotations;

pub const HISTOGRAM_BINS: usize = 30;

#[derive(Debug, Error)]
pub enum EvaluateError {
    #[error("no object ids shared between prediction and reference")]
    NoOverlap,
    #[error(transparent)]
    Cad(#[from] CadError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("failed to write {path}: {message}")]
    Write { path: String, message: String },
}

/// Deviation of one predicted object from its reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectDeviation {
    pub object_id: String,
    /// Euclidean distance between translations, meters.
    pub translation_m: f64,
    /// Geodesic angle between rotations, degrees.
    pub rotation_deg: f64,
    /// Mean over axes of |s_pred/s_ref − 1|.
    pub scale: f64,
    /// Symmetric Chamfer distance between the two models' samples, each
    /// normalized to a unit-diagonal bounding box.
    pub shape: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// Upper edge of the regular range: the 99th percentile (nearest rank).
    pub p99: f64,
    pub bin_width: f64,
    /// Counts for the 30 uniform bins covering [0, p99].
    pub bins: Vec<usize>,
    /// Values above the 99th percentile.
    pub overflow: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub mean: f64,
    pub median: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationReport {
    pub pred_scene_id: String,
    pub ref_scene_id: String,
    /// Definitions of every criterion and of the binning, so numbers are
    /// interpretable without external documentation.
    pub metadata: BTreeMap<String, String>,
    /// Matched objects, ascending by id.
    pub objects: Vec<ObjectDeviation>,
    pub unmatched_pred: Vec<String>,
    pub unmatched_ref: Vec<String>,
    pub summary: BTreeMap<String, SummaryStats>,
    pub histograms: BTreeMap<String, Histogram>,
}

/// The geodesic angle between two rotations in degrees.
pub fn rotation_angle_deg(a: &Pose9, b: &Pose9) -> f64 {
    let dot = a.rotation.quaternion().dot(b.rotation.quaternion()).abs().min(1.0);
    2.0 * dot.acos().to_degrees()
}

/// Mean per-axis relative scale deviation |s_pred/s_ref − 1|.
pub fn scale_deviation(pred: &Pose9, reference: &Pose9) -> f64 {
    (0..3)
        .map(|k| (pred.scale[k] / reference.scale[k] - 1.0).abs())
        .sum::<f64>()
        / 3.0
}

/// Nearest-rank percentile of `values` (which need not be sorted).
fn percentile(values: &[f64], q: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

/// Bins non-negative values into 30 uniform bins over [0, p99] plus an
/// overflow bin. Counts always sum to `values.len()`.
pub fn histogram(values: &[f64]) -> Histogram {
    assert!(!values.is_empty(), "histogram needs at least one value");
    let p99 = percentile(values, 0.99);
    let bin_width = p99 / HISTOGRAM_BINS as f64;
    let mut bins = vec![0usize; HISTOGRAM_BINS];
    let mut overflow = 0usize;
    for &v in values {
        if v > p99 {
            overflow += 1;
        } else if bin_width > 0.0 {
            let idx = ((v / bin_width) as usize).min(HISTOGRAM_BINS - 1);
            bins[idx] += 1;
        } else {
            bins[0] += 1; // all values equal (typically all zero)
        }
    }
    Histogram { p99, bin_width, bins, overflow }
}

fn summary(values: &[f64]) -> SummaryStats {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };
    SummaryStats {
        mean: sorted.iter().sum::<f64>() / n as f64,
        median,
        max: *sorted.last().unwrap(),
    }
}

/// Compares two annotation documents object-by-object (matched on object
/// id; unmatched ids are reported and excluded). Shape distances between
/// distinct models are computed from `n_samples` surface samples per model.
pub fn evaluate_annotations(
    pred: &SceneAnnotations,
    reference: &SceneAnnotations,
    db: &CadDatabase,
    n_samples: usize,
    seed: u64,
) -> Result<DeviationReport, EvaluateError> {
    let pred_map: BTreeMap<&str, _> =
        pred.objects.iter().map(|o| (o.object_id.as_str(), o)).collect();
    let ref_map: BTreeMap<&str, _> =
        reference.objects.iter().map(|o| (o.object_id.as_str(), o)).collect();

    let unmatched_pred: Vec<String> = pred_map
        .keys()
        .filter(|k| !ref_map.contains_key(*k))
        .map(|k| k.to_string())
        .collect();
    let unmatched_ref: Vec<String> = ref_map
        .keys()
        .filter(|k| !pred_map.contains_key(*k))
        .map(|k| k.to_string())
        .collect();

    let mut shape_cache: BTreeMap<(String, String), f64> = BTreeMap::new();
    let mut objects = Vec::new();
    for (id, p) in &pred_map {
        let Some(r) = ref_map.get(id) else { continue };
        let shape = if p.model_id == r.model_id {
            0.0
        } else {
            let key = if p.model_id <= r.model_id {
                (p.model_id.clone(), r.model_id.clone())
            } else {
                (r.model_id.clone(), p.model_id.clone())
            };
            if let Some(&d) = shape_cache.get(&key) {
                d
            } else {
                let a = db.sampled_points(&key.0, n_samples, seed)?.normalized_to_unit_diagonal()?;
                let b = db.sampled_points(&key.1, n_samples, seed)?.normalized_to_unit_diagonal()?;
                let d = chamfer_symmetric(&a, &b)?;
                shape_cache.insert(key, d);
                d
            }
        };
        objects.push(ObjectDeviation {
            object_id: id.to_string(),
            translation_m: (p.pose.translation - r.pose.translation).norm(),
            rotation_deg: rotation_angle_deg(&p.pose, &r.pose),
            scale: scale_deviation(&p.pose, &r.pose),
            shape,
        });
    }
    if objects.is_empty() {
        return Err(EvaluateError::NoOverlap);
    }

    let criteria: [(&str, fn(&ObjectDeviation) -> f64); 4] = [
        ("translation_m", |o| o.translation_m),
        ("rotation_deg", |o| o.rotation_deg),
        ("scale", |o| o.scale),
        ("shape", |o| o.shape),
    ];
    let mut summaries = BTreeMap::new();
    let mut histograms = BTreeMap::new();
    for (name, get) in criteria {
        let values: Vec<f64> = objects.iter().map(get).collect();
        summaries.insert(name.to_string(), summary(&values));
        histograms.insert(name.to_string(), histogram(&values));
    }

    let metadata: BTreeMap<String, String> = [
        ("translation_m", "Euclidean distance between predicted and reference translations, meters"),
        ("rotation_deg", "geodesic angle between predicted and reference rotations, degrees"),
        ("scale", "mean over the three axes of |s_pred/s_ref - 1| (asymmetric in pred/ref by definition)"),
        ("shape", "symmetric Chamfer distance between the two models' surface samples, each model normalized to a unit-diagonal bounding box"),
        ("histograms", "30 uniform bins from 0 to the 99th percentile (nearest rank); larger values counted in the overflow bin"),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v.to_string()))
    .collect();

    Ok(DeviationReport {
        pred_scene_id: pred.scene_id.clone(),
        ref_scene_id: reference.scene_id.clone(),
        metadata,
        objects,
        unmatched_pred,
        unmatched_ref,
        summary: summaries,
        histograms,
    })
}

/// Renders a histogram as a simple bar chart (white background, dark bars,
/// overflow bar in gray on the right).
fn histogram_image(hist: &Histogram) -> GrayImage {
    const BAR_W: u32 = 18;
    const GAP: u32 = 2;
    const PLOT_H: u32 = 200;
    const MARGIN: u32 = 10;
    let bars = hist.bins.len() as u32 + 1;
    let width = 2 * MARGIN + bars * (BAR_W + GAP);
    let height = 2 * MARGIN + PLOT_H;
    let mut img = GrayImage::from_pixel(width, height, Luma([255u8]));
    let peak = hist.bins.iter().copied().chain([hist.overflow]).max().unwrap_or(0).max(1);
    for (i, &count) in hist.bins.iter().chain([&hist.overflow]).enumerate() {
        let shade = if i == hist.bins.len() { 128u8 } else { 40u8 };
        let h = ((count as f64 / peak as f64) * PLOT_H as f64).round() as u32;
        let x0 = MARGIN + i as u32 * (BAR_W + GAP);
        for x in x0..x0 + BAR_W {
            for y in (height - MARGIN - h)..(height - MARGIN) {
                img.put_pixel(x, y, Luma([shade]));
            }
        }
    }
    // Baseline.
    for x in MARGIN..width - MARGIN {
        img.put_pixel(x, height - MARGIN, Luma([0u8]));
    }
    img
}

/// Writes `report.json` plus one histogram PNG per criterion into `out_dir`;
/// returns the written paths.
pub fn write_report(report: &DeviationReport, out_dir: &Path) -> Result<Vec<PathBuf>, EvaluateError> {
    let write_err = |path: &Path, message: String| EvaluateError::Write {
        path: path.display().to_string(),
        message,
    };
    std::fs::create_dir_all(out_dir).map_err(|e| write_err(out_dir, e.to_string()))?;
    let mut written = Vec::new();

    let json_path = out_dir.join("report.json");
    crate::ops::write_json_atomic(&json_path, report)
        .map_err(|e| write_err(&json_path, e.to_string()))?;
    written.push(json_path);

    for (name, hist) in &report.histograms {
        let path = out_dir.join(format!("hist_{name}.png"));
        let img = histogram_image(hist);
        let mut bytes = std::io::Cursor::new(Vec::new());
        img.write_to(&mut bytes, image::ImageFormat::Png)
            .map_err(|e| write_err(&path, e.to_string()))?;
        crate::ops::write_atomic(&path, bytes.get_ref())
            .map_err(|e| write_err(&path, e.to_string()))?;
        written.push(path);
    }
    Ok(written)
}
