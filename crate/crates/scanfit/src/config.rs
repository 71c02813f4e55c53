//! Engine configuration: objective weights and presets, frame selection,
//! refinement hyper-parameters, and the behavior switches that select
//! between documented alternatives.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::objective::ObjectiveWeights;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("failed to read config {path}: {source}")]
    Read {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("failed to parse config {path}: {source}")]
    Parse {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("unknown weight preset '{0}', expected scannet or arkitscenes")]
    UnknownPreset(String),
}

/// How qualifying frames are thinned down to `n_frames`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FrameSampling {
    /// Evenly spaced indices across the qualifying list; first and last
    /// qualifying frames always kept.
    #[default]
    Even,
    /// Fixed stride from the first qualifying frame.
    Stride,
}

/// How the depth-matching comparison handles reference pixels the candidate
/// render leaves uncovered.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum DepthMaskSemantics {
    /// Compare only where reference and candidate are both valid (default).
    IntersectCandidate,
    /// Count reference-valid pixels; where the candidate is invalid, charge
    /// a fixed penalty instead of a difference.
    PenalizeUncovered { penalty: f64 },
}

impl Default for DepthMaskSemantics {
    fn default() -> Self {
        DepthMaskSemantics::IntersectCandidate
    }
}

/// Whether silhouettes account for scene occlusion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SilhouetteMode {
    /// Mask of pixels where the object is the front-most surface (default).
    #[default]
    Visible,
    /// Free-floating projection ignoring occluders.
    FreeFloating,
}

/// Frame normalization applied before the pairwise shape comparison that
/// drives clone detection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CloneNormalization {
    /// Rescale each model's samples to a unit-diagonal bounding box so the
    /// threshold acts on shape, not size (default).
    #[default]
    UnitDiagonal,
    /// Compare raw canonical-frame samples.
    Raw,
}

/// Candidate pool for the joint retrieval of a clone cluster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum JointPool {
    /// Every model of the category (default).
    #[default]
    FullCategory,
    /// Union of the members' independent top-k lists (fast mode).
    TopKUnion,
}

/// Hyper-parameters of the gradient-based pose refinement. The gradient is
/// central finite differences over the 9 pose parameters; updates follow the
/// Adam moment scheme; the best pose visited is returned.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RefinementConfig {
    pub step_count: usize,
    /// Learning rate for the translation block (meters per unit step).
    pub lr_translation: f64,
    /// Learning rate for the rotation block (radians per unit step).
    pub lr_rotation: f64,
    /// Learning rate for the log-scale block.
    pub lr_log_scale: f64,
    /// Finite-difference half-step for translation (meters).
    pub eps_translation: f64,
    /// Finite-difference half-step for rotation (radians).
    pub eps_rotation: f64,
    /// Finite-difference half-step for log-scale.
    pub eps_log_scale: f64,
    /// First/second moment decay of the optimizer.
    pub beta1: f64,
    pub beta2: f64,
    /// Restrict the rotation block to yaw about gravity.
    pub yaw_only: bool,
}

impl Default for RefinementConfig {
    fn default() -> Self {
        Self {
            step_count: 200,
            lr_translation: 0.01,
            lr_rotation: 0.02,
            lr_log_scale: 0.01,
            eps_translation: 0.002,
            eps_rotation: 0.005,
            eps_log_scale: 0.005,
            beta1: 0.9,
            beta2: 0.999,
            yaw_only: false,
        }
    }
}

impl RefinementConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.step_count == 0 {
            return Err(ConfigError::Invalid("step_count must be ≥ 1".into()));
        }
        for (name, v) in [
            ("lr_translation", self.lr_translation),
            ("lr_rotation", self.lr_rotation),
            ("lr_log_scale", self.lr_log_scale),
            ("eps_translation", self.eps_translation),
            ("eps_rotation", self.eps_rotation),
            ("eps_log_scale", self.eps_log_scale),
        ] {
            if !(v > 0.0) {
                return Err(ConfigError::Invalid(format!("{name} must be > 0, got {v}")));
            }
        }
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0..1.0).contains(&b) {
                return Err(ConfigError::Invalid(format!("{name} must be in [0,1), got {b}")));
            }
        }
        Ok(())
    }
}

/// Everything the engine needs beyond the scan and database themselves.
/// All fields have working defaults, so a config file may set any subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EngineConfig {
    pub weights: ObjectiveWeights,
    /// Frames selected per object (N_T).
    pub n_frames: usize,
    /// Surface samples per CAD model.
    pub n_samples: usize,
    /// Seed for surface sampling and synthetic noise.
    pub seed: u64,
    /// Candidates kept for refinement after exhaustive scoring.
    pub top_k: usize,
    /// Shape-clone threshold on the symmetric Chamfer distance.
    pub tau: f64,
    /// Margin (meters) when deriving a segmentation from a box.
    pub segmentation_margin: f64,
    pub refinement: RefinementConfig,
    pub frame_sampling: FrameSampling,
    pub depth_mask_semantics: DepthMaskSemantics,
    pub silhouette_mode: SilhouetteMode,
    pub clone_normalization: CloneNormalization,
    pub joint_pool: JointPool,
    /// Scan class label → database category. Labels absent from the map are
    /// looked up as categories directly.
    pub class_map: std::collections::BTreeMap<String, String>,
    /// Optional on-disk cache directory for CAD surface samples.
    pub sample_cache_dir: Option<std::path::PathBuf>,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            weights: ObjectiveWeights::scannet(),
            n_frames: 20,
            n_samples: 10_000,
            seed: 0,
            top_k: 3,
            tau: 3e-3,
            segmentation_margin: 0.02,
            refinement: RefinementConfig::default(),
            frame_sampling: FrameSampling::Even,
            depth_mask_semantics: DepthMaskSemantics::IntersectCandidate,
            silhouette_mode: SilhouetteMode::Visible,
            clone_normalization: CloneNormalization::UnitDiagonal,
            joint_pool: JointPool::FullCategory,
            class_map: std::collections::BTreeMap::new(),
            sample_cache_dir: None,
        }
    }
}

impl EngineConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.display().to_string(),
            source,
        })?;
        let cfg: EngineConfig =
            serde_json::from_str(&text).map_err(|source| ConfigError::Parse {
                path: path.display().to_string(),
                source,
            })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n_frames == 0 {
            return Err(ConfigError::Invalid("n_frames must be ≥ 1".into()));
        }
        if self.n_samples == 0 {
            return Err(ConfigError::Invalid("n_samples must be ≥ 1".into()));
        }
        if self.top_k == 0 {
            return Err(ConfigError::Invalid("top_k must be ≥ 1".into()));
        }
        if !(self.tau > 0.0) {
            return Err(ConfigError::Invalid(format!("tau must be > 0, got {}", self.tau)));
        }
        if self.segmentation_margin < 0.0 {
            return Err(ConfigError::Invalid("segmentation_margin must be ≥ 0".into()));
        }
        self.weights
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.refinement.validate()
    }

    /// Replaces the weights with a named preset.
    pub fn with_preset(mut self, name: &str) -> Result<Self, ConfigError> {
        self.weights = match name.to_ascii_lowercase().as_str() {
            "scannet" => ObjectiveWeights::scannet(),
            "arkitscenes" => ObjectiveWeights::arkitscenes(),
            other => return Err(ConfigError::UnknownPreset(other.to_string())),
        };
        Ok(self)
    }
}
