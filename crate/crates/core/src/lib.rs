//! Multimodal, multiview sleep-pose classification.
//!
//! The pipeline extracts per-modality features (oriented-gradient histograms
//! for RGB, tiled raw moments for depth and pressure), trains probabilistic
//! unimodal classifiers, estimates per-scene modality trust weights by
//! solving a simplex-constrained least-squares problem, and fuses unimodal
//! probability vectors into one trusted decision. A deterministic synthetic
//! dataset generator and a cross-validation harness drive end-to-end
//! experiments.

pub mod classifiers;
pub mod domain;
pub mod eval;
pub mod features;
pub mod fusion;
pub mod imgproc;
pub mod synth;
pub mod trust;

pub use domain::{
    partition_by_scene, stratified_folds, Channel, DataPoint, Dataset, DatasetConfig,
    FeatureVector, Illumination, Modality, Occlusion, PoseLabel, SceneCondition, View,
    LABEL_COUNT, SCENE_COUNT,
};
