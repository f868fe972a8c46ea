//! Shared vocabulary for the pose-classification pipeline: pose labels, scene
//! conditions, sensor modalities, camera views, feature vectors and datasets.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DomainError {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("need at least 2 folds, got {0}")]
    TooFewFolds(usize),
    #[error("label {label} has {count} samples, fewer than {folds} folds")]
    InsufficientSamples {
        label: PoseLabel,
        count: usize,
        folds: usize,
    },
    #[error("datapoint {index} does not match the dataset channel set")]
    ChannelMismatch { index: usize },
    #[error("feature vector for {channel} has length {got}, expected {expected}")]
    FeatureLength {
        channel: Channel,
        got: usize,
        expected: usize,
    },
    #[error("non-finite value in feature vector for {channel}")]
    NonFiniteFeature { channel: Channel },
    #[error("unknown label name {0:?}")]
    UnknownLabel(String),
    #[error("unknown scene id {0:?}")]
    UnknownScene(String),
}

/// Number of pose classes, background included.
pub const LABEL_COUNT: usize = 11;

/// One of the eleven pose classes. Index 0 is the empty bed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PoseLabel {
    Background,
    SoldierU,
    SoldierD,
    FallerR,
    FallerL,
    LogR,
    LogL,
    YearnerR,
    YearnerL,
    FetalR,
    FetalL,
}

impl PoseLabel {
    pub const ALL: [PoseLabel; LABEL_COUNT] = [
        PoseLabel::Background,
        PoseLabel::SoldierU,
        PoseLabel::SoldierD,
        PoseLabel::FallerR,
        PoseLabel::FallerL,
        PoseLabel::LogR,
        PoseLabel::LogL,
        PoseLabel::YearnerR,
        PoseLabel::YearnerL,
        PoseLabel::FetalR,
        PoseLabel::FetalL,
    ];

    pub fn index(self) -> usize {
        Self::ALL.iter().position(|&l| l == self).unwrap()
    }

    pub fn from_index(index: usize) -> Option<PoseLabel> {
        Self::ALL.get(index).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            PoseLabel::Background => "Background",
            PoseLabel::SoldierU => "SoldierU",
            PoseLabel::SoldierD => "SoldierD",
            PoseLabel::FallerR => "FallerR",
            PoseLabel::FallerL => "FallerL",
            PoseLabel::LogR => "LogR",
            PoseLabel::LogL => "LogL",
            PoseLabel::YearnerR => "YearnerR",
            PoseLabel::YearnerL => "YearnerL",
            PoseLabel::FetalR => "FetalR",
            PoseLabel::FetalL => "FetalL",
        }
    }

    pub fn from_name(name: &str) -> Result<PoseLabel, DomainError> {
        Self::ALL
            .iter()
            .copied()
            .find(|l| l.name() == name)
            .ok_or_else(|| DomainError::UnknownLabel(name.to_string()))
    }

    /// The mirrored pose (left/right swapped); symmetric poses map to themselves.
    pub fn mirrored(self) -> PoseLabel {
        match self {
            PoseLabel::FallerR => PoseLabel::FallerL,
            PoseLabel::FallerL => PoseLabel::FallerR,
            PoseLabel::LogR => PoseLabel::LogL,
            PoseLabel::LogL => PoseLabel::LogR,
            PoseLabel::YearnerR => PoseLabel::YearnerL,
            PoseLabel::YearnerL => PoseLabel::YearnerR,
            PoseLabel::FetalR => PoseLabel::FetalL,
            PoseLabel::FetalL => PoseLabel::FetalR,
            other => other,
        }
    }
}

impl fmt::Display for PoseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub enum Illumination {
    Bright,
    Medium,
    Dark,
}

impl Illumination {
    pub const ALL: [Illumination; 3] = [
        Illumination::Bright,
        Illumination::Medium,
        Illumination::Dark,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Illumination::Bright => "bright",
            Illumination::Medium => "medium",
            Illumination::Dark => "dark",
        }
    }
}

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub enum Occlusion {
    Clear,
    Blanket,
    Pillow,
    BlanketPillow,
}

impl Occlusion {
    pub const ALL: [Occlusion; 4] = [
        Occlusion::Clear,
        Occlusion::Blanket,
        Occlusion::Pillow,
        Occlusion::BlanketPillow,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Occlusion::Clear => "clear",
            Occlusion::Blanket => "blanket",
            Occlusion::Pillow => "pillow",
            Occlusion::BlanketPillow => "blanket_pillow",
        }
    }

    pub fn has_blanket(self) -> bool {
        matches!(self, Occlusion::Blanket | Occlusion::BlanketPillow)
    }

    pub fn has_pillow(self) -> bool {
        matches!(self, Occlusion::Pillow | Occlusion::BlanketPillow)
    }
}

/// One of the 12 illumination x occlusion combinations.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub struct SceneCondition {
    pub illumination: Illumination,
    pub occlusion: Occlusion,
}

pub const SCENE_COUNT: usize = 12;

impl SceneCondition {
    pub fn new(illumination: Illumination, occlusion: Occlusion) -> Self {
        SceneCondition {
            illumination,
            occlusion,
        }
    }

    /// All 12 conditions in the fixed enumeration order (illumination-major).
    pub fn all() -> impl Iterator<Item = SceneCondition> {
        Illumination::ALL.into_iter().flat_map(|i| {
            Occlusion::ALL
                .into_iter()
                .map(move |o| SceneCondition::new(i, o))
        })
    }

    pub fn index(self) -> usize {
        let i = Illumination::ALL.iter().position(|&x| x == self.illumination).unwrap();
        let o = Occlusion::ALL.iter().position(|&x| x == self.occlusion).unwrap();
        i * Occlusion::ALL.len() + o
    }

    pub fn from_index(index: usize) -> Option<SceneCondition> {
        SceneCondition::all().nth(index)
    }

    pub fn id(self) -> String {
        format!("{}_{}", self.illumination.id(), self.occlusion.id())
    }

    pub fn from_id(id: &str) -> Result<SceneCondition, DomainError> {
        SceneCondition::all()
            .find(|s| s.id() == id)
            .ok_or_else(|| DomainError::UnknownScene(id.to_string()))
    }
}

impl fmt::Display for SceneCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

/// Sensor modality; ordering is fixed as (R, D, P).
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub enum Modality {
    Rgb,
    Depth,
    Pressure,
}

impl Modality {
    pub const ALL: [Modality; 3] = [Modality::Rgb, Modality::Depth, Modality::Pressure];

    pub fn tag(self) -> &'static str {
        match self {
            Modality::Rgb => "R",
            Modality::Depth => "D",
            Modality::Pressure => "P",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Modality> {
        Self::ALL.iter().copied().find(|m| m.tag() == tag)
    }

    /// Pressure comes from a single mat and has no camera view.
    pub fn is_viewless(self) -> bool {
        matches!(self, Modality::Pressure)
    }
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Camera view; ordering is fixed as (t, s, h).
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub enum View {
    Top,
    Side,
    Head,
}

impl View {
    pub const ALL: [View; 3] = [View::Top, View::Side, View::Head];

    pub fn tag(self) -> &'static str {
        match self {
            View::Top => "t",
            View::Side => "s",
            View::Head => "h",
        }
    }

    pub fn from_tag(tag: &str) -> Option<View> {
        Self::ALL.iter().copied().find(|v| v.tag() == tag)
    }
}

impl fmt::Display for View {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// A (modality, view) pair keying one sensor channel. Pressure is viewless.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub struct Channel {
    pub modality: Modality,
    pub view: Option<View>,
}

impl Channel {
    pub fn new(modality: Modality, view: Option<View>) -> Self {
        Channel { modality, view }
    }

    pub fn viewed(modality: Modality, view: View) -> Self {
        Channel {
            modality,
            view: Some(view),
        }
    }

    pub fn pressure() -> Self {
        Channel {
            modality: Modality::Pressure,
            view: None,
        }
    }

    /// The channel set for given modality and view selections, in fixed
    /// modality-major view-minor order.
    pub fn set(modalities: &[Modality], views: &[View]) -> Vec<Channel> {
        let mut out = Vec::new();
        for &m in modalities {
            if m.is_viewless() {
                out.push(Channel::new(m, None));
            } else {
                for &v in views {
                    out.push(Channel::viewed(m, v));
                }
            }
        }
        out
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.view {
            Some(v) => write!(f, "{}_{}", self.modality.tag(), v.tag()),
            None => f.write_str(self.modality.tag()),
        }
    }
}

/// Dense feature vector extracted from one channel of one observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub channel: Channel,
}

impl FeatureVector {
    pub fn new(values: Vec<f64>, channel: Channel) -> Result<Self, DomainError> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(DomainError::NonFiniteFeature { channel });
        }
        Ok(FeatureVector { values, channel })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// One observation: per-channel features plus label and scene metadata.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DataPoint {
    pub features: BTreeMap<Channel, FeatureVector>,
    pub label: PoseLabel,
    pub scene: SceneCondition,
    pub actor_id: u32,
    pub session_id: u32,
}

impl DataPoint {
    pub fn feature(&self, channel: Channel) -> Option<&FeatureVector> {
        self.features.get(&channel)
    }
}

/// Active channels and per-channel feature dimensions for a dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetConfig {
    pub modalities: Vec<Modality>,
    pub views: Vec<View>,
    pub feature_dims: BTreeMap<Channel, usize>,
}

impl DatasetConfig {
    pub fn channels(&self) -> Vec<Channel> {
        Channel::set(&self.modalities, &self.views)
    }
}

/// In-memory dataset; all points share the same channel configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Dataset {
    points: Vec<DataPoint>,
    config: DatasetConfig,
}

impl Dataset {
    pub fn new(points: Vec<DataPoint>, config: DatasetConfig) -> Result<Self, DomainError> {
        if points.is_empty() {
            return Err(DomainError::EmptyDataset);
        }
        let channels = config.channels();
        for (index, p) in points.iter().enumerate() {
            if p.features.len() != channels.len()
                || !channels.iter().all(|c| p.features.contains_key(c))
            {
                return Err(DomainError::ChannelMismatch { index });
            }
            for (&c, fv) in &p.features {
                let expected = *config.feature_dims.get(&c).unwrap_or(&fv.len());
                if fv.len() != expected {
                    return Err(DomainError::FeatureLength {
                        channel: c,
                        got: fv.len(),
                        expected,
                    });
                }
            }
        }
        Ok(Dataset { points, config })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[DataPoint] {
        &self.points
    }

    pub fn config(&self) -> &DatasetConfig {
        &self.config
    }

    pub fn labels(&self) -> impl Iterator<Item = PoseLabel> + '_ {
        self.points.iter().map(|p| p.label)
    }

    /// Restrict every point to the given modality/view selection.
    pub fn restrict(&self, modalities: &[Modality], views: &[View]) -> Result<Dataset, DomainError> {
        let channels = Channel::set(modalities, views);
        let mut feature_dims = BTreeMap::new();
        for &c in &channels {
            if let Some(d) = self.config.feature_dims.get(&c) {
                feature_dims.insert(c, *d);
            }
        }
        let config = DatasetConfig {
            modalities: modalities.to_vec(),
            views: views.to_vec(),
            feature_dims,
        };
        let points = self
            .points
            .iter()
            .map(|p| DataPoint {
                features: p
                    .features
                    .iter()
                    .filter(|(c, _)| channels.contains(c))
                    .map(|(c, f)| (*c, f.clone()))
                    .collect(),
                label: p.label,
                scene: p.scene,
                actor_id: p.actor_id,
                session_id: p.session_id,
            })
            .collect();
        Dataset::new(points, config)
    }

    /// Subset by point indices, preserving order.
    pub fn subset(&self, indices: &[usize]) -> Result<Dataset, DomainError> {
        let points = indices.iter().map(|&i| self.points[i].clone()).collect();
        Dataset::new(points, self.config.clone())
    }
}

/// Group a dataset by scene condition. Scenes with no points are absent.
pub fn partition_by_scene(ds: &Dataset) -> BTreeMap<SceneCondition, Dataset> {
    let mut groups: BTreeMap<SceneCondition, Vec<DataPoint>> = BTreeMap::new();
    for p in ds.points() {
        groups.entry(p.scene).or_default().push(p.clone());
    }
    groups
        .into_iter()
        .map(|(scene, points)| {
            let sub = Dataset::new(points, ds.config().clone())
                .expect("per-scene groups are nonempty by construction");
            (scene, sub)
        })
        .collect()
}

/// One train/test split of a cross-validation run.
#[derive(Debug, Clone)]
pub struct Fold {
    pub train: Dataset,
    pub test: Dataset,
}

/// Label-stratified k-fold split. Points of each label are shuffled with a
/// seed-derived stream and dealt round-robin, so per-label counts across
/// folds differ by at most one and the split is reproducible.
pub fn stratified_folds(ds: &Dataset, n_folds: usize, seed: u64) -> Result<Vec<Fold>, DomainError> {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    if n_folds < 2 {
        return Err(DomainError::TooFewFolds(n_folds));
    }
    let mut by_label: BTreeMap<PoseLabel, Vec<usize>> = BTreeMap::new();
    for (i, p) in ds.points().iter().enumerate() {
        by_label.entry(p.label).or_default().push(i);
    }
    for (&label, idxs) in &by_label {
        if idxs.len() < n_folds {
            return Err(DomainError::InsufficientSamples {
                label,
                count: idxs.len(),
                folds: n_folds,
            });
        }
    }

    let mut fold_test: Vec<Vec<usize>> = vec![Vec::new(); n_folds];
    for (&label, idxs) in &by_label {
        let mut idxs = idxs.clone();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(
            seed.wrapping_mul(0x9e37_79b9_7f4a_7c15)
                .wrapping_add(label.index() as u64),
        );
        idxs.shuffle(&mut rng);
        for (j, idx) in idxs.into_iter().enumerate() {
            fold_test[j % n_folds].push(idx);
        }
    }

    let mut folds = Vec::with_capacity(n_folds);
    for test_idx in &mut fold_test {
        test_idx.sort_unstable();
        let train_idx: Vec<usize> = (0..ds.len()).filter(|i| !test_idx.contains(i)).collect();
        folds.push(Fold {
            train: ds.subset(&train_idx)?,
            test: ds.subset(test_idx)?,
        });
    }
    Ok(folds)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn stub_point(label: PoseLabel, scene: SceneCondition) -> DataPoint {
        let channel = Channel::pressure();
        let mut features = BTreeMap::new();
        features.insert(
            channel,
            FeatureVector::new(vec![label.index() as f64, scene.index() as f64], channel)
                .unwrap(),
        );
        DataPoint {
            features,
            label,
            scene,
            actor_id: 0,
            session_id: 0,
        }
    }

    pub(crate) fn stub_config() -> DatasetConfig {
        let channel = Channel::pressure();
        let mut feature_dims = BTreeMap::new();
        feature_dims.insert(channel, 2);
        DatasetConfig {
            modalities: vec![Modality::Pressure],
            views: vec![],
            feature_dims,
        }
    }

    fn full_grid_dataset() -> Dataset {
        let mut points = Vec::new();
        for scene in SceneCondition::all() {
            for label in PoseLabel::ALL {
                points.push(stub_point(label, scene));
            }
        }
        Dataset::new(points, stub_config()).unwrap()
    }

    #[test]
    fn label_index_name_round_trip() {
        for (i, label) in PoseLabel::ALL.into_iter().enumerate() {
            assert_eq!(label.index(), i);
            assert_eq!(PoseLabel::from_index(i), Some(label));
            assert_eq!(PoseLabel::from_name(label.name()).unwrap(), label);
        }
        assert_eq!(PoseLabel::from_index(0), Some(PoseLabel::Background));
        assert_eq!(PoseLabel::from_index(11), None);
    }

    #[test]
    fn twelve_scene_conditions_ordered() {
        let scenes: Vec<_> = SceneCondition::all().collect();
        assert_eq!(scenes.len(), SCENE_COUNT);
        for (i, s) in scenes.iter().enumerate() {
            assert_eq!(s.index(), i);
            assert_eq!(SceneCondition::from_index(i), Some(*s));
            assert_eq!(SceneCondition::from_id(&s.id()).unwrap(), *s);
        }
        // ordering is strict and total
        for w in scenes.windows(2) {
            assert!(w[0] < w[1]);
        }
    }

    #[test]
    fn channel_set_orders_modality_major() {
        let channels = Channel::set(&Modality::ALL, &View::ALL);
        assert_eq!(channels.len(), 7);
        assert_eq!(channels[0], Channel::viewed(Modality::Rgb, View::Top));
        assert_eq!(channels[2], Channel::viewed(Modality::Rgb, View::Head));
        assert_eq!(channels[6], Channel::pressure());
    }

    #[test]
    fn partition_covers_all_scenes() {
        let ds = full_grid_dataset();
        let parts = partition_by_scene(&ds);
        assert_eq!(parts.len(), 12);
        for part in parts.values() {
            assert_eq!(part.len(), 11);
            let scene = part.points()[0].scene;
            assert!(part.points().iter().all(|p| p.scene == scene));
        }
        let total: usize = parts.values().map(|d| d.len()).sum();
        assert_eq!(total, ds.len());
    }

    #[test]
    fn partition_single_scene_degenerate() {
        let scene = SceneCondition::new(Illumination::Bright, Occlusion::Clear);
        let points = vec![
            stub_point(PoseLabel::Background, scene),
            stub_point(PoseLabel::LogR, scene),
        ];
        let ds = Dataset::new(points, stub_config()).unwrap();
        let parts = partition_by_scene(&ds);
        assert_eq!(parts.len(), 1);
        assert!(parts.contains_key(&scene));
    }

    #[test]
    fn partition_concat_is_permutation() {
        let ds = full_grid_dataset();
        let parts = partition_by_scene(&ds);
        let mut concat: Vec<(PoseLabel, SceneCondition)> = parts
            .values()
            .flat_map(|d| d.points().iter().map(|p| (p.label, p.scene)))
            .collect();
        let mut orig: Vec<(PoseLabel, SceneCondition)> =
            ds.points().iter().map(|p| (p.label, p.scene)).collect();
        concat.sort();
        orig.sort();
        assert_eq!(concat, orig);
    }

    #[test]
    fn folds_exact_divisibility() {
        // 55 points, 5 per label -> every test fold has exactly one of each label
        let scene = SceneCondition::new(Illumination::Bright, Occlusion::Clear);
        let mut points = Vec::new();
        for _ in 0..5 {
            for label in PoseLabel::ALL {
                points.push(stub_point(label, scene));
            }
        }
        let ds = Dataset::new(points, stub_config()).unwrap();
        let folds = stratified_folds(&ds, 5, 3).unwrap();
        assert_eq!(folds.len(), 5);
        for fold in &folds {
            assert_eq!(fold.test.len(), 11);
            assert_eq!(fold.train.len(), 44);
            for label in PoseLabel::ALL {
                assert_eq!(fold.test.labels().filter(|&l| l == label).count(), 1);
            }
        }
    }

    #[test]
    fn folds_deterministic_per_seed() {
        let ds = full_grid_dataset();
        let a = stratified_folds(&ds, 4, 7).unwrap();
        let b = stratified_folds(&ds, 4, 7).unwrap();
        for (fa, fb) in a.iter().zip(&b) {
            let ka: Vec<_> = fa.test.points().iter().map(|p| (p.label, p.scene)).collect();
            let kb: Vec<_> = fb.test.points().iter().map(|p| (p.label, p.scene)).collect();
            assert_eq!(ka, kb);
        }
    }

    #[test]
    fn folds_sizes_differ_by_at_most_one() {
        // 56 points: 5 labels x 11 + 1 extra of one label
        let scene = SceneCondition::new(Illumination::Medium, Occlusion::Blanket);
        let mut points = Vec::new();
        for _ in 0..5 {
            for label in PoseLabel::ALL {
                points.push(stub_point(label, scene));
            }
        }
        points.push(stub_point(PoseLabel::FetalL, scene));
        let ds = Dataset::new(points, stub_config()).unwrap();
        let folds = stratified_folds(&ds, 5, 11).unwrap();
        let sizes: Vec<usize> = folds.iter().map(|f| f.test.len()).collect();
        let max = *sizes.iter().max().unwrap();
        let min = *sizes.iter().min().unwrap();
        assert!(max - min <= 1, "fold sizes {sizes:?}");
        assert_eq!(sizes.iter().sum::<usize>(), 56);
        // disjoint cover: counts per label within +-1 across folds
        for label in PoseLabel::ALL {
            let counts: Vec<usize> = folds
                .iter()
                .map(|f| f.test.labels().filter(|&l| l == label).count())
                .collect();
            let mx = counts.iter().max().unwrap();
            let mn = counts.iter().min().unwrap();
            assert!(mx - mn <= 1);
        }
    }

    #[test]
    fn folds_insufficient_samples_error() {
        let scene = SceneCondition::new(Illumination::Dark, Occlusion::Pillow);
        let mut points: Vec<DataPoint> = PoseLabel::ALL
            .into_iter()
            .map(|l| stub_point(l, scene))
            .collect();
        points.push(stub_point(PoseLabel::LogL, scene));
        let ds = Dataset::new(points, stub_config()).unwrap();
        match stratified_folds(&ds, 3, 0) {
            Err(DomainError::InsufficientSamples { .. }) => {}
            other => panic!("expected InsufficientSamples, got {other:?}"),
        }
    }

    #[test]
    fn folds_label_distribution_is_order_invariant() {
        let ds = full_grid_dataset();
        let mut rev_points: Vec<DataPoint> = ds.points().to_vec();
        rev_points.reverse();
        let rev = Dataset::new(rev_points, ds.config().clone()).unwrap();
        let a = stratified_folds(&ds, 4, 5).unwrap();
        let b = stratified_folds(&rev, 4, 5).unwrap();
        for (fa, fb) in a.iter().zip(&b) {
            for label in PoseLabel::ALL {
                assert_eq!(
                    fa.test.labels().filter(|&l| l == label).count(),
                    fb.test.labels().filter(|&l| l == label).count()
                );
            }
        }
    }
}
