//! The trusted multimodal classifier: scene-conditioned trust weights
//! combine unimodal probability vectors (views averaged within a modality),
//! with proportional trust redistribution when modalities drop out, and a
//! versioned binary model container.

use crate::classifiers::{
    fit_channel_classifiers, AnyClassifier, ClassHead, ClassifierError, ClassifierKind, LdaModel,
    LinearSvmModel, PlattParams, ProbabilisticClassifier, ProbabilityVector, TrainParams,
};
use crate::domain::{
    Channel, DataPoint, Dataset, Modality, PoseLabel, SceneCondition, View, LABEL_COUNT,
};
use crate::features::{GmomConfig, HogConfig};
use crate::trust::{estimate_trust_table_oof, TrustError, TrustTable, TrustWeights};
use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FusionError {
    #[error("scene {0} has no trust entry")]
    UnknownScene(SceneCondition),
    #[error("no modalities available for prediction")]
    NoModalitiesAvailable,
    #[error("cannot remove every modality")]
    AllModalitiesMissing,
    #[error("datapoint lacks features for channel {0}")]
    MissingFeature(Channel),
    #[error("corrupt model file: {0}")]
    CorruptModel(String),
    #[error("model format version {got}, reader supports {expected}")]
    VersionMismatch { got: u32, expected: u32 },
    #[error("model does not match this build: {0}")]
    ModelMismatch(String),
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
    #[error(transparent)]
    Trust(#[from] TrustError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Active channels and feature geometry a model was trained with.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub kind: ClassifierKind,
    pub modalities: Vec<Modality>,
    pub views: Vec<View>,
    pub hog: HogConfig,
    pub gmom: GmomConfig,
    pub feature_dims: BTreeMap<Channel, usize>,
}

/// Fitted unimodal classifiers plus the per-scene trust table.
#[derive(Debug, Clone)]
pub struct TrustedModel {
    pub config: ModelConfig,
    pub classifiers: BTreeMap<Channel, AnyClassifier>,
    pub trust_table: TrustTable,
}

/// Fit unimodal classifiers on the whole dataset and estimate the per-scene
/// trust table from internal out-of-fold scores of the same data.
pub fn train_model(
    ds: &Dataset,
    params: &TrainParams,
    hog: &HogConfig,
    gmom: &GmomConfig,
) -> Result<TrustedModel, FusionError> {
    let classifiers = fit_channel_classifiers(ds, params)?;
    let trust_table =
        estimate_trust_table_oof(ds, &ds.config().views, params, 3, params.seed ^ 0x7275)?;
    Ok(TrustedModel {
        config: ModelConfig {
            kind: params.kind,
            modalities: ds.config().modalities.clone(),
            views: ds.config().views.clone(),
            hog: *hog,
            gmom: *gmom,
            feature_dims: ds.config().feature_dims.clone(),
        },
        classifiers,
        trust_table,
    })
}

/// Zero out missing modalities one at a time (in fixed modality order) and
/// hand each removed weight to the survivors in proportion to their distance
/// from it, then renormalize onto the simplex.
pub fn adjust_missing(
    weights: &TrustWeights,
    modalities: &[Modality],
    missing: &BTreeSet<Modality>,
) -> Result<TrustWeights, FusionError> {
    let active_missing: Vec<usize> = Modality::ALL
        .iter()
        .filter(|m| missing.contains(m))
        .filter_map(|m| modalities.iter().position(|x| x == m))
        .collect();
    if active_missing.len() >= modalities.len() {
        return Err(FusionError::AllModalitiesMissing);
    }
    let mut w = weights.values().to_vec();
    let mut removed = vec![false; w.len()];
    for n in active_missing {
        let total: f64 = w.iter().sum();
        let w_n = w[n];
        if total > 0.0 {
            for (m, wv) in w.iter_mut().enumerate() {
                if m != n && !removed[m] {
                    *wv *= 1.0 + (w_n - *wv).abs() / total;
                }
            }
        }
        w[n] = 0.0;
        removed[n] = true;
    }
    Ok(TrustWeights::project(w))
}

/// View-averaged probability vector for one modality of one datapoint.
fn modality_proba(
    model: &TrustedModel,
    point: &DataPoint,
    modality: Modality,
) -> Result<Vec<f64>, FusionError> {
    let channels: Vec<Channel> = if modality.is_viewless() {
        vec![Channel::new(modality, None)]
    } else {
        model
            .config
            .views
            .iter()
            .map(|&v| Channel::viewed(modality, v))
            .collect()
    };
    let mut acc = vec![0.0f64; LABEL_COUNT];
    for channel in &channels {
        let clf = model
            .classifiers
            .get(channel)
            .ok_or(FusionError::MissingFeature(*channel))?;
        let fv = point
            .feature(*channel)
            .ok_or(FusionError::MissingFeature(*channel))?;
        let p = clf.predict_proba(&fv.values)?;
        for (a, v) in acc.iter_mut().zip(p.values()) {
            *a += v;
        }
    }
    let n = channels.len() as f64;
    for a in &mut acc {
        *a /= n;
    }
    Ok(acc)
}

/// Classify one datapoint with the given set of working modalities. Returns
/// the fused label and the fused probability vector; the trust weights pass
/// through the missing-modality adjustment when sensors are absent.
pub fn predict(
    model: &TrustedModel,
    point: &DataPoint,
    available: &BTreeSet<Modality>,
) -> Result<(PoseLabel, ProbabilityVector), FusionError> {
    let (label, proba, _) = predict_with_trust(model, point, available)?;
    Ok((label, proba))
}

/// Like [`predict`] but also returns the trust weights actually applied.
pub fn predict_with_trust(
    model: &TrustedModel,
    point: &DataPoint,
    available: &BTreeSet<Modality>,
) -> Result<(PoseLabel, ProbabilityVector, TrustWeights), FusionError> {
    let modalities = &model.config.modalities;
    let usable: Vec<Modality> = modalities
        .iter()
        .copied()
        .filter(|m| available.contains(m))
        .collect();
    if usable.is_empty() {
        return Err(FusionError::NoModalitiesAvailable);
    }
    let base = model
        .trust_table
        .get(&point.scene)
        .ok_or(FusionError::UnknownScene(point.scene))?;
    let weights = if usable.len() == modalities.len() {
        base.clone()
    } else {
        let missing: BTreeSet<Modality> = modalities
            .iter()
            .copied()
            .filter(|m| !available.contains(m))
            .collect();
        adjust_missing(base, modalities, &missing)?
    };

    let mut fused = vec![0.0f64; LABEL_COUNT];
    for (idx, &m) in modalities.iter().enumerate() {
        let w = weights.get(idx);
        if w == 0.0 || !usable.contains(&m) {
            continue;
        }
        let p = modality_proba(model, point, m)?;
        for (f, v) in fused.iter_mut().zip(&p) {
            *f += w * v;
        }
    }
    let proba = ProbabilityVector::from_scores(fused);
    let label = PoseLabel::from_index(proba.argmax()).expect("argmax within label range");
    Ok((label, proba, weights))
}

// --- model container ------------------------------------------------------

const MAGIC: &[u8; 4] = b"CCLS";
const FORMAT_VERSION: u32 = 1;

struct ByteReader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> ByteReader<'a> {
    fn new(buf: &'a [u8]) -> Self {
        ByteReader { buf, pos: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], FusionError> {
        if self.pos + n > self.buf.len() {
            return Err(FusionError::CorruptModel("unexpected end of file".into()));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, FusionError> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32, FusionError> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn u64(&mut self) -> Result<u64, FusionError> {
        let b = self.take(8)?;
        Ok(u64::from_le_bytes(b.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, FusionError> {
        let b = self.take(8)?;
        Ok(f64::from_le_bytes(b.try_into().unwrap()))
    }

    fn f64_vec(&mut self, n: usize) -> Result<Vec<f64>, FusionError> {
        (0..n).map(|_| self.f64()).collect()
    }

    fn string(&mut self) -> Result<String, FusionError> {
        let n = self.u32()? as usize;
        let b = self.take(n)?;
        String::from_utf8(b.to_vec())
            .map_err(|_| FusionError::CorruptModel("non-UTF-8 string".into()))
    }

    fn done(&self) -> bool {
        self.pos == self.buf.len()
    }
}

fn put_u32(buf: &mut Vec<u8>, v: u32) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn put_u64(buf: &mut Vec<u8>, v: u64) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn put_f64(buf: &mut Vec<u8>, v: f64) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn put_string(buf: &mut Vec<u8>, s: &str) {
    put_u32(buf, s.len() as u32);
    buf.extend_from_slice(s.as_bytes());
}

fn put_channel(buf: &mut Vec<u8>, c: Channel) {
    buf.push(modality_code(c.modality));
    buf.push(c.view.map_or(0xFF, view_code));
}

fn modality_code(m: Modality) -> u8 {
    Modality::ALL.iter().position(|&x| x == m).unwrap() as u8
}

fn view_code(v: View) -> u8 {
    View::ALL.iter().position(|&x| x == v).unwrap() as u8
}

fn read_channel(r: &mut ByteReader) -> Result<Channel, FusionError> {
    let m = r.u8()? as usize;
    let v = r.u8()?;
    let modality = *Modality::ALL
        .get(m)
        .ok_or_else(|| FusionError::CorruptModel(format!("bad modality code {m}")))?;
    let view = if v == 0xFF {
        None
    } else {
        Some(*View::ALL.get(v as usize).ok_or_else(|| {
            FusionError::CorruptModel(format!("bad view code {v}"))
        })?)
    };
    Ok(Channel::new(modality, view))
}

fn encode_classifier(clf: &AnyClassifier) -> Vec<u8> {
    let mut buf = Vec::new();
    match clf {
        AnyClassifier::Lda(m) => {
            buf.push(0u8);
            put_u32(&mut buf, m.dim() as u32);
            put_f64(&mut buf, m.ridge());
            put_u32(&mut buf, m.classes().len() as u32);
            for (label, prior, mean) in m.classes() {
                buf.push(*label as u8);
                put_f64(&mut buf, *prior);
                for v in mean {
                    put_f64(&mut buf, *v);
                }
            }
            for v in m.variances() {
                put_f64(&mut buf, *v);
            }
        }
        AnyClassifier::Svm(m) => {
            buf.push(1u8);
            put_u32(&mut buf, m.dim() as u32);
            put_f64(&mut buf, m.c_param());
            put_u32(&mut buf, m.epochs() as u32);
            put_u64(&mut buf, m.seed());
            put_u32(&mut buf, m.heads().len() as u32);
            for head in m.heads() {
                buf.push(head.label_index as u8);
                for v in &head.weights {
                    put_f64(&mut buf, *v);
                }
                put_f64(&mut buf, head.bias);
                put_f64(&mut buf, head.platt.a);
                put_f64(&mut buf, head.platt.b);
            }
        }
    }
    buf
}

fn decode_classifier(payload: &[u8]) -> Result<AnyClassifier, FusionError> {
    let mut r = ByteReader::new(payload);
    let tag = r.u8()?;
    let clf = match tag {
        0 => {
            let dim = r.u32()? as usize;
            let ridge = r.f64()?;
            let n_classes = r.u32()? as usize;
            let mut classes = Vec::with_capacity(n_classes);
            for _ in 0..n_classes {
                let label = r.u8()? as usize;
                let prior = r.f64()?;
                let mean = r.f64_vec(dim)?;
                classes.push((label, prior, mean));
            }
            let variances = r.f64_vec(dim)?;
            AnyClassifier::Lda(LdaModel::from_parts(dim, ridge, classes, variances))
        }
        1 => {
            let dim = r.u32()? as usize;
            let c_param = r.f64()?;
            let epochs = r.u32()? as usize;
            let seed = r.u64()?;
            let n_heads = r.u32()? as usize;
            let mut heads = Vec::with_capacity(n_heads);
            for _ in 0..n_heads {
                let label_index = r.u8()? as usize;
                let weights = r.f64_vec(dim)?;
                let bias = r.f64()?;
                let a = r.f64()?;
                let b = r.f64()?;
                heads.push(ClassHead {
                    label_index,
                    weights,
                    bias,
                    platt: PlattParams { a, b },
                });
            }
            AnyClassifier::Svm(LinearSvmModel::from_parts(dim, c_param, epochs, seed, heads))
        }
        other => {
            return Err(FusionError::CorruptModel(format!(
                "unknown classifier tag {other}"
            )))
        }
    };
    if !r.done() {
        return Err(FusionError::CorruptModel(
            "trailing bytes in classifier section".into(),
        ));
    }
    Ok(clf)
}

/// Serialize a model to its binary container.
pub fn encode_model(model: &TrustedModel) -> Vec<u8> {
    let mut buf = Vec::new();
    buf.extend_from_slice(MAGIC);
    put_u32(&mut buf, FORMAT_VERSION);
    buf.push(match model.config.kind {
        ClassifierKind::Lda => 0,
        ClassifierKind::Svc => 1,
    });

    put_u32(&mut buf, LABEL_COUNT as u32);
    for label in PoseLabel::ALL {
        put_string(&mut buf, label.name());
    }
    put_u32(&mut buf, model.config.modalities.len() as u32);
    for &m in &model.config.modalities {
        buf.push(modality_code(m));
    }
    put_u32(&mut buf, model.config.views.len() as u32);
    for &v in &model.config.views {
        buf.push(view_code(v));
    }

    let hog = &model.config.hog;
    for v in [
        hog.n_orientations,
        hog.cell_px,
        hog.block_cells,
        hog.block_stride_cells,
        hog.work_size.0,
        hog.work_size.1,
    ] {
        put_u32(&mut buf, v as u32);
    }
    let gm = &model.config.gmom;
    for v in [gm.tile_rows, gm.tile_cols, gm.max_order] {
        put_u32(&mut buf, v as u32);
    }

    put_u32(&mut buf, model.config.feature_dims.len() as u32);
    for (&c, &d) in &model.config.feature_dims {
        put_channel(&mut buf, c);
        put_u32(&mut buf, d as u32);
    }

    put_u32(&mut buf, model.classifiers.len() as u32);
    for (&c, clf) in &model.classifiers {
        put_channel(&mut buf, c);
        let payload = encode_classifier(clf);
        put_u32(&mut buf, payload.len() as u32);
        buf.extend_from_slice(&payload);
    }

    put_u32(&mut buf, model.trust_table.len() as u32);
    for (scene, w) in &model.trust_table {
        buf.push(scene.index() as u8);
        for &v in w.values() {
            put_f64(&mut buf, v);
        }
    }
    buf
}

/// Parse a model from its binary container.
pub fn decode_model(buf: &[u8]) -> Result<TrustedModel, FusionError> {
    let mut r = ByteReader::new(buf);
    let magic = r.take(4)?;
    if magic != MAGIC {
        return Err(FusionError::CorruptModel("bad magic".into()));
    }
    let version = r.u32()?;
    if version != FORMAT_VERSION {
        return Err(FusionError::VersionMismatch {
            got: version,
            expected: FORMAT_VERSION,
        });
    }
    let kind = match r.u8()? {
        0 => ClassifierKind::Lda,
        1 => ClassifierKind::Svc,
        other => {
            return Err(FusionError::CorruptModel(format!(
                "unknown classifier kind {other}"
            )))
        }
    };

    let n_labels = r.u32()? as usize;
    if n_labels != LABEL_COUNT {
        return Err(FusionError::ModelMismatch(format!(
            "model has {n_labels} labels, this build has {LABEL_COUNT}"
        )));
    }
    for expected in PoseLabel::ALL {
        let name = r.string()?;
        if name != expected.name() {
            return Err(FusionError::ModelMismatch(format!(
                "label {name:?} does not match expected {:?}",
                expected.name()
            )));
        }
    }

    let n_mods = r.u32()? as usize;
    let mut modalities = Vec::with_capacity(n_mods);
    for _ in 0..n_mods {
        let code = r.u8()? as usize;
        modalities.push(*Modality::ALL.get(code).ok_or_else(|| {
            FusionError::CorruptModel(format!("bad modality code {code}"))
        })?);
    }
    let n_views = r.u32()? as usize;
    let mut views = Vec::with_capacity(n_views);
    for _ in 0..n_views {
        let code = r.u8()? as usize;
        views.push(*View::ALL.get(code).ok_or_else(|| {
            FusionError::CorruptModel(format!("bad view code {code}"))
        })?);
    }

    let hog = HogConfig {
        n_orientations: r.u32()? as usize,
        cell_px: r.u32()? as usize,
        block_cells: r.u32()? as usize,
        block_stride_cells: r.u32()? as usize,
        work_size: {
            let w = r.u32()? as usize;
            let h = r.u32()? as usize;
            (w, h)
        },
    };
    let gmom = GmomConfig {
        tile_rows: r.u32()? as usize,
        tile_cols: r.u32()? as usize,
        max_order: r.u32()? as usize,
    };

    let n_dims = r.u32()? as usize;
    let mut feature_dims = BTreeMap::new();
    for _ in 0..n_dims {
        let c = read_channel(&mut r)?;
        feature_dims.insert(c, r.u32()? as usize);
    }

    let n_clfs = r.u32()? as usize;
    let mut classifiers = BTreeMap::new();
    for _ in 0..n_clfs {
        let c = read_channel(&mut r)?;
        let len = r.u32()? as usize;
        let payload = r.take(len)?;
        let clf = decode_classifier(payload)?;
        if let Some(&expected) = feature_dims.get(&c) {
            if clf.dim() != expected {
                return Err(FusionError::ModelMismatch(format!(
                    "classifier for {c} expects dim {}, config says {expected}",
                    clf.dim()
                )));
            }
        }
        classifiers.insert(c, clf);
    }

    let n_scenes = r.u32()? as usize;
    let mut trust_table = BTreeMap::new();
    for _ in 0..n_scenes {
        let idx = r.u8()? as usize;
        let scene = SceneCondition::from_index(idx)
            .ok_or_else(|| FusionError::CorruptModel(format!("bad scene index {idx}")))?;
        let weights = r.f64_vec(modalities.len())?;
        trust_table.insert(scene, TrustWeights::project(weights));
    }
    if !r.done() {
        return Err(FusionError::CorruptModel("trailing bytes".into()));
    }

    Ok(TrustedModel {
        config: ModelConfig {
            kind,
            modalities,
            views,
            hog,
            gmom,
            feature_dims,
        },
        classifiers,
        trust_table,
    })
}

pub fn save_model(model: &TrustedModel, path: &Path) -> Result<(), FusionError> {
    let mut file = std::fs::File::create(path)?;
    file.write_all(&encode_model(model))?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<TrustedModel, FusionError> {
    let mut buf = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut buf)?;
    decode_model(&buf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{DatasetConfig, FeatureVector, Illumination, Occlusion};

    fn all_modalities() -> BTreeSet<Modality> {
        Modality::ALL.into_iter().collect()
    }

    fn weights(v: &[f64]) -> TrustWeights {
        TrustWeights::project(v.to_vec())
    }

    #[test]
    fn adjust_missing_worked_example() {
        let w = weights(&[0.5, 0.3, 0.2]);
        let missing: BTreeSet<Modality> = [Modality::Pressure].into_iter().collect();
        let out = adjust_missing(&w, &Modality::ALL, &missing).unwrap();
        assert!((out.get(0) - 0.6633).abs() < 1e-4, "{out:?}");
        assert!((out.get(1) - 0.3367).abs() < 1e-4, "{out:?}");
        assert_eq!(out.get(2), 0.0);
        assert!(out.is_on_simplex());
    }

    #[test]
    fn adjust_missing_uniform_symmetric_case() {
        let w = weights(&[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]);
        let missing: BTreeSet<Modality> = [Modality::Depth].into_iter().collect();
        let out = adjust_missing(&w, &Modality::ALL, &missing).unwrap();
        assert!((out.get(0) - 0.5).abs() < 1e-12, "{out:?}");
        assert_eq!(out.get(1), 0.0);
        assert!((out.get(2) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn adjust_missing_single_survivor() {
        for w0 in [[0.2, 0.5, 0.3], [0.9, 0.05, 0.05], [1.0 / 3.0; 3]] {
            let w = weights(&w0);
            let missing: BTreeSet<Modality> =
                [Modality::Depth, Modality::Pressure].into_iter().collect();
            let out = adjust_missing(&w, &Modality::ALL, &missing).unwrap();
            assert!((out.get(0) - 1.0).abs() < 1e-12, "{out:?}");
            assert_eq!(out.get(1), 0.0);
            assert_eq!(out.get(2), 0.0);
        }
    }

    #[test]
    fn adjust_missing_never_negative_never_resurrects() {
        let w = weights(&[0.7, 0.2, 0.1]);
        for missing_set in [
            vec![Modality::Rgb],
            vec![Modality::Pressure],
            vec![Modality::Rgb, Modality::Depth],
        ] {
            let missing: BTreeSet<Modality> = missing_set.iter().copied().collect();
            let out = adjust_missing(&w, &Modality::ALL, &missing).unwrap();
            assert!(out.is_on_simplex());
            for (i, &m) in Modality::ALL.iter().enumerate() {
                if missing.contains(&m) {
                    assert_eq!(out.get(i), 0.0);
                } else {
                    assert!(out.get(i) >= 0.0);
                }
            }
        }
    }

    #[test]
    fn adjust_missing_everything_rejected() {
        let w = weights(&[0.5, 0.3, 0.2]);
        let missing: BTreeSet<Modality> = all_modalities();
        assert!(matches!(
            adjust_missing(&w, &Modality::ALL, &missing),
            Err(FusionError::AllModalitiesMissing)
        ));
    }

    /// Model over 2-dim features per channel whose classifiers are trained
    /// so every prediction is deterministic.
    fn toy_model(kind: ClassifierKind) -> (TrustedModel, Dataset) {
        let channels = Channel::set(&Modality::ALL, &View::ALL);
        let scene = SceneCondition::new(Illumination::Bright, Occlusion::Clear);
        let labels = [PoseLabel::Background, PoseLabel::SoldierU, PoseLabel::LogR];
        let mut points = Vec::new();
        for rep in 0..4 {
            for (i, &label) in labels.iter().enumerate() {
                let mut features = BTreeMap::new();
                for &c in &channels {
                    let base = i as f64 * 4.0;
                    let jitter = rep as f64 * 0.05;
                    features.insert(
                        c,
                        FeatureVector::new(vec![base + jitter, base - jitter], c).unwrap(),
                    );
                }
                points.push(DataPoint {
                    features,
                    label,
                    scene,
                    actor_id: rep,
                    session_id: 0,
                });
            }
        }
        let mut feature_dims = BTreeMap::new();
        for &c in &channels {
            feature_dims.insert(c, 2);
        }
        let ds = Dataset::new(
            points,
            DatasetConfig {
                modalities: Modality::ALL.to_vec(),
                views: View::ALL.to_vec(),
                feature_dims,
            },
        )
        .unwrap();
        let params = TrainParams {
            kind,
            ..TrainParams::default()
        };
        let model = train_model(&ds, &params, &HogConfig::default(), &GmomConfig::default())
            .unwrap();
        (model, ds)
    }

    #[test]
    fn predict_resubstitution_is_correct() {
        let (model, ds) = toy_model(ClassifierKind::Lda);
        for p in ds.points() {
            let (label, proba) = predict(&model, p, &all_modalities()).unwrap();
            assert_eq!(label, p.label);
            assert!(proba.is_on_simplex());
        }
    }

    #[test]
    fn predict_unknown_scene_rejected() {
        let (model, ds) = toy_model(ClassifierKind::Lda);
        let mut point = ds.points()[0].clone();
        point.scene = SceneCondition::new(Illumination::Dark, Occlusion::BlanketPillow);
        assert!(matches!(
            predict(&model, &point, &all_modalities()),
            Err(FusionError::UnknownScene(_))
        ));
    }

    #[test]
    fn predict_no_modalities_rejected() {
        let (model, ds) = toy_model(ClassifierKind::Lda);
        let empty = BTreeSet::new();
        assert!(matches!(
            predict(&model, &ds.points()[0], &empty),
            Err(FusionError::NoModalitiesAvailable)
        ));
    }

    #[test]
    fn predict_is_deterministic() {
        let (model, ds) = toy_model(ClassifierKind::Svc);
        let avail: BTreeSet<Modality> = [Modality::Rgb, Modality::Depth].into_iter().collect();
        let a = predict(&model, &ds.points()[5], &avail).unwrap();
        let b = predict(&model, &ds.points()[5], &avail).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1.values(), b.1.values());
    }

    #[test]
    fn model_round_trip_preserves_predictions() {
        let dir = tempfile::tempdir().unwrap();
        for kind in [ClassifierKind::Lda, ClassifierKind::Svc] {
            let (model, ds) = toy_model(kind);
            let path = dir.path().join(format!("model_{}.bin", kind.tag()));
            save_model(&model, &path).unwrap();
            let loaded = load_model(&path).unwrap();
            assert_eq!(model.config, loaded.config);
            assert_eq!(model.trust_table, loaded.trust_table);
            for p in ds.points() {
                let a = predict(&model, p, &all_modalities()).unwrap();
                let b = predict(&loaded, p, &all_modalities()).unwrap();
                assert_eq!(a.0, b.0);
                assert_eq!(a.1.values(), b.1.values());
            }
        }
    }

    #[test]
    fn truncated_model_is_corrupt() {
        let (model, _) = toy_model(ClassifierKind::Lda);
        let bytes = encode_model(&model);
        for cut in [0, 3, 10, bytes.len() / 2, bytes.len() - 1] {
            match decode_model(&bytes[..cut]) {
                Err(FusionError::CorruptModel(_)) => {}
                other => panic!("cut at {cut}: expected CorruptModel, got {other:?}"),
            }
        }
    }

    #[test]
    fn wrong_version_is_rejected() {
        let (model, _) = toy_model(ClassifierKind::Lda);
        let mut bytes = encode_model(&model);
        bytes[4..8].copy_from_slice(&0u32.to_le_bytes());
        assert!(matches!(
            decode_model(&bytes),
            Err(FusionError::VersionMismatch { got: 0, .. })
        ));
    }

    #[test]
    fn fused_probability_brackets_unimodal_probabilities() {
        let (model, ds) = toy_model(ClassifierKind::Lda);
        for p in ds.points() {
            let (_, fused) = predict(&model, p, &all_modalities()).unwrap();
            for l in 0..LABEL_COUNT {
                let per_mod: Vec<f64> = Modality::ALL
                    .iter()
                    .map(|&m| modality_proba(&model, p, m).unwrap()[l])
                    .collect();
                let lo = per_mod.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = per_mod.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                assert!(
                    fused.get(l) >= lo - 1e-9 && fused.get(l) <= hi + 1e-9,
                    "label {l}: fused {} outside [{lo}, {hi}]",
                    fused.get(l)
                );
            }
        }
    }
}
