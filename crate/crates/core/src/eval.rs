//! Experiment harness: cross-validated per-scene accuracy for each system
//! configuration, unimodal baselines, confusion matrices, missing-modality
//! sweeps and report emission as CSV and SVG heatmaps.

use crate::classifiers::{fit_channel_classifiers, ClassifierError, ClassifierKind, TrainParams};
use crate::domain::{
    stratified_folds, Dataset, DomainError, Modality, PoseLabel, SceneCondition, View,
    LABEL_COUNT,
};
use crate::features::{GmomConfig, HogConfig};
use crate::fusion::{predict, FusionError, ModelConfig, TrustedModel};
use crate::trust::{estimate_trust_table_oof, TrustError, TrustWeights};

/// Inner split count for out-of-fold trust estimation.
const TRUST_INNER_FOLDS: usize = 4;
use rayon::prelude::*;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("prediction and truth lists have lengths {preds} and {truth}")]
    LengthMismatch { preds: usize, truth: usize },
    #[error("missing set must be a strict subset of the configuration's modalities")]
    BadMissingSet,
    #[error("unknown configuration name {0:?}")]
    UnknownConfiguration(String),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
    #[error(transparent)]
    Trust(#[from] TrustError),
    #[error(transparent)]
    Fusion(#[from] FusionError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A named modality/view selection to evaluate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigurationSpec {
    pub name: String,
    pub modalities: Vec<Modality>,
    pub views: Vec<View>,
}

impl ConfigurationSpec {
    /// All modalities, all views.
    pub fn mm() -> Self {
        ConfigurationSpec {
            name: "MM".into(),
            modalities: Modality::ALL.to_vec(),
            views: View::ALL.to_vec(),
        }
    }

    /// All modalities, top view only.
    pub fn mpm() -> Self {
        ConfigurationSpec {
            name: "MpM".into(),
            modalities: Modality::ALL.to_vec(),
            views: vec![View::Top],
        }
    }

    /// No pressure mat, all views.
    pub fn pmm() -> Self {
        ConfigurationSpec {
            name: "PMM".into(),
            modalities: vec![Modality::Rgb, Modality::Depth],
            views: View::ALL.to_vec(),
        }
    }

    /// No pressure mat, two views.
    pub fn pmpm() -> Self {
        ConfigurationSpec {
            name: "PMpM".into(),
            modalities: vec![Modality::Rgb, Modality::Depth],
            views: vec![View::Side, View::Head],
        }
    }

    pub fn custom(name: &str, modalities: Vec<Modality>, views: Vec<View>) -> Self {
        ConfigurationSpec {
            name: name.to_string(),
            modalities,
            views,
        }
    }

    pub fn from_name(name: &str) -> Result<Self, EvalError> {
        match name {
            "MM" => Ok(Self::mm()),
            "MpM" => Ok(Self::mpm()),
            "PMM" => Ok(Self::pmm()),
            "PMpM" => Ok(Self::pmpm()),
            other => Err(EvalError::UnknownConfiguration(other.to_string())),
        }
    }
}

/// Counts for one scene, aggregated over all test folds.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneOutcome {
    pub scene: SceneCondition,
    /// confusion[truth][predicted]
    pub confusion: Vec<Vec<u32>>,
    /// Correct decisions per single modality (views averaged).
    pub unimodal_correct: BTreeMap<Modality, u32>,
    pub total: u32,
}

impl SceneOutcome {
    fn new(scene: SceneCondition, modalities: &[Modality]) -> Self {
        SceneOutcome {
            scene,
            confusion: vec![vec![0; LABEL_COUNT]; LABEL_COUNT],
            unimodal_correct: modalities.iter().map(|&m| (m, 0)).collect(),
            total: 0,
        }
    }

    pub fn correct(&self) -> u32 {
        (0..LABEL_COUNT).map(|i| self.confusion[i][i]).sum()
    }

    pub fn accuracy(&self) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        self.correct() as f64 / self.total as f64
    }

    pub fn unimodal_accuracy(&self, m: Modality) -> Option<f64> {
        self.unimodal_correct
            .get(&m)
            .map(|&c| c as f64 / self.total.max(1) as f64)
    }

    pub fn best_unimodal_accuracy(&self) -> f64 {
        self.unimodal_correct
            .values()
            .map(|&c| c as f64 / self.total.max(1) as f64)
            .fold(0.0, f64::max)
    }
}

/// Cross-validation outcome for one configuration (and one missing set).
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigResult {
    pub spec: ConfigurationSpec,
    pub clf: ClassifierKind,
    pub missing: Vec<Modality>,
    pub scenes: BTreeMap<SceneCondition, SceneOutcome>,
    pub fold_accuracies: Vec<f64>,
}

impl ConfigResult {
    /// Column/file tag: the configuration name, suffixed by the missing set.
    pub fn tag(&self) -> String {
        if self.missing.is_empty() {
            self.spec.name.clone()
        } else {
            let tags: String = self.missing.iter().map(|m| m.tag()).collect();
            format!("{}_missing_{}", self.spec.name, tags)
        }
    }

    pub fn overall_accuracy(&self) -> f64 {
        let correct: u32 = self.scenes.values().map(|s| s.correct()).sum();
        let total: u32 = self.scenes.values().map(|s| s.total).sum();
        if total == 0 {
            return 0.0;
        }
        correct as f64 / total as f64
    }

    pub fn scene_accuracy(&self, scene: SceneCondition) -> Option<f64> {
        self.scenes.get(&scene).map(|s| s.accuracy())
    }
}

/// Full evaluation report; may hold several configurations side by side.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub seed: u64,
    pub n_folds: usize,
    pub results: Vec<ConfigResult>,
    /// Unix seconds at run start; reported in the metadata file only.
    pub timestamp: u64,
}

impl EvalReport {
    /// Merge the configuration results of another report into this one.
    pub fn merge(&mut self, other: EvalReport) {
        self.results.extend(other.results);
    }
}

/// Count matrix with entry (i, j) = number of points with truth label i
/// predicted as label j.
pub fn confusion_matrix(
    preds: &[PoseLabel],
    truth: &[PoseLabel],
) -> Result<Vec<Vec<u32>>, EvalError> {
    if preds.len() != truth.len() {
        return Err(EvalError::LengthMismatch {
            preds: preds.len(),
            truth: truth.len(),
        });
    }
    let mut m = vec![vec![0u32; LABEL_COUNT]; LABEL_COUNT];
    for (p, t) in preds.iter().zip(truth) {
        m[t.index()][p.index()] += 1;
    }
    Ok(m)
}

/// Cross-validate one configuration with every sensor working.
pub fn run_cv(
    ds: &Dataset,
    spec: &ConfigurationSpec,
    clf: ClassifierKind,
    n_folds: usize,
    seed: u64,
) -> Result<EvalReport, EvalError> {
    run_missing_modality(ds, spec, clf, &[], n_folds, seed)
}

/// Cross-validate one configuration with the given modalities treated as
/// failed at test time (trusts redistributed); an empty missing set is a
/// plain cross-validation run.
pub fn run_missing_modality(
    ds: &Dataset,
    spec: &ConfigurationSpec,
    clf: ClassifierKind,
    missing: &[Modality],
    n_folds: usize,
    seed: u64,
) -> Result<EvalReport, EvalError> {
    let missing_set: BTreeSet<Modality> = missing
        .iter()
        .copied()
        .filter(|m| spec.modalities.contains(m))
        .collect();
    if missing_set.len() >= spec.modalities.len() {
        return Err(EvalError::BadMissingSet);
    }
    let available: BTreeSet<Modality> = spec
        .modalities
        .iter()
        .copied()
        .filter(|m| !missing_set.contains(m))
        .collect();

    let restricted = ds.restrict(&spec.modalities, &spec.views)?;
    let folds = stratified_folds(&restricted, n_folds, seed)?;

    struct FoldOutcome {
        records: Vec<(SceneCondition, PoseLabel, PoseLabel, BTreeMap<Modality, PoseLabel>)>,
    }

    let fold_outcomes: Vec<FoldOutcome> = folds
        .par_iter()
        .enumerate()
        .map(|(fold_idx, fold)| -> Result<FoldOutcome, EvalError> {
            let params = TrainParams {
                kind: clf,
                seed: seed ^ (fold_idx as u64 + 1),
                ..TrainParams::default()
            };
            let classifiers = fit_channel_classifiers(&fold.train, &params)?;
            // held-out scores keep the oracle honest about generalization
            let mut trust_table = estimate_trust_table_oof(
                &fold.train,
                &spec.views,
                &params,
                TRUST_INNER_FOLDS,
                seed ^ 0x5eed ^ (fold_idx as u64),
            )?;
            // scenes never seen in training fall back to uniform trust
            for p in fold.test.points() {
                trust_table
                    .entry(p.scene)
                    .or_insert_with(|| TrustWeights::uniform(spec.modalities.len()));
            }
            let model = TrustedModel {
                config: ModelConfig {
                    kind: clf,
                    modalities: spec.modalities.clone(),
                    views: spec.views.clone(),
                    hog: HogConfig::default(),
                    gmom: GmomConfig::default(),
                    feature_dims: fold.train.config().feature_dims.clone(),
                },
                classifiers,
                trust_table,
            };

            let mut records = Vec::with_capacity(fold.test.len());
            for p in fold.test.points() {
                let (fused, _) = predict(&model, p, &available)?;
                let mut unimodal = BTreeMap::new();
                for &m in &spec.modalities {
                    let single: BTreeSet<Modality> = [m].into_iter().collect();
                    let (label, _) = predict(&model, p, &single)?;
                    unimodal.insert(m, label);
                }
                records.push((p.scene, p.label, fused, unimodal));
            }
            Ok(FoldOutcome { records })
        })
        .collect::<Result<_, _>>()?;

    let mut scenes: BTreeMap<SceneCondition, SceneOutcome> = BTreeMap::new();
    let mut fold_accuracies = Vec::with_capacity(fold_outcomes.len());
    for outcome in &fold_outcomes {
        let mut correct = 0usize;
        for (scene, truth, fused, unimodal) in &outcome.records {
            let entry = scenes
                .entry(*scene)
                .or_insert_with(|| SceneOutcome::new(*scene, &spec.modalities));
            entry.confusion[truth.index()][fused.index()] += 1;
            entry.total += 1;
            for (&m, &pred) in unimodal {
                if pred == *truth {
                    *entry.unimodal_correct.get_mut(&m).unwrap() += 1;
                }
            }
            if fused == truth {
                correct += 1;
            }
        }
        fold_accuracies.push(correct as f64 / outcome.records.len().max(1) as f64);
    }

    let timestamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    Ok(EvalReport {
        seed,
        n_folds,
        results: vec![ConfigResult {
            spec: spec.clone(),
            clf,
            missing: missing_set.into_iter().collect(),
            scenes,
            fold_accuracies,
        }],
        timestamp,
    })
}

fn percent(v: f64) -> String {
    format!("{:.1}", v * 100.0)
}

/// Heatmap fill from light to dark red as accuracy rises.
fn cell_color(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let lerp = |a: f64, b: f64| (a + (b - a) * t).round() as u8;
    format!("#{:02x}{:02x}{:02x}", lerp(255.0, 165.0), lerp(245.0, 15.0), lerp(240.0, 21.0))
}

/// Write `accuracy_by_scene.csv`, per-configuration unimodal baselines,
/// per-scene confusion CSVs, an SVG heatmap and a metadata JSON into `dir`.
/// Emission is deterministic for a given report.
pub fn emit_report(report: &EvalReport, dir: &Path) -> Result<(), EvalError> {
    std::fs::create_dir_all(dir)?;
    let scenes: Vec<SceneCondition> = SceneCondition::all()
        .filter(|s| report.results.iter().any(|r| r.scenes.contains_key(s)))
        .collect();

    // scene-by-configuration accuracy table
    let mut csv = String::from("scene");
    for r in &report.results {
        let _ = write!(csv, ",{}", r.tag());
    }
    csv.push('\n');
    for &scene in &scenes {
        let _ = write!(csv, "{}", scene.id());
        for r in &report.results {
            match r.scene_accuracy(scene) {
                Some(a) => {
                    let _ = write!(csv, ",{}", percent(a));
                }
                None => csv.push(','),
            }
        }
        csv.push('\n');
    }
    std::fs::write(dir.join("accuracy_by_scene.csv"), csv.as_bytes())?;

    // per-configuration unimodal baselines
    for r in &report.results {
        let mut csv = String::from("scene");
        for &m in &r.spec.modalities {
            let _ = write!(csv, ",{}", m.tag());
        }
        csv.push_str(",fused\n");
        for (&scene, outcome) in &r.scenes {
            let _ = write!(csv, "{}", scene.id());
            for &m in &r.spec.modalities {
                let _ = write!(csv, ",{}", percent(outcome.unimodal_accuracy(m).unwrap_or(0.0)));
            }
            let _ = write!(csv, ",{}", percent(outcome.accuracy()));
            csv.push('\n');
        }
        std::fs::write(
            dir.join(format!("unimodal_by_scene_{}.csv", r.tag().to_lowercase())),
            csv.as_bytes(),
        )?;
    }

    // confusion matrices, one CSV per configuration and scene
    for r in &report.results {
        for (&scene, outcome) in &r.scenes {
            let mut csv = String::from("truth\\pred");
            for label in PoseLabel::ALL {
                let _ = write!(csv, ",{}", label.name());
            }
            csv.push('\n');
            for (i, row) in outcome.confusion.iter().enumerate() {
                let _ = write!(csv, "{}", PoseLabel::from_index(i).unwrap().name());
                for v in row {
                    let _ = write!(csv, ",{v}");
                }
                csv.push('\n');
            }
            std::fs::write(
                dir.join(format!(
                    "confusion_{}_{}.csv",
                    r.tag().to_lowercase(),
                    scene.id()
                )),
                csv.as_bytes(),
            )?;
        }
    }

    // accuracy heatmap: rows are scenes, columns are configurations
    let cell_w = 72;
    let cell_h = 26;
    let left = 150;
    let top = 40;
    let width = left + cell_w * report.results.len() + 20;
    let height = top + cell_h * scenes.len() + 20;
    let mut svg = String::new();
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         font-family=\"monospace\" font-size=\"11\">\n"
    );
    let _ = write!(
        svg,
        "<rect x=\"0\" y=\"0\" width=\"{width}\" height=\"{height}\" fill=\"white\"/>\n"
    );
    for (j, r) in report.results.iter().enumerate() {
        let x = left + j * cell_w + cell_w / 2;
        let _ = write!(
            svg,
            "<text x=\"{x}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
            top - 10,
            r.tag()
        );
    }
    for (i, &scene) in scenes.iter().enumerate() {
        let y = top + i * cell_h + cell_h / 2 + 4;
        let _ = write!(
            svg,
            "<text x=\"{}\" y=\"{y}\" text-anchor=\"end\">{}</text>\n",
            left - 6,
            scene.id()
        );
        for (j, r) in report.results.iter().enumerate() {
            let acc = r.scene_accuracy(scene).unwrap_or(0.0);
            let x = left + j * cell_w;
            let yy = top + i * cell_h;
            let _ = write!(
                svg,
                "<rect class=\"cell\" x=\"{x}\" y=\"{yy}\" width=\"{cell_w}\" height=\"{cell_h}\" \
                 fill=\"{}\" stroke=\"white\"/>\n",
                cell_color(acc)
            );
            let tx = x + cell_w / 2;
            let ty = yy + cell_h / 2 + 4;
            let fill = if acc > 0.55 { "white" } else { "black" };
            let _ = write!(
                svg,
                "<text x=\"{tx}\" y=\"{ty}\" text-anchor=\"middle\" fill=\"{fill}\">{}</text>\n",
                percent(acc)
            );
        }
    }
    svg.push_str("</svg>\n");
    std::fs::write(dir.join("heatmap_accuracy.svg"), svg.as_bytes())?;

    // run metadata
    let mut meta = String::from("{\n");
    let _ = write!(
        meta,
        "  \"seed\": {},\n  \"n_folds\": {},\n  \"timestamp\": {},\n  \"results\": [\n",
        report.seed, report.n_folds, report.timestamp
    );
    for (i, r) in report.results.iter().enumerate() {
        let folds: Vec<String> = r.fold_accuracies.iter().map(|a| format!("{a:.6}")).collect();
        let _ = write!(
            meta,
            "    {{\"tag\": \"{}\", \"classifier\": \"{}\", \"overall_accuracy\": {:.6}, \
             \"fold_accuracies\": [{}]}}{}\n",
            r.tag(),
            r.clf.tag(),
            r.overall_accuracy(),
            folds.join(", "),
            if i + 1 < report.results.len() { "," } else { "" }
        );
    }
    meta.push_str("  ]\n}\n");
    std::fs::write(dir.join("report_meta.json"), meta.as_bytes())?;
    Ok(())
}
