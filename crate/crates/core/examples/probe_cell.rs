//! Inspect the fused decision on one scene cell, point by point.

use posefusion::classifiers::{fit_channel_classifiers, ProbabilisticClassifier, TrainParams};
use posefusion::domain::*;
use posefusion::eval::ConfigurationSpec;
use posefusion::fusion::{predict_with_trust, ModelConfig, TrustedModel};
use posefusion::synth::{generate, GeneratorConfig};
use posefusion::trust::estimate_trust_table_oof;
use std::collections::BTreeSet;

fn main() {
    let scene = SceneCondition::new(Illumination::Dark, Occlusion::Clear);
    let cfg = GeneratorConfig::default();
    let ds = generate(&cfg).unwrap();
    let spec = ConfigurationSpec::mm();
    let restricted = ds.restrict(&spec.modalities, &spec.views).unwrap();
    let folds = stratified_folds(&restricted, 5, 7).unwrap();

    let all: BTreeSet<Modality> = Modality::ALL.into_iter().collect();
    let mut n_wrong = 0;
    for (fold_idx, fold) in folds.iter().enumerate() {
        let params = TrainParams {
            seed: 7 ^ (fold_idx as u64 + 1),
            ..TrainParams::default()
        };
        let classifiers = fit_channel_classifiers(&fold.train, &params).unwrap();
        let trust_table = estimate_trust_table_oof(
            &fold.train,
            &spec.views,
            &params,
            4,
            7 ^ 0x5eed ^ (fold_idx as u64),
        )
        .unwrap();
        println!(
            "fold {fold_idx}: trust[{}] = {:?}",
            scene.id(),
            trust_table[&scene]
                .values()
                .iter()
                .map(|v| (v * 100.0).round() / 100.0)
                .collect::<Vec<_>>()
        );
        let model = TrustedModel {
            config: ModelConfig {
                kind: params.kind,
                modalities: spec.modalities.clone(),
                views: spec.views.clone(),
                hog: Default::default(),
                gmom: Default::default(),
                feature_dims: fold.train.config().feature_dims.clone(),
            },
            classifiers,
            trust_table,
        };
        for p in fold.test.points().iter().filter(|p| p.scene == scene) {
            let (label, proba, w) = predict_with_trust(&model, p, &all).unwrap();
            let any_err = true;
            if any_err && label != p.label {
                n_wrong += 1;
                println!(
                    "  truth {} -> fused {} (p={:.2})  w={:?}",
                    p.label,
                    label,
                    proba.get(label.index()),
                    w.values().iter().map(|v| (v * 100.0).round() / 100.0).collect::<Vec<_>>()
                );
                for &m in &spec.modalities {
                    let mut acc = vec![0.0; LABEL_COUNT];
                    let chans: Vec<Channel> = if m.is_viewless() {
                        vec![Channel::pressure()]
                    } else {
                        View::ALL.iter().map(|&v| Channel::viewed(m, v)).collect()
                    };
                    for c in &chans {
                        let probs = model.classifiers[c]
                            .predict_proba(&p.feature(*c).unwrap().values)
                            .unwrap();
                        for (a, v) in acc.iter_mut().zip(probs.values()) {
                            *a += v / chans.len() as f64;
                        }
                    }
                    let arg = acc
                        .iter()
                        .enumerate()
                        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                        .unwrap()
                        .0;
                    println!(
                        "    {}: pred {} p_pred={:.2} p_truth={:.2}",
                        m.tag(),
                        PoseLabel::from_index(arg).unwrap(),
                        acc[arg],
                        acc[p.label.index()]
                    );
                }
            }
        }
    }
    println!("total wrong in {}: {n_wrong}", scene.id());
}
