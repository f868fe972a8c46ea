//! Pipeline probe: per-scene fused vs unimodal accuracy at desk scale.

use posefusion::classifiers::ClassifierKind;
use posefusion::domain::{Illumination, Modality};
use posefusion::eval::{run_cv, ConfigurationSpec};
use posefusion::synth::{generate, GeneratorConfig};
use std::time::Instant;

fn main() {
    let t0 = Instant::now();
    let cfg = GeneratorConfig::default(); // 2 actors x 2 sessions, seed 7
    let ds = generate(&cfg).unwrap();
    println!("generated K={} in {:.1?}", ds.len(), t0.elapsed());

    // trust table on the full dataset (out-of-fold), MM configuration
    let params = posefusion::classifiers::TrainParams::default();
    let table = posefusion::trust::estimate_trust_table_oof(
        &ds,
        &posefusion::domain::View::ALL,
        &params,
        3,
        7,
    )
    .unwrap();
    println!("\nfull-data trust table (R, D, P):");
    for (scene, w) in &table {
        println!(
            "  {:22} {:?}",
            scene.id(),
            w.values().iter().map(|v| (v * 1000.0).round() / 1000.0).collect::<Vec<_>>()
        );
    }

    for spec in [
        ConfigurationSpec::mm(),
        ConfigurationSpec::mpm(),
        ConfigurationSpec::pmm(),
        ConfigurationSpec::pmpm(),
    ] {
        let t = Instant::now();
        let report = run_cv(&ds, &spec, ClassifierKind::Lda, 5, 7).unwrap();
        let r = &report.results[0];
        println!(
            "\n=== {} overall {:.1}% ({:.1?})",
            r.spec.name,
            r.overall_accuracy() * 100.0,
            t.elapsed()
        );
        let mut dark_fused = 0.0;
        let mut dark_best = 0.0;
        let mut n_dark = 0.0;
        for (scene, o) in &r.scenes {
            let fused = o.accuracy();
            let best = o.best_unimodal_accuracy();
            let mut line = format!(
                "{:22} fused {:5.1}  best-uni {:5.1}  margin {:+5.1} |",
                scene.id(),
                fused * 100.0,
                best * 100.0,
                (fused - best) * 100.0
            );
            for &m in &r.spec.modalities {
                line += &format!(
                    " {}={:5.1}",
                    m.tag(),
                    o.unimodal_accuracy(m).unwrap() * 100.0
                );
            }
            if fused < best - 0.05 {
                line += "  <-- VIOLATION";
            }
            println!("{line}");
            if scene.illumination == Illumination::Dark {
                dark_fused += fused;
                dark_best += best;
                n_dark += 1.0;
            }
        }
        println!(
            "dark avg: fused {:.2}% vs best-uni {:.2}% (need strictly greater for MM)",
            dark_fused / n_dark * 100.0,
            dark_best / n_dark * 100.0
        );
        let _ = Modality::ALL;
    }
    println!("\ntotal {:.1?}", t0.elapsed());
}
