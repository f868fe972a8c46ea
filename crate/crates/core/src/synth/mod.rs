//! Deterministic synthetic dataset generator replicating the study
//! structure (10 poses + background, 12 scene conditions, 3 camera views of
//! RGB-D plus one pressure mat), with on-disk persistence as PGM files and a
//! JSON manifest.

mod render;
mod templates;

pub use render::{render_pressure, render_scene, view_homography};
pub use templates::{all_templates, template_for, BodyPart, PoseTemplate};

use crate::domain::{
    Channel, DataPoint, Dataset, DatasetConfig, DomainError, Modality, PoseLabel, SceneCondition,
    View, LABEL_COUNT, SCENE_COUNT,
};
use crate::features::{extract_all, FeatureError, GmomConfig, HogConfig};
use crate::imgproc::{read_pgm, warp, write_pgm, BitDepth, GrayImage, ImageError};
use rayon::prelude::*;
use render::{stream_key, unit_from_key};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("bad generator config: {0}")]
    BadConfig(String),
    #[error("missing dataset file: {0}")]
    MissingFile(String),
    #[error("manifest does not match: {0}")]
    ManifestMismatch(String),
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("manifest parse error: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Everything the generator needs; generation is a pure function of this.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub n_actors: u32,
    pub sessions_per_actor: u32,
    /// (width, height) of every rendered image.
    pub image_size: (usize, usize),
    /// RGB sensor noise (standard deviation in intensity units).
    pub noise_sigma: f64,
    pub depth_noise_sigma: f64,
    pub pressure_noise_sigma: f64,
    /// Amplitude of the smooth per-view depth sensor bias field.
    pub depth_bias_amp: f64,
    /// Amplitude of the smooth pressure-mat drift field.
    pub pressure_bias_amp: f64,
    /// Half-range of the per-capture multiplicative depth gain error.
    pub depth_gain_jitter: f64,
    /// Half-range of the per-capture multiplicative pressure gain error.
    pub pressure_gain_jitter: f64,
    /// Chance that a rectangular sensel patch fails for one capture.
    pub pressure_patch_prob: f64,
    /// Residual reading of a failed patch.
    pub pressure_patch_factor: f64,
    /// RGB gain per illumination level (bright, medium, dark), descending.
    pub illumination_gains: [f64; 3],
    /// RGB defocus blur sigma per illumination level, in pixels.
    pub illumination_blur: [f64; 3],
    /// Fraction of the body length covered by a blanket.
    pub blanket_coverage: f64,
    /// How much body appearance leaks through the blanket.
    pub blanket_leak: f64,
    /// How strongly body height shades the blanket drape.
    pub blanket_drape: f64,
    /// Depth blur under the blanket, in pixels.
    pub blanket_blur_sigma: f64,
    pub blanket_depth_raise: f64,
    /// Pressure rows above this bed coordinate are attenuated by a pillow.
    pub pillow_line_v: f64,
    pub pillow_attenuation: f64,
    /// Depth blur over the pillow region (the pillow envelops the head).
    pub pillow_blur_sigma: f64,
    /// Chance that equipment blocks part of one camera's frame.
    pub view_occluder_prob: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            seed: 7,
            n_actors: 2,
            sessions_per_actor: 2,
            image_size: (160, 120),
            noise_sigma: 0.04,
            depth_noise_sigma: 0.012,
            pressure_noise_sigma: 0.01,
            depth_bias_amp: 0.012,
            pressure_bias_amp: 0.03,
            depth_gain_jitter: 0.06,
            pressure_gain_jitter: 0.20,
            pressure_patch_prob: 0.6,
            pressure_patch_factor: 0.15,
            illumination_gains: [1.0, 0.55, 0.25],
            illumination_blur: [0.0, 0.6, 1.2],
            blanket_coverage: 0.9,
            blanket_leak: 0.25,
            blanket_drape: 0.25,
            blanket_blur_sigma: 3.5,
            blanket_depth_raise: 0.05,
            pillow_line_v: 0.30,
            pillow_attenuation: 0.5,
            pillow_blur_sigma: 3.0,
            view_occluder_prob: 0.2,
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        if self.n_actors == 0 || self.sessions_per_actor == 0 {
            return Err(SynthError::BadConfig(
                "need at least one actor and one session".into(),
            ));
        }
        let (w, h) = self.image_size;
        if w < 16 || h < 16 {
            return Err(SynthError::BadConfig(format!(
                "image size {w}x{h} too small"
            )));
        }
        let [b, m, d] = self.illumination_gains;
        if !(b > m && m > d && d > 0.0) {
            return Err(SynthError::BadConfig(
                "illumination gains must be descending and positive".into(),
            ));
        }
        if !(self.blanket_coverage > 0.0 && self.blanket_coverage <= 1.0) {
            return Err(SynthError::BadConfig(
                "blanket coverage must lie in (0, 1]".into(),
            ));
        }
        for (name, v) in [
            ("noise_sigma", self.noise_sigma),
            ("depth_noise_sigma", self.depth_noise_sigma),
            ("pressure_noise_sigma", self.pressure_noise_sigma),
        ] {
            if !(0.0..1.0).contains(&v) {
                return Err(SynthError::BadConfig(format!("{name} must be in [0, 1)")));
            }
        }
        Ok(())
    }

    /// Total number of datapoints the full factorial produces.
    pub fn point_count(&self) -> usize {
        self.n_actors as usize * self.sessions_per_actor as usize * LABEL_COUNT * SCENE_COUNT
    }

    /// Total number of images (RGB and depth from each view, plus one
    /// pressure map per point).
    pub fn image_count(&self) -> usize {
        self.point_count() * (2 * View::ALL.len() + 1)
    }
}

/// Identity of one generated point within the factorial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PointKey {
    pub actor: u32,
    pub session: u32,
    pub label: PoseLabel,
    pub scene: SceneCondition,
}

impl PointKey {
    fn from_index(cfg: &GeneratorConfig, index: usize) -> PointKey {
        let per_session = LABEL_COUNT * SCENE_COUNT;
        let per_actor = cfg.sessions_per_actor as usize * per_session;
        let actor = (index / per_actor) as u32;
        let rem = index % per_actor;
        let session = (rem / per_session) as u32;
        let rem = rem % per_session;
        let label = PoseLabel::from_index(rem / SCENE_COUNT).unwrap();
        let scene = SceneCondition::from_index(rem % SCENE_COUNT).unwrap();
        PointKey {
            actor,
            session,
            label,
            scene,
        }
    }

    /// File stem shared by all of this point's images.
    pub fn stem(&self) -> String {
        format!(
            "a{}_s{}_c{}_l{}",
            self.actor,
            self.session,
            self.scene.index(),
            self.label.index()
        )
    }
}

/// All rendered images of one point, by channel.
pub type PointImages = BTreeMap<Channel, GrayImage>;

/// Render the full image set of one point. Geometry and noise streams are
/// keyed by the point identity (illumination never enters the depth or
/// pressure keys), so any subset can be re-rendered independently.
pub fn render_point(cfg: &GeneratorConfig, key: PointKey) -> PointImages {
    let occl = key.scene.occlusion;
    let occl_idx = crate::domain::Occlusion::ALL
        .iter()
        .position(|&o| o == occl)
        .unwrap() as u64;

    // actor body traits
    let ak = stream_key(cfg.seed, &[0xA0, key.actor as u64]);
    let scale = 0.90 + 0.12 * unit_from_key(ak);
    let adx = (unit_from_key(ak ^ 1) - 0.5) * 0.04;
    let ady = (unit_from_key(ak ^ 2) - 0.5) * 0.02;

    // per-capture placement jitter (shared by all views and modalities, and
    // independent of illumination so depth/pressure repeat exactly)
    let jk = stream_key(
        cfg.seed,
        &[
            0xB0,
            key.actor as u64,
            key.session as u64,
            key.label.index() as u64,
            occl_idx,
        ],
    );
    let dx = adx + (unit_from_key(jk) - 0.5) * 0.03;
    let dy = ady + (unit_from_key(jk ^ 1) - 0.5) * 0.02;
    let rot = (unit_from_key(jk ^ 2) - 0.5) * 0.06;

    let tpl = template_for(key.label).instanced(scale, dx, dy, rot);

    let mut images = BTreeMap::new();
    for (vi, view) in View::ALL.into_iter().enumerate() {
        let nk = stream_key(
            cfg.seed,
            &[
                0xC0,
                key.actor as u64,
                key.session as u64,
                key.label.index() as u64,
                occl_idx,
                vi as u64,
            ],
        );
        let (rgb, depth) = render_scene(&tpl, key.scene, view, cfg, nk);
        images.insert(Channel::viewed(Modality::Rgb, view), rgb);
        images.insert(Channel::viewed(Modality::Depth, view), depth);
    }
    let pk = stream_key(
        cfg.seed,
        &[
            0xD0,
            key.actor as u64,
            key.session as u64,
            key.label.index() as u64,
            occl_idx,
        ],
    );
    images.insert(Channel::pressure(), render_pressure(&tpl, key.scene, cfg, pk));
    images
}

/// Registration homographies per view: the map from view pixels into the
/// top frame (the inverse of the rendering distortion).
pub fn registration_homographies(
    cfg: &GeneratorConfig,
) -> BTreeMap<View, crate::imgproc::Homography> {
    let (w, h) = cfg.image_size;
    View::ALL
        .into_iter()
        .map(|v| {
            let reg = view_homography(v, w, h)
                .inverse()
                .expect("view homographies are invertible");
            (v, reg)
        })
        .collect()
}

/// Warp every viewed channel into the top frame; the top view and the
/// pressure mat pass through.
pub fn register_images(
    images: &PointImages,
    registration: &BTreeMap<View, crate::imgproc::Homography>,
    out_size: (usize, usize),
) -> Result<PointImages, SynthError> {
    let mut out = BTreeMap::new();
    for (&channel, img) in images {
        let registered = match channel.view {
            Some(view) if view != View::Top => {
                let h = registration
                    .get(&view)
                    .ok_or_else(|| SynthError::ManifestMismatch(format!(
                        "no registration homography for view {view}"
                    )))?;
                warp(img, h, out_size.0, out_size.1)?
            }
            _ => img.clone(),
        };
        out.insert(channel, registered);
    }
    Ok(out)
}

fn dataset_config(hog: &HogConfig, gmom: &GmomConfig) -> Result<DatasetConfig, SynthError> {
    let mut feature_dims = BTreeMap::new();
    for c in Channel::set(&Modality::ALL, &View::ALL) {
        feature_dims.insert(c, crate::features::descriptor_len(c, hog, gmom)?);
    }
    Ok(DatasetConfig {
        modalities: Modality::ALL.to_vec(),
        views: View::ALL.to_vec(),
        feature_dims,
    })
}

/// Generate the full factorial dataset (actors x sessions x labels x
/// scenes) with features extracted from registered renders. Bit-reproducible
/// per config.
pub fn generate(cfg: &GeneratorConfig) -> Result<Dataset, SynthError> {
    generate_with(cfg, &HogConfig::default(), &GmomConfig::default())
}

pub fn generate_with(
    cfg: &GeneratorConfig,
    hog: &HogConfig,
    gmom: &GmomConfig,
) -> Result<Dataset, SynthError> {
    cfg.validate()?;
    let registration = registration_homographies(cfg);
    let config = dataset_config(hog, gmom)?;
    let points: Vec<DataPoint> = (0..cfg.point_count())
        .into_par_iter()
        .map(|index| -> Result<DataPoint, SynthError> {
            let key = PointKey::from_index(cfg, index);
            let images = render_point(cfg, key);
            let registered = register_images(&images, &registration, cfg.image_size)?;
            let features = extract_all(&registered, hog, gmom)?;
            Ok(DataPoint {
                features,
                label: key.label,
                scene: key.scene,
                actor_id: key.actor,
                session_id: key.session,
            })
        })
        .collect::<Result<_, _>>()?;
    Ok(Dataset::new(points, config)?)
}

const MANIFEST_VERSION: u32 = 1;
const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Manifest {
    version: u32,
    generator: GeneratorConfig,
    label_names: Vec<String>,
    scene_ids: Vec<String>,
    modalities: Vec<String>,
    views: Vec<String>,
    /// Row-major 3x3 view-to-top-frame registration matrices.
    registration: BTreeMap<String, [f64; 9]>,
    hog: HogConfig,
    gmom: GmomConfig,
    n_points: usize,
}

impl Manifest {
    fn build(cfg: &GeneratorConfig, hog: &HogConfig, gmom: &GmomConfig) -> Manifest {
        let registration = registration_homographies(cfg)
            .into_iter()
            .map(|(v, h)| {
                let m = h.matrix();
                let flat = [
                    m[0][0], m[0][1], m[0][2], m[1][0], m[1][1], m[1][2], m[2][0], m[2][1],
                    m[2][2],
                ];
                (v.tag().to_string(), flat)
            })
            .collect();
        Manifest {
            version: MANIFEST_VERSION,
            generator: cfg.clone(),
            label_names: PoseLabel::ALL.iter().map(|l| l.name().to_string()).collect(),
            scene_ids: SceneCondition::all().map(|s| s.id()).collect(),
            modalities: Modality::ALL.iter().map(|m| m.tag().to_string()).collect(),
            views: View::ALL.iter().map(|v| v.tag().to_string()).collect(),
            registration,
            hog: *hog,
            gmom: *gmom,
            n_points: cfg.point_count(),
        }
    }

    fn validate(&self) -> Result<(), SynthError> {
        if self.version != MANIFEST_VERSION {
            return Err(SynthError::ManifestMismatch(format!(
                "manifest version {}, reader supports {MANIFEST_VERSION}",
                self.version
            )));
        }
        let labels: Vec<String> = PoseLabel::ALL.iter().map(|l| l.name().to_string()).collect();
        if self.label_names != labels {
            return Err(SynthError::ManifestMismatch(
                "label list does not match this build's label order".into(),
            ));
        }
        let scenes: Vec<String> = SceneCondition::all().map(|s| s.id()).collect();
        if self.scene_ids != scenes {
            return Err(SynthError::ManifestMismatch(
                "scene list does not match this build's scene order".into(),
            ));
        }
        if self.n_points != self.generator.point_count() {
            return Err(SynthError::ManifestMismatch(format!(
                "manifest claims {} points, config implies {}",
                self.n_points,
                self.generator.point_count()
            )));
        }
        Ok(())
    }
}

fn channel_file_name(stem: &str, channel: Channel) -> String {
    match channel.view {
        Some(v) => format!("{stem}_{}_{}.pgm", channel.modality.tag(), v.tag()),
        None => format!("{stem}_{}.pgm", channel.modality.tag()),
    }
}

fn channel_bit_depth(modality: Modality) -> BitDepth {
    match modality {
        Modality::Rgb => BitDepth::Eight,
        Modality::Depth | Modality::Pressure => BitDepth::Sixteen,
    }
}

/// Write a dataset directory (manifest plus one PGM per point, modality and
/// view) by re-rendering deterministically from the generator config.
pub fn save_generated(
    cfg: &GeneratorConfig,
    hog: &HogConfig,
    gmom: &GmomConfig,
    dir: &Path,
) -> Result<usize, SynthError> {
    cfg.validate()?;
    std::fs::create_dir_all(dir)?;
    let manifest = Manifest::build(cfg, hog, gmom);
    let json = serde_json::to_string_pretty(&manifest)?;
    std::fs::write(dir.join(MANIFEST_FILE), json.as_bytes())?;

    (0..cfg.point_count())
        .into_par_iter()
        .try_for_each(|index| -> Result<(), SynthError> {
            let key = PointKey::from_index(cfg, index);
            let images = render_point(cfg, key);
            for (&channel, img) in &images {
                let name = channel_file_name(&key.stem(), channel);
                write_pgm(img, channel_bit_depth(channel.modality), &dir.join(name))?;
            }
            Ok(())
        })?;
    Ok(cfg.point_count())
}

/// Persist a generated dataset. The dataset holds extracted features, not
/// pixels, so the images are re-rendered from the config (rendering is a
/// pure function of it); the point count must agree.
pub fn save_dataset(
    ds: &Dataset,
    cfg: &GeneratorConfig,
    dir: &Path,
) -> Result<(), SynthError> {
    if ds.len() != cfg.point_count() {
        return Err(SynthError::ManifestMismatch(format!(
            "dataset has {} points but config generates {}",
            ds.len(),
            cfg.point_count()
        )));
    }
    save_generated(cfg, &HogConfig::default(), &GmomConfig::default(), dir)?;
    Ok(())
}

/// Load a dataset directory: validate the manifest, read every PGM,
/// register views to the top frame and re-extract features.
pub fn load_dataset(dir: &Path) -> Result<Dataset, SynthError> {
    let manifest_path = dir.join(MANIFEST_FILE);
    if !manifest_path.exists() {
        return Err(SynthError::MissingFile(MANIFEST_FILE.to_string()));
    }
    let manifest: Manifest = serde_json::from_str(&std::fs::read_to_string(&manifest_path)?)?;
    manifest.validate()?;
    let cfg = &manifest.generator;

    let mut registration = BTreeMap::new();
    for (tag, flat) in &manifest.registration {
        let view = View::from_tag(tag).ok_or_else(|| {
            SynthError::ManifestMismatch(format!("unknown view tag {tag:?}"))
        })?;
        let h = crate::imgproc::Homography::new([
            [flat[0], flat[1], flat[2]],
            [flat[3], flat[4], flat[5]],
            [flat[6], flat[7], flat[8]],
        ])?;
        registration.insert(view, h);
    }

    let config = dataset_config(&manifest.hog, &manifest.gmom)?;
    let channels = Channel::set(&Modality::ALL, &View::ALL);

    // check file presence up front so the error names the missing key
    for index in 0..manifest.n_points {
        let key = PointKey::from_index(cfg, index);
        for &channel in &channels {
            let name = channel_file_name(&key.stem(), channel);
            if !dir.join(&name).exists() {
                return Err(SynthError::MissingFile(name));
            }
        }
    }

    let points: Vec<DataPoint> = (0..manifest.n_points)
        .into_par_iter()
        .map(|index| -> Result<DataPoint, SynthError> {
            let key = PointKey::from_index(cfg, index);
            let mut images = BTreeMap::new();
            for &channel in &channels {
                let name = channel_file_name(&key.stem(), channel);
                let img = read_pgm(&dir.join(&name))?;
                if (img.width(), img.height()) != cfg.image_size {
                    return Err(SynthError::ManifestMismatch(format!(
                        "{name} is {}x{}, manifest says {}x{}",
                        img.width(),
                        img.height(),
                        cfg.image_size.0,
                        cfg.image_size.1
                    )));
                }
                images.insert(channel, img);
            }
            let registered = register_images(&images, &registration, cfg.image_size)?;
            let features = extract_all(&registered, &manifest.hog, &manifest.gmom)?;
            Ok(DataPoint {
                features,
                label: key.label,
                scene: key.scene,
                actor_id: key.actor,
                session_id: key.session,
            })
        })
        .collect::<Result<_, _>>()?;
    Ok(Dataset::new(points, config)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_cfg() -> GeneratorConfig {
        GeneratorConfig {
            n_actors: 1,
            sessions_per_actor: 1,
            image_size: (80, 60),
            ..GeneratorConfig::default()
        }
    }

    #[test]
    fn point_count_factorial() {
        let cfg = GeneratorConfig {
            n_actors: 2,
            sessions_per_actor: 1,
            ..GeneratorConfig::default()
        };
        assert_eq!(cfg.point_count(), 264);
        // full-study multipliers: 5 actors x 10 sessions x 11 classes x 12
        // scenes, with 10 images captured per scene cell
        let study = GeneratorConfig {
            n_actors: 5,
            sessions_per_actor: 10,
            ..GeneratorConfig::default()
        };
        assert_eq!(study.point_count() * 10, 66_000);
    }

    #[test]
    fn generate_is_deterministic_and_complete() {
        let cfg = tiny_cfg();
        let a = generate(&cfg).unwrap();
        let b = generate(&cfg).unwrap();
        assert_eq!(a.len(), 132);
        for (pa, pb) in a.points().iter().zip(b.points()) {
            assert_eq!(pa.label, pb.label);
            assert_eq!(pa.scene, pb.scene);
            for (c, f) in &pa.features {
                assert_eq!(f.values, pb.features[c].values, "channel {c}");
            }
        }
        let parts = crate::domain::partition_by_scene(&a);
        assert_eq!(parts.len(), 12);
        for sub in parts.values() {
            assert_eq!(sub.len(), 11);
        }
    }

    #[test]
    fn save_load_round_trip_preserves_features() {
        let cfg = tiny_cfg();
        let dir = tempfile::tempdir().unwrap();
        let ds = generate(&cfg).unwrap();
        save_dataset(&ds, &cfg, dir.path()).unwrap();
        let loaded = load_dataset(dir.path()).unwrap();
        assert_eq!(loaded.len(), ds.len());
        for (pa, pb) in ds.points().iter().zip(loaded.points()) {
            assert_eq!(pa.label, pb.label);
            for (c, f) in &pa.features {
                assert_eq!(f.values, pb.features[c].values, "channel {c}");
            }
        }
    }

    #[test]
    fn save_twice_is_byte_identical() {
        let cfg = tiny_cfg();
        let d1 = tempfile::tempdir().unwrap();
        let d2 = tempfile::tempdir().unwrap();
        save_generated(&cfg, &HogConfig::default(), &GmomConfig::default(), d1.path()).unwrap();
        save_generated(&cfg, &HogConfig::default(), &GmomConfig::default(), d2.path()).unwrap();
        let mut names: Vec<String> = std::fs::read_dir(d1.path())
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        names.sort();
        assert_eq!(names.len(), 1 + 132 * 7);
        for name in names {
            let a = std::fs::read(d1.path().join(&name)).unwrap();
            let b = std::fs::read(d2.path().join(&name)).unwrap();
            assert_eq!(a, b, "file {name} differs");
        }
    }

    #[test]
    fn missing_file_is_reported_by_name() {
        let cfg = tiny_cfg();
        let dir = tempfile::tempdir().unwrap();
        save_generated(&cfg, &HogConfig::default(), &GmomConfig::default(), dir.path()).unwrap();
        let victim = "a0_s0_c3_l5_D_s.pgm";
        std::fs::remove_file(dir.path().join(victim)).unwrap();
        match load_dataset(dir.path()) {
            Err(SynthError::MissingFile(name)) => assert_eq!(name, victim),
            other => panic!("expected MissingFile, got {other:?}"),
        }
    }

    #[test]
    fn tampered_manifest_is_rejected() {
        let cfg = tiny_cfg();
        let dir = tempfile::tempdir().unwrap();
        save_generated(&cfg, &HogConfig::default(), &GmomConfig::default(), dir.path()).unwrap();
        let path = dir.path().join(MANIFEST_FILE);
        let json = std::fs::read_to_string(&path).unwrap();
        // swap two label names
        let json = json.replace("\"Background\"", "\"__tmp__\"");
        let json = json.replace("\"SoldierU\"", "\"Background\"");
        let json = json.replace("\"__tmp__\"", "\"SoldierU\"");
        std::fs::write(&path, json).unwrap();
        assert!(matches!(
            load_dataset(dir.path()),
            Err(SynthError::ManifestMismatch(_))
        ));
    }

    #[test]
    fn bad_configs_rejected() {
        let mut cfg = tiny_cfg();
        cfg.illumination_gains = [0.5, 0.7, 0.2];
        assert!(matches!(generate(&cfg), Err(SynthError::BadConfig(_))));
        let mut cfg = tiny_cfg();
        cfg.blanket_coverage = 0.0;
        assert!(matches!(generate(&cfg), Err(SynthError::BadConfig(_))));
        let mut cfg = tiny_cfg();
        cfg.n_actors = 0;
        assert!(matches!(generate(&cfg), Err(SynthError::BadConfig(_))));
    }
}
