//! Deterministic scene rendering: body ellipses over a bed, per-view
//! homography distortion, illumination gain and blur on RGB, height-field
//! depth and contact-load pressure, all quantized to their file bit depth.

use super::templates::PoseTemplate;
use super::GeneratorConfig;
use crate::domain::{Illumination, Occlusion, SceneCondition, View};
use crate::imgproc::{gaussian_blur, quantize, BitDepth, GrayImage, Homography};
use rand::{Rng, SeedableRng};

/// splitmix64 step, used to derive independent noise streams per point,
/// channel and view so generation order never matters.
pub(crate) fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub(crate) fn stream_key(seed: u64, tags: &[u64]) -> u64 {
    let mut h = mix(seed);
    for &t in tags {
        h = mix(h ^ t.wrapping_mul(0xff51_afd7_ed55_8ccd));
    }
    h
}

/// Uniform f64 in [0, 1) from a key, without consuming an RNG.
pub(crate) fn unit_from_key(key: u64) -> f64 {
    (mix(key) >> 11) as f64 / (1u64 << 53) as f64
}

pub(crate) struct NoiseRng(rand_chacha::ChaCha8Rng);

impl NoiseRng {
    pub(crate) fn new(key: u64) -> Self {
        NoiseRng(rand_chacha::ChaCha8Rng::seed_from_u64(key))
    }

    /// Standard normal via Box-Muller; always consumes two uniforms.
    pub(crate) fn normal(&mut self) -> f64 {
        let u1: f64 = self.0.gen_range(f64::MIN_POSITIVE..1.0);
        let u2: f64 = self.0.gen();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }
}

/// Fixed top-frame-to-view homographies in pixel coordinates. The top view
/// is the identity; side and head cameras get a mild rotation, shear and
/// perspective about the image center.
pub fn view_homography(view: View, width: usize, height: usize) -> Homography {
    let (cx, cy) = (width as f64 / 2.0, height as f64 / 2.0);
    let m: [[f64; 3]; 3] = match view {
        View::Top => return Homography::identity(),
        View::Side => [
            [0.96, 0.10, 2.0],
            [-0.04, 0.92, 1.5],
            [3.0e-4, -2.0e-4, 1.0],
        ],
        View::Head => [
            [0.93, -0.05, -1.0],
            [0.06, 0.88, 3.0],
            [-2.0e-4, 4.0e-4, 1.0],
        ],
    };
    // conjugate by the centering translation: H = T(c) * M * T(-c)
    let t_neg = [[1.0, 0.0, -cx], [0.0, 1.0, -cy], [0.0, 0.0, 1.0]];
    let t_pos = [[1.0, 0.0, cx], [0.0, 1.0, cy], [0.0, 0.0, 1.0]];
    let mt = mat_mul(&m, &t_neg);
    let full = mat_mul(&t_pos, &mt);
    Homography::new(full).expect("view homographies are invertible")
}

fn mat_mul(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for (k, bk) in b.iter().enumerate() {
                out[i][j] += a[i][k] * bk[j];
            }
        }
    }
    out
}

// bed layout constants, in bed coordinates
const MAT_ALBEDO: f64 = 0.18;
const RAIL_ALBEDO: f64 = 0.45;
const VOID_ALBEDO: f64 = 0.03;
const STRIPE_ALBEDO: f64 = 0.12;
const PILLOW_ALBEDO: f64 = 0.80;
const BLANKET_ALBEDO: f64 = 0.50;
const MAT_HEIGHT: f64 = 0.25;
const RAIL_U: f64 = 0.04;
const RAIL_V: f64 = 0.03;
const BODY_TOP_V: f64 = 0.07;
const BODY_BOTTOM_V: f64 = 0.95;
const PILLOW_CX: f64 = 0.5;
const PILLOW_CY: f64 = 0.13;
const PILLOW_RU: f64 = 0.30;
const PILLOW_RV: f64 = 0.11;

/// Scene evaluated as continuous fields over bed coordinates.
pub(crate) struct SceneField<'a> {
    template: &'a PoseTemplate,
    occlusion: Occlusion,
    cfg: &'a GeneratorConfig,
    blanket_top_v: f64,
}

impl<'a> SceneField<'a> {
    pub(crate) fn new(
        template: &'a PoseTemplate,
        scene: SceneCondition,
        cfg: &'a GeneratorConfig,
    ) -> Self {
        let blanket_top_v =
            BODY_BOTTOM_V - cfg.blanket_coverage * (BODY_BOTTOM_V - BODY_TOP_V);
        SceneField {
            template,
            occlusion: scene.occlusion,
            cfg,
            blanket_top_v,
        }
    }

    fn in_bed(u: f64, v: f64) -> bool {
        (0.0..=1.0).contains(&u) && (0.0..=1.0).contains(&v)
    }

    pub(crate) fn in_blanket(&self, u: f64, v: f64) -> bool {
        self.occlusion.has_blanket()
            && (0.06..=0.94).contains(&u)
            && v >= self.blanket_top_v
            && v <= 0.97
    }

    fn in_pillow(u: f64, v: f64) -> f64 {
        let du = (u - PILLOW_CX) / PILLOW_RU;
        let dv = (v - PILLOW_CY) / PILLOW_RV;
        du * du + dv * dv
    }

    pub(crate) fn in_pillow_region(&self, u: f64, v: f64) -> bool {
        Self::in_bed(u, v) && Self::in_pillow(u, v) <= 1.0
    }

    /// Body height above the mattress, 0 outside the body.
    fn body_height(&self, u: f64, v: f64) -> f64 {
        let mut h: f64 = 0.0;
        for p in &self.template.parts {
            let rho2 = p.rho2(u, v);
            if rho2 <= 1.0 {
                h = h.max(p.height * (0.35 + 0.65 * (1.0 - rho2)));
            }
        }
        h
    }

    /// Grayscale appearance with occlusion layering: mat and rails, pillow,
    /// body, then blanket (which leaks a bit of body shading through its
    /// drape).
    pub(crate) fn albedo(&self, u: f64, v: f64) -> f64 {
        if !Self::in_bed(u, v) {
            return VOID_ALBEDO;
        }
        let mut val = if u < RAIL_U || u > 1.0 - RAIL_U || v < RAIL_V || v > 1.0 - RAIL_V {
            RAIL_ALBEDO
        } else if (v - 0.28).abs() < 0.008 || (v - 0.52).abs() < 0.008 || (v - 0.76).abs() < 0.008
        {
            STRIPE_ALBEDO
        } else {
            MAT_ALBEDO
        };
        if self.occlusion.has_pillow() {
            let rho2 = Self::in_pillow(u, v);
            if rho2 <= 1.0 {
                val = PILLOW_ALBEDO * (0.82 + 0.18 * (1.0 - rho2));
            }
        }
        let mut on_body = false;
        for p in &self.template.parts {
            let rho2 = p.rho2(u, v);
            if rho2 <= 1.0 {
                let shaded = p.albedo * (0.78 + 0.22 * (1.0 - rho2));
                if !on_body || shaded > val {
                    val = shaded;
                }
                on_body = true;
            }
        }
        if self.in_blanket(u, v) {
            let body = self.body_height(u, v);
            val = BLANKET_ALBEDO + self.cfg.blanket_drape * body
                + self.cfg.blanket_leak * (val - BLANKET_ALBEDO).max(0.0);
        }
        val.clamp(0.0, 1.0)
    }

    /// Height field seen by the depth camera (blanket handled after
    /// rasterization by blurring).
    pub(crate) fn height(&self, u: f64, v: f64) -> f64 {
        if !Self::in_bed(u, v) {
            return 0.0;
        }
        let mut h = MAT_HEIGHT;
        if self.occlusion.has_pillow() {
            let rho2 = Self::in_pillow(u, v);
            if rho2 <= 1.0 {
                h += 0.12 * (1.0 - rho2);
            }
        }
        h += self.body_height(u, v);
        h.clamp(0.0, 1.0)
    }

    /// Contact load on the mat; pillow occlusion attenuates the head and
    /// upper-back region. Blankets never affect pressure.
    pub(crate) fn load(&self, u: f64, v: f64) -> f64 {
        if !Self::in_bed(u, v) {
            return 0.0;
        }
        let mut sum = 0.0;
        for p in &self.template.parts {
            let rho2 = p.rho2(u, v);
            if rho2 <= 1.0 {
                let profile = 1.0 - rho2;
                sum += p.load * profile * profile;
            }
        }
        let mut val = 0.65 * sum;
        if self.occlusion.has_pillow() && v < self.cfg.pillow_line_v {
            val *= self.cfg.pillow_attenuation;
        }
        val.clamp(0.0, 1.0)
    }
}

fn add_noise(img: &GrayImage, sigma: f64, rng: &mut NoiseRng) -> GrayImage {
    if sigma <= 0.0 {
        return img.clone();
    }
    let pixels = img
        .pixels()
        .iter()
        .map(|&v| (v + sigma * rng.normal()).clamp(0.0, 1.0))
        .collect();
    GrayImage::new(img.width(), img.height(), pixels).expect("clamped pixels are valid")
}

/// Per-capture multiplicative sensor gain error. Tiled moments are linear
/// in intensity, so this smears each class along its feature ray.
fn apply_gain_jitter(img: &GrayImage, jitter: f64, key: u64) -> GrayImage {
    if jitter <= 0.0 {
        return img.clone();
    }
    let scale = 1.0 + jitter * (2.0 * unit_from_key(key) - 1.0);
    let pixels = img.pixels().iter().map(|&v| (v * scale).clamp(0.0, 1.0)).collect();
    GrayImage::new(img.width(), img.height(), pixels).expect("clamped pixels are valid")
}

const BIAS_GRID: (usize, usize) = (8, 6);

/// Smooth low-frequency sensor bias: a coarse grid of normal draws,
/// bilinearly upsampled. Models per-view calibration drift that pixel-level
/// averaging cannot remove.
fn add_bias_field(img: &GrayImage, amp: f64, rng: &mut NoiseRng) -> GrayImage {
    if amp <= 0.0 {
        return img.clone();
    }
    let (gw, gh) = BIAS_GRID;
    let nodes: Vec<f64> = (0..(gw + 1) * (gh + 1)).map(|_| rng.normal()).collect();
    let (w, h) = (img.width(), img.height());
    let pixels = img
        .pixels()
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let x = (i % w) as f64 / (w - 1).max(1) as f64 * gw as f64;
            let y = (i / w) as f64 / (h - 1).max(1) as f64 * gh as f64;
            let x0 = (x as usize).min(gw - 1);
            let y0 = (y as usize).min(gh - 1);
            let fx = x - x0 as f64;
            let fy = y - y0 as f64;
            let n = |xx: usize, yy: usize| nodes[yy * (gw + 1) + xx];
            let top = n(x0, y0) * (1.0 - fx) + n(x0 + 1, y0) * fx;
            let bot = n(x0, y0 + 1) * (1.0 - fx) + n(x0 + 1, y0 + 1) * fx;
            let bias = top * (1.0 - fy) + bot * fy;
            (v + amp * bias).clamp(0.0, 1.0)
        })
        .collect();
    GrayImage::new(w, h, pixels).expect("clamped pixels are valid")
}

/// Render the RGB (as luminance) and depth images of one posed scene from
/// one camera view. Deterministic per (template, scene, view, cfg, seed).
pub fn render_scene(
    template: &PoseTemplate,
    scene: SceneCondition,
    view: View,
    cfg: &GeneratorConfig,
    noise_seed: u64,
) -> (GrayImage, GrayImage) {
    let (w, h) = cfg.image_size;
    let field = SceneField::new(template, scene, cfg);
    let hv = view_homography(view, w, h);
    let inv = hv.inverse().expect("view homographies are invertible");

    let illum_idx = Illumination::ALL
        .iter()
        .position(|&i| i == scene.illumination)
        .unwrap();
    let gain = cfg.illumination_gains[illum_idx];
    let blur = cfg.illumination_blur[illum_idx];

    // equipment occasionally blocks a vertical slice of this camera's frame
    let occ_key = stream_key(noise_seed, &[4]);
    let occluder = if unit_from_key(occ_key) < cfg.view_occluder_prob {
        let center = (0.12 + 0.76 * unit_from_key(occ_key ^ 1)) * w as f64;
        let half = (0.03 + 0.03 * unit_from_key(occ_key ^ 2)) * w as f64;
        Some((center, half))
    } else {
        None
    };
    const OCCLUDER_ALBEDO: f64 = 0.10;
    const OCCLUDER_DEPTH: f64 = 0.50;

    let mut rgb = vec![0.0f64; w * h];
    let mut depth = vec![0.0f64; w * h];
    let mut blanket_mask = vec![false; w * h];
    let mut pillow_mask = vec![false; w * h];
    for py in 0..h {
        for px in 0..w {
            // map view pixel back into the top frame, then to bed coords
            let (qx, qy) = inv.apply(px as f64, py as f64).unwrap_or((-1e9, -1e9));
            let u = (qx + 0.5) / w as f64;
            let v = (qy + 0.5) / h as f64;
            let i = py * w + px;
            if let Some((center, half)) = occluder {
                let off = (px as f64 - center).abs();
                if off <= half {
                    rgb[i] = (gain * OCCLUDER_ALBEDO).clamp(0.0, 1.0);
                    // near-field pole: the depth sensor sees around its edges
                    if off <= 0.5 * half {
                        depth[i] = OCCLUDER_DEPTH;
                        continue;
                    }
                    depth[i] = field.height(u, v);
                    blanket_mask[i] = field.in_blanket(u, v);
                    pillow_mask[i] =
                        scene.occlusion.has_pillow() && field.in_pillow_region(u, v);
                    continue;
                }
            }
            rgb[i] = (gain * field.albedo(u, v)).clamp(0.0, 1.0);
            depth[i] = field.height(u, v);
            blanket_mask[i] = field.in_blanket(u, v);
            pillow_mask[i] = scene.occlusion.has_pillow() && field.in_pillow_region(u, v);
        }
    }
    let rgb = GrayImage::new(w, h, rgb).expect("render values are clamped");
    let depth = GrayImage::new(w, h, depth).expect("render values are clamped");

    // darkness also costs focus: blur before the sensor noise goes on
    let rgb = gaussian_blur(&rgb, blur);
    let mut rgb_rng = NoiseRng::new(stream_key(noise_seed, &[1, illum_idx as u64]));
    let rgb = quantize(&add_noise(&rgb, cfg.noise_sigma, &mut rgb_rng), BitDepth::Eight);

    // a blanket smooths the height field and lifts it slightly
    let depth = if scene.occlusion.has_blanket() {
        let blurred = gaussian_blur(&depth, cfg.blanket_blur_sigma);
        let pixels = depth
            .pixels()
            .iter()
            .zip(blurred.pixels())
            .zip(&blanket_mask)
            .map(|((&raw, &soft), &covered)| {
                if covered {
                    (soft + cfg.blanket_depth_raise).clamp(0.0, 1.0)
                } else {
                    raw
                }
            })
            .collect();
        GrayImage::new(w, h, pixels).expect("clamped")
    } else {
        depth
    };
    // the pillow envelops the head and washes out its depth contour
    let depth = if scene.occlusion.has_pillow() {
        let blurred = gaussian_blur(&depth, cfg.pillow_blur_sigma);
        let pixels = depth
            .pixels()
            .iter()
            .zip(blurred.pixels())
            .zip(&pillow_mask)
            .map(|((&raw, &soft), &covered)| if covered { soft } else { raw })
            .collect();
        GrayImage::new(w, h, pixels).expect("clamped")
    } else {
        depth
    };
    let mut depth_rng = NoiseRng::new(stream_key(noise_seed, &[2]));
    let depth = apply_gain_jitter(&depth, cfg.depth_gain_jitter, stream_key(noise_seed, &[5]));
    let depth = add_bias_field(&depth, cfg.depth_bias_amp, &mut depth_rng);
    let depth = quantize(
        &add_noise(&depth, cfg.depth_noise_sigma, &mut depth_rng),
        BitDepth::Sixteen,
    );

    (rgb, depth)
}

/// Render the pressure-mat image of one posed scene. Illumination never
/// enters this path; pillows attenuate the head/upper-back region.
pub fn render_pressure(
    template: &PoseTemplate,
    scene: SceneCondition,
    cfg: &GeneratorConfig,
    noise_seed: u64,
) -> GrayImage {
    let (w, h) = cfg.image_size;
    let field = SceneField::new(template, scene, cfg);
    let mut pixels = vec![0.0f64; w * h];
    for py in 0..h {
        for px in 0..w {
            let u = (px as f64 + 0.5) / w as f64;
            let v = (py as f64 + 0.5) / h as f64;
            pixels[py * w + px] = field.load(u, v);
        }
    }
    let img = GrayImage::new(w, h, pixels).expect("clamped");
    let mut rng = NoiseRng::new(stream_key(noise_seed, &[3]));
    let img = apply_gain_jitter(&img, cfg.pressure_gain_jitter, stream_key(noise_seed, &[6]));
    // sensel patches fail now and then; a dead region reads near zero
    let img = {
        let pk = stream_key(noise_seed, &[7]);
        if unit_from_key(pk) < cfg.pressure_patch_prob {
            let (w, h) = (img.width(), img.height());
            let pw = (0.15 + 0.15 * unit_from_key(pk ^ 1)) * w as f64;
            let ph = (0.15 + 0.15 * unit_from_key(pk ^ 2)) * h as f64;
            let px0 = unit_from_key(pk ^ 3) * (w as f64 - pw);
            let py0 = unit_from_key(pk ^ 4) * (h as f64 - ph);
            let pixels = img
                .pixels()
                .iter()
                .enumerate()
                .map(|(i, &v)| {
                    let x = (i % w) as f64;
                    let y = (i / w) as f64;
                    if x >= px0 && x < px0 + pw && y >= py0 && y < py0 + ph {
                        v * cfg.pressure_patch_factor
                    } else {
                        v
                    }
                })
                .collect();
            GrayImage::new(w, h, pixels).expect("clamped")
        } else {
            img
        }
    };
    let img = add_bias_field(&img, cfg.pressure_bias_amp, &mut rng);
    quantize(
        &add_noise(&img, cfg.pressure_noise_sigma, &mut rng),
        BitDepth::Sixteen,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::PoseLabel;
    use crate::synth::templates::template_for;

    fn cfg() -> GeneratorConfig {
        GeneratorConfig::default()
    }

    fn scene(i: Illumination, o: Occlusion) -> SceneCondition {
        SceneCondition::new(i, o)
    }

    #[test]
    fn background_dark_is_dimmer_than_bright() {
        let tpl = template_for(PoseLabel::Background);
        let c = cfg();
        let (bright, _) = render_scene(
            &tpl,
            scene(Illumination::Bright, Occlusion::Clear),
            View::Top,
            &c,
            7,
        );
        let (dark, _) = render_scene(
            &tpl,
            scene(Illumination::Dark, Occlusion::Clear),
            View::Top,
            &c,
            7,
        );
        assert!(dark.mean() < bright.mean());
    }

    #[test]
    fn mirror_pose_renders_mirror_image() {
        let mut c = cfg();
        c.noise_sigma = 0.0;
        c.depth_noise_sigma = 0.0;
        c.depth_bias_amp = 0.0;
        c.view_occluder_prob = 0.0;
        let s = scene(Illumination::Bright, Occlusion::Clear);
        let (rgb_l, depth_l) = render_scene(&template_for(PoseLabel::FetalL), s, View::Top, &c, 1);
        let (rgb_r, depth_r) = render_scene(&template_for(PoseLabel::FetalR), s, View::Top, &c, 1);
        assert_eq!(rgb_l.flipped_horizontal().pixels(), rgb_r.pixels());
        assert_eq!(depth_l.flipped_horizontal().pixels(), depth_r.pixels());
    }

    #[test]
    fn renders_are_bit_deterministic() {
        let tpl = template_for(PoseLabel::YearnerR);
        let c = cfg();
        let s = scene(Illumination::Medium, Occlusion::Blanket);
        let (a_rgb, a_depth) = render_scene(&tpl, s, View::Side, &c, 42);
        let (b_rgb, b_depth) = render_scene(&tpl, s, View::Side, &c, 42);
        assert_eq!(a_rgb.pixels(), b_rgb.pixels());
        assert_eq!(a_depth.pixels(), b_depth.pixels());
        let pa = render_pressure(&tpl, s, &c, 42);
        let pb = render_pressure(&tpl, s, &c, 42);
        assert_eq!(pa.pixels(), pb.pixels());
    }

    #[test]
    fn depth_ignores_illumination() {
        let tpl = template_for(PoseLabel::LogL);
        let c = cfg();
        let (_, depth_bright) = render_scene(
            &tpl,
            scene(Illumination::Bright, Occlusion::Pillow),
            View::Head,
            &c,
            9,
        );
        let (_, depth_dark) = render_scene(
            &tpl,
            scene(Illumination::Dark, Occlusion::Pillow),
            View::Head,
            &c,
            9,
        );
        assert_eq!(depth_bright.pixels(), depth_dark.pixels());
    }

    #[test]
    fn pressure_ignores_illumination() {
        let tpl = template_for(PoseLabel::SoldierU);
        let c = cfg();
        let a = render_pressure(&tpl, scene(Illumination::Bright, Occlusion::Clear), &c, 3);
        let b = render_pressure(&tpl, scene(Illumination::Dark, Occlusion::Clear), &c, 3);
        assert_eq!(a.pixels(), b.pixels());
    }

    #[test]
    fn background_pressure_is_near_zero() {
        let tpl = template_for(PoseLabel::Background);
        let c = cfg();
        let p = render_pressure(&tpl, scene(Illumination::Medium, Occlusion::Clear), &c, 5);
        // only sensor noise and drift remain on an empty bed
        assert!(p.mean() < 2.0 * (c.pressure_noise_sigma + c.pressure_bias_amp));
        let mut quiet = cfg();
        quiet.pressure_bias_amp = 0.0;
        let p = render_pressure(&tpl, scene(Illumination::Medium, Occlusion::Clear), &quiet, 5);
        assert!(p.mean() < 2.0 * quiet.pressure_noise_sigma);
    }

    #[test]
    fn pillow_attenuates_head_region_load() {
        let tpl = template_for(PoseLabel::SoldierU);
        let c = cfg();
        let clear = render_pressure(&tpl, scene(Illumination::Bright, Occlusion::Clear), &c, 6);
        let pillow = render_pressure(&tpl, scene(Illumination::Bright, Occlusion::Pillow), &c, 6);
        let (w, h) = c.image_size;
        let head_rows = (c.pillow_line_v * h as f64) as usize;
        let region_mean = |img: &GrayImage| {
            let mut s = 0.0;
            for y in 0..head_rows {
                for x in 0..w {
                    s += img.get(x, y);
                }
            }
            s / (head_rows * w) as f64
        };
        assert!(
            region_mean(&pillow) < region_mean(&clear),
            "pillow {} vs clear {}",
            region_mean(&pillow),
            region_mean(&clear)
        );
    }

    #[test]
    fn view_homographies_are_invertible_and_distinct() {
        for v in View::ALL {
            let h = view_homography(v, 160, 120);
            let inv = h.inverse().unwrap();
            let (x, y) = h.apply(80.0, 60.0).unwrap();
            let (bx, by) = inv.apply(x, y).unwrap();
            assert!((bx - 80.0).abs() < 1e-9);
            assert!((by - 60.0).abs() < 1e-9);
        }
        assert_ne!(
            view_homography(View::Side, 160, 120).matrix(),
            view_homography(View::Head, 160, 120).matrix()
        );
    }
}
