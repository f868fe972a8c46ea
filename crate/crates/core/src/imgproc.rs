//! Minimal grayscale image processing: homography warps onto the top-view
//! frame, bilinear resizing, range normalization and PGM (P5) persistence.

use std::io::{Read, Write};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("image dimensions must be positive, got {width}x{height}")]
    BadDimensions { width: usize, height: usize },
    #[error("pixel buffer has {got} values, expected {expected}")]
    BadBufferLength { got: usize, expected: usize },
    #[error("pixel value out of range or non-finite: {0}")]
    BadPixelValue(f64),
    #[error("homography is singular or cannot be normalized")]
    SingularHomography,
    #[error("unsupported PGM file: {0}")]
    BadFormat(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Row-major grayscale image with values in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self, ImageError> {
        if width == 0 || height == 0 {
            return Err(ImageError::BadDimensions { width, height });
        }
        if pixels.len() != width * height {
            return Err(ImageError::BadBufferLength {
                got: pixels.len(),
                expected: width * height,
            });
        }
        if let Some(&bad) = pixels
            .iter()
            .find(|v| !v.is_finite() || **v < 0.0 || **v > 1.0)
        {
            return Err(ImageError::BadPixelValue(bad));
        }
        Ok(GrayImage {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self, ImageError> {
        GrayImage::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self, ImageError> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        GrayImage::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.pixels[y * self.width + x]
    }

    pub fn mean(&self) -> f64 {
        self.pixels.iter().sum::<f64>() / self.pixels.len() as f64
    }

    /// Horizontal mirror (x -> width-1-x).
    pub fn flipped_horizontal(&self) -> GrayImage {
        let mut pixels = Vec::with_capacity(self.pixels.len());
        for y in 0..self.height {
            for x in 0..self.width {
                pixels.push(self.get(self.width - 1 - x, y));
            }
        }
        GrayImage {
            width: self.width,
            height: self.height,
            pixels,
        }
    }
}

/// 3x3 projective transform with h[2][2] normalized to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Homography {
    h: [[f64; 3]; 3],
}

const DET_TOL: f64 = 1e-12;

impl Homography {
    pub fn new(h: [[f64; 3]; 3]) -> Result<Self, ImageError> {
        if det3(&h).abs() <= DET_TOL || h[2][2].abs() <= DET_TOL {
            return Err(ImageError::SingularHomography);
        }
        let s = h[2][2];
        let mut n = h;
        for row in &mut n {
            for v in row {
                *v /= s;
            }
        }
        Ok(Homography { h: n })
    }

    pub fn identity() -> Self {
        Homography {
            h: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        }
    }

    pub fn translation(dx: f64, dy: f64) -> Self {
        Homography {
            h: [[1.0, 0.0, dx], [0.0, 1.0, dy], [0.0, 0.0, 1.0]],
        }
    }

    pub fn matrix(&self) -> &[[f64; 3]; 3] {
        &self.h
    }

    pub fn inverse(&self) -> Result<Homography, ImageError> {
        let inv = inv3(&self.h).ok_or(ImageError::SingularHomography)?;
        Homography::new(inv)
    }

    /// Apply to a point; returns None when the point maps to infinity.
    pub fn apply(&self, x: f64, y: f64) -> Option<(f64, f64)> {
        let w = self.h[2][0] * x + self.h[2][1] * y + self.h[2][2];
        if w.abs() <= DET_TOL {
            return None;
        }
        let u = (self.h[0][0] * x + self.h[0][1] * y + self.h[0][2]) / w;
        let v = (self.h[1][0] * x + self.h[1][1] * y + self.h[1][2]) / w;
        Some((u, v))
    }
}

fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn inv3(m: &[[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let d = det3(m);
    if d.abs() <= DET_TOL {
        return None;
    }
    let c = [
        [
            m[1][1] * m[2][2] - m[1][2] * m[2][1],
            m[0][2] * m[2][1] - m[0][1] * m[2][2],
            m[0][1] * m[1][2] - m[0][2] * m[1][1],
        ],
        [
            m[1][2] * m[2][0] - m[1][0] * m[2][2],
            m[0][0] * m[2][2] - m[0][2] * m[2][0],
            m[0][2] * m[1][0] - m[0][0] * m[1][2],
        ],
        [
            m[1][0] * m[2][1] - m[1][1] * m[2][0],
            m[0][1] * m[2][0] - m[0][0] * m[2][1],
            m[0][0] * m[1][1] - m[0][1] * m[1][0],
        ],
    ];
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = c[i][j] / d;
        }
    }
    Some(out)
}

/// Bilinear sample with zero outside the image.
fn sample_zero(img: &GrayImage, x: f64, y: f64) -> f64 {
    let x0 = x.floor();
    let y0 = y.floor();
    let fx = x - x0;
    let fy = y - y0;
    let x0 = x0 as i64;
    let y0 = y0 as i64;
    let at = |xi: i64, yi: i64| -> f64 {
        if xi < 0 || yi < 0 || xi >= img.width as i64 || yi >= img.height as i64 {
            0.0
        } else {
            img.pixels[yi as usize * img.width + xi as usize]
        }
    };
    let a = at(x0, y0) * (1.0 - fx) + at(x0 + 1, y0) * fx;
    let b = at(x0, y0 + 1) * (1.0 - fx) + at(x0 + 1, y0 + 1) * fx;
    a * (1.0 - fy) + b * fy
}

/// Bilinear sample clamped to the image border.
fn sample_clamped(img: &GrayImage, x: f64, y: f64) -> f64 {
    let x = x.clamp(0.0, (img.width - 1) as f64);
    let y = y.clamp(0.0, (img.height - 1) as f64);
    sample_zero(img, x, y)
}

/// Warp an image through a homography that maps source pixels to output
/// pixels. Output pixels are inverse-mapped and sampled bilinearly; samples
/// falling outside the source contribute zero.
pub fn warp(
    img: &GrayImage,
    h: &Homography,
    out_w: usize,
    out_h: usize,
) -> Result<GrayImage, ImageError> {
    let inv = h.inverse()?;
    let mut pixels = Vec::with_capacity(out_w * out_h);
    for y in 0..out_h {
        for x in 0..out_w {
            let v = match inv.apply(x as f64, y as f64) {
                Some((sx, sy)) => sample_zero(img, sx, sy),
                None => 0.0,
            };
            pixels.push(v.clamp(0.0, 1.0));
        }
    }
    GrayImage::new(out_w, out_h, pixels)
}

/// Bilinear resize with center-aligned sampling; border samples clamp so a
/// constant image stays constant.
pub fn resize(img: &GrayImage, out_w: usize, out_h: usize) -> Result<GrayImage, ImageError> {
    if out_w == 0 || out_h == 0 {
        return Err(ImageError::BadDimensions {
            width: out_w,
            height: out_h,
        });
    }
    if out_w == img.width && out_h == img.height {
        return Ok(img.clone());
    }
    let sx = img.width as f64 / out_w as f64;
    let sy = img.height as f64 / out_h as f64;
    let mut pixels = Vec::with_capacity(out_w * out_h);
    for y in 0..out_h {
        let src_y = (y as f64 + 0.5) * sy - 0.5;
        for x in 0..out_w {
            let src_x = (x as f64 + 0.5) * sx - 0.5;
            pixels.push(sample_clamped(img, src_x, src_y).clamp(0.0, 1.0));
        }
    }
    GrayImage::new(out_w, out_h, pixels)
}

/// Linearly rescale so min maps to 0 and max to 1; a flat image maps to zeros.
pub fn normalize_range(img: &GrayImage) -> GrayImage {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in img.pixels() {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let span = hi - lo;
    let pixels = if span <= 0.0 {
        vec![0.0; img.pixels.len()]
    } else {
        img.pixels
            .iter()
            .map(|&v| ((v - lo) / span).clamp(0.0, 1.0))
            .collect()
    };
    GrayImage {
        width: img.width,
        height: img.height,
        pixels,
    }
}

/// Separable Gaussian blur; sigma <= 0 returns the input unchanged.
pub fn gaussian_blur(img: &GrayImage, sigma: f64) -> GrayImage {
    if sigma <= 0.0 {
        return img.clone();
    }
    let radius = (3.0 * sigma).ceil() as i64;
    let mut kernel = Vec::with_capacity((2 * radius + 1) as usize);
    for i in -radius..=radius {
        kernel.push((-(i as f64).powi(2) / (2.0 * sigma * sigma)).exp());
    }
    let norm: f64 = kernel.iter().sum();
    for k in &mut kernel {
        *k /= norm;
    }

    let w = img.width as i64;
    let h = img.height as i64;
    let clamp_x = |x: i64| x.clamp(0, w - 1) as usize;
    let clamp_y = |y: i64| y.clamp(0, h - 1) as usize;

    let mut horiz = vec![0.0; img.pixels.len()];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (i, k) in kernel.iter().enumerate() {
                let xi = clamp_x(x + i as i64 - radius);
                acc += k * img.pixels[y as usize * img.width + xi];
            }
            horiz[y as usize * img.width + x as usize] = acc;
        }
    }
    let mut out = vec![0.0; img.pixels.len()];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (i, k) in kernel.iter().enumerate() {
                let yi = clamp_y(y + i as i64 - radius);
                acc += k * horiz[yi * img.width + x as usize];
            }
            out[y as usize * img.width + x as usize] = acc.clamp(0.0, 1.0);
        }
    }
    GrayImage {
        width: img.width,
        height: img.height,
        pixels: out,
    }
}

/// PGM sample depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BitDepth {
    Eight,
    Sixteen,
}

impl BitDepth {
    pub fn max_value(self) -> u32 {
        match self {
            BitDepth::Eight => 255,
            BitDepth::Sixteen => 65535,
        }
    }
}

/// Snap pixel values onto the quantization lattice of the given depth, so a
/// later PGM round trip is exact.
pub fn quantize(img: &GrayImage, depth: BitDepth) -> GrayImage {
    let maxv = depth.max_value() as f64;
    let pixels = img
        .pixels
        .iter()
        .map(|&v| (v.clamp(0.0, 1.0) * maxv).round() / maxv)
        .collect();
    GrayImage {
        width: img.width,
        height: img.height,
        pixels,
    }
}

/// Write a binary PGM (P5). 16-bit samples are big-endian per the format.
pub fn write_pgm(img: &GrayImage, depth: BitDepth, path: &Path) -> Result<(), ImageError> {
    let maxv = depth.max_value();
    let mut buf = Vec::with_capacity(img.pixels.len() * 2 + 32);
    buf.extend_from_slice(format!("P5\n{} {}\n{}\n", img.width, img.height, maxv).as_bytes());
    for &v in img.pixels() {
        let q = (v.clamp(0.0, 1.0) * maxv as f64).round() as u32;
        match depth {
            BitDepth::Eight => buf.push(q as u8),
            BitDepth::Sixteen => buf.extend_from_slice(&(q as u16).to_be_bytes()),
        }
    }
    let mut file = std::fs::File::create(path)?;
    file.write_all(&buf)?;
    Ok(())
}

/// Read a binary PGM (P5), 8- or 16-bit.
pub fn read_pgm(path: &Path) -> Result<GrayImage, ImageError> {
    let mut raw = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut raw)?;
    parse_pgm(&raw)
}

pub fn parse_pgm(raw: &[u8]) -> Result<GrayImage, ImageError> {
    let mut pos = 0usize;
    let mut next_token = |raw: &[u8]| -> Result<String, ImageError> {
        // skip whitespace and '#' comments
        loop {
            while pos < raw.len() && raw[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < raw.len() && raw[pos] == b'#' {
                while pos < raw.len() && raw[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                break;
            }
        }
        let start = pos;
        while pos < raw.len() && !raw[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(ImageError::BadFormat("truncated header".into()));
        }
        Ok(String::from_utf8_lossy(&raw[start..pos]).into_owned())
    };

    let magic = next_token(raw)?;
    if magic != "P5" {
        return Err(ImageError::BadFormat(format!("magic {magic:?}")));
    }
    let width: usize = next_token(raw)?
        .parse()
        .map_err(|_| ImageError::BadFormat("bad width".into()))?;
    let height: usize = next_token(raw)?
        .parse()
        .map_err(|_| ImageError::BadFormat("bad height".into()))?;
    let maxv: u32 = next_token(raw)?
        .parse()
        .map_err(|_| ImageError::BadFormat("bad maxval".into()))?;
    if maxv == 0 || maxv > 65535 {
        return Err(ImageError::BadFormat(format!("maxval {maxv}")));
    }
    // single whitespace byte after maxval
    pos += 1;
    let wide = maxv > 255;
    let stride = if wide { 2 } else { 1 };
    let need = width * height * stride;
    if raw.len() < pos + need {
        return Err(ImageError::BadFormat("truncated pixel data".into()));
    }
    let data = &raw[pos..pos + need];
    let maxf = maxv as f64;
    let pixels: Vec<f64> = if wide {
        data.chunks_exact(2)
            .map(|c| (u16::from_be_bytes([c[0], c[1]]) as f64 / maxf).min(1.0))
            .collect()
    } else {
        data.iter().map(|&b| b as f64 / maxf).collect()
    };
    GrayImage::new(width, height, pixels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn noise_image(w: usize, h: usize, seed: u64) -> GrayImage {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        GrayImage::from_fn(w, h, |_, _| rng.gen::<f64>()).unwrap()
    }

    /// Smooth test pattern so interpolation error stays small.
    fn smooth_image(w: usize, h: usize) -> GrayImage {
        GrayImage::from_fn(w, h, |x, y| {
            let u = x as f64 / w as f64;
            let v = y as f64 / h as f64;
            0.5 + 0.4 * (2.0 * std::f64::consts::PI * u).sin() * (2.0 * std::f64::consts::PI * v).cos()
        })
        .unwrap()
    }

    #[test]
    fn identity_warp_is_identity() {
        let img = noise_image(24, 18, 1);
        let out = warp(&img, &Homography::identity(), 24, 18).unwrap();
        for (a, b) in img.pixels().iter().zip(out.pixels()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn translation_shifts_bright_pixel() {
        let mut pixels = vec![0.0; 9 * 9];
        pixels[4 * 9 + 4] = 1.0;
        let img = GrayImage::new(9, 9, pixels).unwrap();
        let out = warp(&img, &Homography::translation(1.0, 0.0), 9, 9).unwrap();
        assert!((out.get(5, 4) - 1.0).abs() < 1e-12);
        assert!(out.get(4, 4).abs() < 1e-12);
    }

    #[test]
    fn warp_round_trip_small_error_in_interior() {
        let img = smooth_image(64, 64);
        let h = Homography::new([
            [0.95, 0.08, 2.0],
            [-0.05, 0.92, 3.0],
            [2e-4, 1e-4, 1.0],
        ])
        .unwrap();
        let fwd = warp(&img, &h, 64, 64).unwrap();
        let back = warp(&fwd, &h.inverse().unwrap(), 64, 64).unwrap();
        let mut max_err: f64 = 0.0;
        for y in 8..56 {
            for x in 8..56 {
                max_err = max_err.max((back.get(x, y) - img.get(x, y)).abs());
            }
        }
        assert!(max_err < 0.05, "round-trip error {max_err}");
    }

    #[test]
    fn singular_homography_rejected() {
        let h = [[1.0, 2.0, 0.0], [2.0, 4.0, 0.0], [0.0, 0.0, 1.0]];
        assert!(matches!(
            Homography::new(h),
            Err(ImageError::SingularHomography)
        ));
    }

    #[test]
    fn resize_preserves_constant() {
        let img = GrayImage::filled(17, 9, 0.5).unwrap();
        let out = resize(&img, 40, 23).unwrap();
        assert!(out.pixels().iter().all(|&v| (v - 0.5).abs() < 1e-12));
    }

    #[test]
    fn resize_checkerboard_corners_keep_values() {
        let img = GrayImage::new(2, 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let out = resize(&img, 4, 4).unwrap();
        assert!((out.get(0, 0) - 1.0).abs() < 1e-12);
        assert!((out.get(3, 0) - 0.0).abs() < 1e-12);
        assert!((out.get(0, 3) - 0.0).abs() < 1e-12);
        assert!((out.get(3, 3) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn downsample_preserves_noise_mean() {
        let img = noise_image(64, 64, 9);
        let out = resize(&img, 32, 32).unwrap();
        assert!((out.mean() - img.mean()).abs() < 0.02);
    }

    #[test]
    fn normalize_range_affine() {
        let img = GrayImage::new(2, 1, vec![2.0 / 255.0, 4.0 / 255.0]).unwrap();
        let out = normalize_range(&img);
        assert!((out.get(0, 0) - 0.0).abs() < 1e-12);
        assert!((out.get(1, 0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn normalize_range_flat_is_zero() {
        let img = GrayImage::filled(5, 5, 0.7).unwrap();
        let out = normalize_range(&img);
        assert!(out.pixels().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn normalize_range_full_span_fixed_point() {
        let img = GrayImage::new(3, 1, vec![0.0, 0.25, 1.0]).unwrap();
        let out = normalize_range(&img);
        for (a, b) in img.pixels().iter().zip(out.pixels()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn warp_resize_stay_in_unit_range() {
        let img = noise_image(31, 27, 4);
        let h = Homography::new([
            [1.1, 0.1, -3.0],
            [0.0, 0.9, 1.5],
            [1e-4, -2e-4, 1.0],
        ])
        .unwrap();
        for v in warp(&img, &h, 40, 40).unwrap().pixels() {
            assert!((0.0..=1.0).contains(v));
        }
        for v in resize(&img, 13, 50).unwrap().pixels() {
            assert!((0.0..=1.0).contains(v));
        }
    }

    #[test]
    fn pgm_round_trip_both_depths() {
        let dir = tempfile::tempdir().unwrap();
        for depth in [BitDepth::Eight, BitDepth::Sixteen] {
            let img = quantize(&noise_image(19, 7, 2), depth);
            let path = dir.path().join(format!("t{}.pgm", depth.max_value()));
            write_pgm(&img, depth, &path).unwrap();
            let back = read_pgm(&path).unwrap();
            assert_eq!(back.width(), 19);
            assert_eq!(back.height(), 7);
            for (a, b) in img.pixels().iter().zip(back.pixels()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn pgm_rejects_garbage() {
        assert!(parse_pgm(b"P6\n2 2\n255\n....").is_err());
        assert!(parse_pgm(b"P5\n4 4\n255\nxx").is_err());
    }

    #[test]
    fn blur_preserves_constant_and_range() {
        let img = GrayImage::filled(12, 12, 0.4).unwrap();
        let out = gaussian_blur(&img, 1.5);
        assert!(out.pixels().iter().all(|&v| (v - 0.4).abs() < 1e-9));
        let noisy = noise_image(20, 20, 3);
        for v in gaussian_blur(&noisy, 2.0).pixels() {
            assert!((0.0..=1.0).contains(v));
        }
    }
}
