//! Feature extractors: oriented-gradient histograms for RGB and raw
//! geometric moments for depth and pressure maps.

use crate::domain::{Channel, FeatureVector, Modality};
use crate::imgproc::{resize, GrayImage, ImageError};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("work size {w}x{h} is not divisible by cell size {cell}")]
    ConfigMismatch { w: usize, h: usize, cell: usize },
    #[error("image {w}x{h} too small for a {rows}x{cols} tile grid")]
    ImageTooSmall {
        w: usize,
        h: usize,
        rows: usize,
        cols: usize,
    },
    #[error("no images to extract from")]
    EmptyInput,
    #[error(transparent)]
    Image(#[from] ImageError),
}

/// Oriented-gradient histogram parameters. The defaults give a 5776-element
/// descriptor: a 320x320 working image with 16 px cells makes a 20x20 cell
/// grid, and overlapping 2x2-cell blocks at 1-cell stride give
/// 19*19*4*4 = 5776 values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HogConfig {
    pub n_orientations: usize,
    pub cell_px: usize,
    pub block_cells: usize,
    pub block_stride_cells: usize,
    pub work_size: (usize, usize),
}

impl Default for HogConfig {
    fn default() -> Self {
        HogConfig {
            n_orientations: 4,
            cell_px: 16,
            block_cells: 2,
            block_stride_cells: 1,
            work_size: (320, 320),
        }
    }
}

impl HogConfig {
    fn cells(&self) -> Result<(usize, usize), FeatureError> {
        let (w, h) = self.work_size;
        if w == 0 || h == 0 || self.cell_px == 0 || w % self.cell_px != 0 || h % self.cell_px != 0 {
            return Err(FeatureError::ConfigMismatch {
                w,
                h,
                cell: self.cell_px,
            });
        }
        Ok((w / self.cell_px, h / self.cell_px))
    }

    fn blocks(&self) -> Result<(usize, usize), FeatureError> {
        let (cx, cy) = self.cells()?;
        let stride = self.block_stride_cells.max(1);
        if cx < self.block_cells || cy < self.block_cells {
            return Err(FeatureError::ConfigMismatch {
                w: cx,
                h: cy,
                cell: self.block_cells,
            });
        }
        Ok((
            (cx - self.block_cells) / stride + 1,
            (cy - self.block_cells) / stride + 1,
        ))
    }

    /// Descriptor length implied by the configuration alone.
    pub fn descriptor_len(&self) -> Result<usize, FeatureError> {
        let (bx, by) = self.blocks()?;
        Ok(bx * by * self.block_cells * self.block_cells * self.n_orientations)
    }
}

/// Tiled raw-moment parameters. Defaults: a 6x6 grid with all moments of
/// total order <= 3 gives 36 * 10 = 360 values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GmomConfig {
    pub tile_rows: usize,
    pub tile_cols: usize,
    pub max_order: usize,
}

impl Default for GmomConfig {
    fn default() -> Self {
        GmomConfig {
            tile_rows: 6,
            tile_cols: 6,
            max_order: 3,
        }
    }
}

impl GmomConfig {
    /// Exponent pairs (p, q) with p + q <= max_order, p-major.
    pub fn moment_orders(&self) -> Vec<(usize, usize)> {
        let mut orders = Vec::new();
        for p in 0..=self.max_order {
            for q in 0..=(self.max_order - p) {
                orders.push((p, q));
            }
        }
        orders
    }

    pub fn descriptor_len(&self) -> usize {
        self.tile_rows * self.tile_cols * self.moment_orders().len()
    }
}

const BLOCK_NORM_EPS: f64 = 1e-6;

/// Oriented-gradient histogram descriptor of a grayscale image.
///
/// The image is resized to the working size, centered differences give the
/// gradient, unsigned orientation over [0, 180) is binned with magnitude
/// voting, cell histograms are grouped into overlapping blocks and each
/// block is L2-normalized before concatenation (row-major blocks).
pub fn hog(img: &GrayImage, cfg: &HogConfig) -> Result<Vec<f64>, FeatureError> {
    let (cells_x, cells_y) = cfg.cells()?;
    let (blocks_x, blocks_y) = cfg.blocks()?;
    let (w, h) = cfg.work_size;
    let work = resize(img, w, h)?;
    let px = work.pixels();

    // per-cell orientation histograms
    let nbins = cfg.n_orientations;
    let mut cells = vec![0.0f64; cells_x * cells_y * nbins];
    let clamp = |v: i64, hi: usize| v.clamp(0, hi as i64 - 1) as usize;
    for y in 0..h {
        for x in 0..w {
            let gx = px[y * w + clamp(x as i64 + 1, w)] - px[y * w + clamp(x as i64 - 1, w)];
            let gy = px[clamp(y as i64 + 1, h) * w + x] - px[clamp(y as i64 - 1, h) * w + x];
            let mag = (gx * gx + gy * gy).sqrt();
            if mag == 0.0 {
                continue;
            }
            let mut theta = gy.atan2(gx);
            if theta < 0.0 {
                theta += std::f64::consts::PI;
            }
            if theta >= std::f64::consts::PI {
                theta -= std::f64::consts::PI;
            }
            let bin = ((theta / std::f64::consts::PI) * nbins as f64) as usize;
            let bin = bin.min(nbins - 1);
            let cell = (y / cfg.cell_px) * cells_x + (x / cfg.cell_px);
            cells[cell * nbins + bin] += mag;
        }
    }

    // overlapping blocks, L2-normalized
    let stride = cfg.block_stride_cells.max(1);
    let block_len = cfg.block_cells * cfg.block_cells * nbins;
    let mut out = Vec::with_capacity(blocks_x * blocks_y * block_len);
    for by in 0..blocks_y {
        for bx in 0..blocks_x {
            let start = out.len();
            for cy in 0..cfg.block_cells {
                for cx in 0..cfg.block_cells {
                    let cell = (by * stride + cy) * cells_x + (bx * stride + cx);
                    out.extend_from_slice(&cells[cell * nbins..(cell + 1) * nbins]);
                }
            }
            let norm =
                (out[start..].iter().map(|v| v * v).sum::<f64>() + BLOCK_NORM_EPS.powi(2)).sqrt();
            for v in &mut out[start..] {
                *v /= norm;
            }
        }
    }
    Ok(out)
}

/// Tiled raw spatial moments of a grayscale image.
///
/// The image is split into a row-major tile grid (remainder pixels assigned
/// to the last row/column of tiles); each tile contributes raw moments
/// m_pq = sum x^p y^q I(x,y) over tile-local coordinates scaled by the tile
/// dimensions, for all p + q <= max_order.
pub fn gmom(img: &GrayImage, cfg: &GmomConfig) -> Result<Vec<f64>, FeatureError> {
    let (w, h) = (img.width(), img.height());
    let (rows, cols) = (cfg.tile_rows, cfg.tile_cols);
    if rows == 0 || cols == 0 || h < rows || w < cols {
        return Err(FeatureError::ImageTooSmall { w, h, rows, cols });
    }
    let orders = cfg.moment_orders();
    let base_h = h / rows;
    let base_w = w / cols;
    let mut out = Vec::with_capacity(rows * cols * orders.len());
    for tr in 0..rows {
        let y0 = tr * base_h;
        let y1 = if tr + 1 == rows { h } else { y0 + base_h };
        for tc in 0..cols {
            let x0 = tc * base_w;
            let x1 = if tc + 1 == cols { w } else { x0 + base_w };
            let tw = (x1 - x0) as f64;
            let th = (y1 - y0) as f64;
            let mut moments = vec![0.0f64; orders.len()];
            for y in y0..y1 {
                let yn = (y - y0) as f64 / th;
                for x in x0..x1 {
                    let v = img.get(x, y);
                    if v == 0.0 {
                        continue;
                    }
                    let xn = (x - x0) as f64 / tw;
                    for (k, &(p, q)) in orders.iter().enumerate() {
                        moments[k] += xn.powi(p as i32) * yn.powi(q as i32) * v;
                    }
                }
            }
            out.extend_from_slice(&moments);
        }
    }
    Ok(out)
}

/// Run the per-modality extractor over a set of channel images: gradient
/// histograms for RGB, tiled moments for depth and pressure.
pub fn extract_all(
    images: &BTreeMap<Channel, GrayImage>,
    hog_cfg: &HogConfig,
    gmom_cfg: &GmomConfig,
) -> Result<BTreeMap<Channel, FeatureVector>, FeatureError> {
    if images.is_empty() {
        return Err(FeatureError::EmptyInput);
    }
    let mut out = BTreeMap::new();
    for (&channel, img) in images {
        let values = match channel.modality {
            Modality::Rgb => hog(img, hog_cfg)?,
            Modality::Depth | Modality::Pressure => gmom(img, gmom_cfg)?,
        };
        let fv = FeatureVector::new(values, channel)
            .expect("extractors produce finite values");
        out.insert(channel, fv);
    }
    Ok(out)
}

/// Descriptor length for a channel under the given configs.
pub fn descriptor_len(
    channel: Channel,
    hog_cfg: &HogConfig,
    gmom_cfg: &GmomConfig,
) -> Result<usize, FeatureError> {
    match channel.modality {
        Modality::Rgb => hog_cfg.descriptor_len(),
        Modality::Depth | Modality::Pressure => Ok(gmom_cfg.descriptor_len()),
    }
}
