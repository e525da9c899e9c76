//! Minimal raster plotter for quick looks; publication plotting is
//! external.

use image::{Rgb, RgbImage};
use qpf_core::GraphSample;

const W: u32 = 1600;
const H: u32 = 1000;
const MARGIN: u32 = 40;
const BG: Rgb<u8> = Rgb([255, 255, 255]);
const FRAME: Rgb<u8> = Rgb([180, 180, 180]);
const RED: Rgb<u8> = Rgb([220, 50, 47]);
const BLUE: Rgb<u8> = Rgb([38, 139, 210]);

/// Scatter of attractor (red) over repeller (blue), theta horizontal.
pub fn render_graphs(attractor: &GraphSample, repeller: &GraphSample) -> RgbImage {
    let mut img = RgbImage::from_pixel(W, H, BG);
    for x in MARGIN..(W - MARGIN) {
        img.put_pixel(x, MARGIN, FRAME);
        img.put_pixel(x, H - MARGIN, FRAME);
    }
    for y in MARGIN..(H - MARGIN) {
        img.put_pixel(MARGIN, y, FRAME);
        img.put_pixel(W - MARGIN, y, FRAME);
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in attractor.values.iter().chain(repeller.values.iter()) {
        if v.is_finite() {
            lo = lo.min(*v);
            hi = hi.max(*v);
        }
    }
    if !(lo.is_finite() && hi.is_finite()) {
        return img;
    }
    let pad = 0.05 * (hi - lo).max(1e-12);
    let (lo, hi) = (lo - pad, hi + pad);
    let mut draw = |graph: &GraphSample, color: Rgb<u8>| {
        for i in 0..graph.grid_size {
            let v = graph.values[i];
            if !v.is_finite() {
                continue;
            }
            let px = MARGIN as f64
                + graph.theta(i) * (W - 2 * MARGIN) as f64;
            let py = (H - MARGIN) as f64 - (v - lo) / (hi - lo) * (H - 2 * MARGIN) as f64;
            let (px, py) = (px as u32, py as u32);
            if px < W && py < H {
                img.put_pixel(px, py, color);
            }
        }
    };
    draw(repeller, BLUE);
    draw(attractor, RED);
    img
}

pub fn save_png(
    img: &RgbImage,
    dir: &std::path::Path,
    name: &str,
) -> Result<(), image::ImageError> {
    std::fs::create_dir_all(dir).map_err(image::ImageError::IoError)?;
    img.save_with_format(dir.join(name), image::ImageFormat::Png)
}
