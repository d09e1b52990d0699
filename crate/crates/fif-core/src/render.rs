//! Rasterizing point clouds into portable pixmap images.
//!
//! Output is binary PPM (P6, maxval 255): a trivial format that any image
//! tool can convert, with no encoder dependency and bit-reproducible bytes.

use crate::error::{Error, Result};

/// Largest allowed image side length in pixels.
pub const MAX_IMAGE_SIDE: usize = 16_384;

/// Axis-aligned view rectangle paired with the output size in pixels.
/// Row 0 of the image is the top of the rectangle, so y increases upward
/// in data space and downward in pixel space.
#[derive(Debug, Clone, Copy)]
pub struct Window {
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
    pub width: usize,
    pub height: usize,
}

impl Window {
    pub fn new(
        x_lo: f64,
        x_hi: f64,
        y_lo: f64,
        y_hi: f64,
        width: usize,
        height: usize,
    ) -> Result<Self> {
        let finite = x_lo.is_finite() && x_hi.is_finite() && y_lo.is_finite() && y_hi.is_finite();
        if !finite || x_lo >= x_hi || y_lo >= y_hi {
            return Err(Error::WindowDegenerate(format!(
                "view rectangle [{x_lo}, {x_hi}] x [{y_lo}, {y_hi}] must have positive extent"
            )));
        }
        if width == 0 || height == 0 || width > MAX_IMAGE_SIDE || height > MAX_IMAGE_SIDE {
            return Err(Error::WindowDegenerate(format!(
                "image size {width}x{height} outside 1..={MAX_IMAGE_SIDE} per side"
            )));
        }
        Ok(Window {
            x_lo,
            x_hi,
            y_lo,
            y_hi,
            width,
            height,
        })
    }

    /// Window hugging the clouds' bounding box with a five percent margin.
    /// Axes with no extent get a half-unit margin so single points and
    /// horizontal graphs still render.
    pub fn fit(clouds: &[Vec<(f64, f64)>], width: usize, height: usize) -> Result<Self> {
        let mut bb = (
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
        );
        for &(x, y) in clouds.iter().flatten() {
            bb.0 = bb.0.min(x);
            bb.1 = bb.1.max(x);
            bb.2 = bb.2.min(y);
            bb.3 = bb.3.max(y);
        }
        if bb.0 > bb.1 {
            return Err(Error::EmptyCloud);
        }
        let pad = |lo: f64, hi: f64| {
            let m = 0.05 * (hi - lo);
            if m > 0.0 {
                (lo - m, hi + m)
            } else {
                (lo - 0.5, hi + 0.5)
            }
        };
        let (x_lo, x_hi) = pad(bb.0, bb.1);
        let (y_lo, y_hi) = pad(bb.2, bb.3);
        Window::new(x_lo, x_hi, y_lo, y_hi, width, height)
    }

    /// Pixel (column, row) under this window, or None when the point falls
    /// outside the rectangle. The comparison also drops NaN coordinates.
    fn pixel(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        if !(x >= self.x_lo && x <= self.x_hi && y >= self.y_lo && y <= self.y_hi) {
            return None;
        }
        let fx = (x - self.x_lo) / (self.x_hi - self.x_lo);
        let fy = (y - self.y_lo) / (self.y_hi - self.y_lo);
        let px = ((fx * self.width as f64) as usize).min(self.width - 1);
        let py = ((fy * self.height as f64) as usize).min(self.height - 1);
        Some((px, self.height - 1 - py))
    }
}

fn hsv_rgb(h: f64, s: f64, v: f64) -> [u8; 3] {
    let h6 = ((h % 1.0) + 1.0) % 1.0 * 6.0;
    let f = h6 - h6.floor();
    let p = v * (1.0 - s);
    let q = v * (1.0 - s * f);
    let t = v * (1.0 - s * (1.0 - f));
    let (r, g, b) = match h6 as usize % 6 {
        0 => (v, t, p),
        1 => (q, v, p),
        2 => (p, v, t),
        3 => (p, q, v),
        4 => (t, p, v),
        _ => (v, p, q),
    };
    let byte = |c: f64| (c * 255.0).round() as u8;
    [byte(r), byte(g), byte(b)]
}

/// Evenly spaced saturated hues, dark enough to read on white.
pub fn palette(count: usize) -> Vec<[u8; 3]> {
    (0..count)
        .map(|i| hsv_rgb(i as f64 / count.max(1) as f64, 0.85, 0.75))
        .collect()
}

/// Draws each cloud in its palette colour over a white background and
/// returns the finished PPM bytes (`P6`, maxval 255). Points outside the
/// window are clipped; later clouds overdraw earlier ones where they share
/// a pixel. Identical inputs produce identical bytes.
pub fn rasterize(clouds: &[Vec<(f64, f64)>], window: &Window) -> Vec<u8> {
    let colors = palette(clouds.len());
    let mut img = vec![255u8; window.width * window.height * 3];
    for (cloud, color) in clouds.iter().zip(&colors) {
        for &(x, y) in cloud {
            if let Some((px, py)) = window.pixel(x, y) {
                let at = (py * window.width + px) * 3;
                img[at..at + 3].copy_from_slice(color);
            }
        }
    }
    let mut out = format!("P6\n{} {}\n255\n", window.width, window.height).into_bytes();
    out.append(&mut img);
    out
}
