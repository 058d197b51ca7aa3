//! Motif image buffer and the base → pixel painting loop.

use super::{base_color, MotifGeometry, Rgb};

/// RGB8 image, row-major interleaved.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MotifImage {
    width: u32,
    height: u32,
    data: Vec<u8>,
    /// Accession of the sequence this image was painted from.
    pub source_accession: String,
}

impl MotifImage {
    /// All-white canvas.
    pub fn blank(width: u32, height: u32, accession: &str) -> Self {
        MotifImage {
            width,
            height,
            data: vec![255; width as usize * height as usize * 3],
            source_accession: accession.to_string(),
        }
    }

    pub fn from_rgb_bytes(width: u32, height: u32, data: Vec<u8>, accession: &str) -> Option<Self> {
        if data.len() != width as usize * height as usize * 3 {
            return None;
        }
        Some(MotifImage {
            width,
            height,
            data,
            source_accession: accession.to_string(),
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixel(&self, x: u32, y: u32) -> Rgb {
        let i = self.index(x, y);
        Rgb::new(self.data[i], self.data[i + 1], self.data[i + 2])
    }

    pub fn set_pixel(&mut self, x: u32, y: u32, color: Rgb) {
        let i = self.index(x, y);
        self.data[i] = color.r;
        self.data[i + 1] = color.g;
        self.data[i + 2] = color.b;
    }

    pub fn rgb_bytes(&self) -> &[u8] {
        &self.data
    }

    fn index(&self, x: u32, y: u32) -> usize {
        assert!(x < self.width && y < self.height, "pixel ({x}, {y}) out of bounds");
        (y as usize * self.width as usize + x as usize) * 3
    }
}

/// Precomputed pixel visit order for a geometry. Build once, share across
/// records; the order is immutable after construction.
pub struct FillOrder {
    pub geometry: MotifGeometry,
    pixels: Vec<(i32, i32)>,
}

impl FillOrder {
    pub fn new(geometry: MotifGeometry) -> Self {
        let pixels = geometry.fill_order();
        FillOrder { geometry, pixels }
    }

    pub fn capacity(&self) -> usize {
        self.pixels.len()
    }

    pub fn pixels(&self) -> &[(i32, i32)] {
        &self.pixels
    }
}

pub struct RasterizedMotif {
    pub image: MotifImage,
    /// Bases that did not fit in the motif (reported, never an error).
    pub truncated: usize,
}

/// Paint `bases` into a fresh canvas following `order`. Bases beyond the
/// capacity are dropped and counted; unused pixels stay white.
pub fn rasterize_with_order(bases: &str, order: &FillOrder, accession: &str) -> RasterizedMotif {
    let g = &order.geometry;
    let mut image = MotifImage::blank(g.width, g.height, accession);
    let mut painted = 0usize;
    for (base, &(x, y)) in bases.chars().zip(order.pixels()) {
        image.set_pixel(x as u32, y as u32, base_color(base));
        painted += 1;
    }
    RasterizedMotif {
        image,
        truncated: bases.chars().count().saturating_sub(painted),
    }
}

/// One-off rasterization; computes the fill order on the fly.
pub fn rasterize(bases: &str, geometry: &MotifGeometry, accession: &str) -> RasterizedMotif {
    rasterize_with_order(bases, &FillOrder::new(*geometry), accession)
}
