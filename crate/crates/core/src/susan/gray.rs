//! Grayscale image buffer and RGB → luma conversion.

use crate::rasterizer::{luma, MotifImage, Rgb};

/// 8-bit grayscale image, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrayImage {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
    /// Identifier carried along from the source image.
    pub provenance: String,
}

impl GrayImage {
    pub fn new(width: u32, height: u32, pixels: Vec<u8>, provenance: &str) -> Option<Self> {
        if pixels.len() != width as usize * height as usize {
            return None;
        }
        Some(GrayImage {
            width,
            height,
            pixels,
            provenance: provenance.to_string(),
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }
}

/// Rec. 601 luma conversion of an RGB motif.
pub fn to_grayscale(image: &MotifImage) -> GrayImage {
    let pixels = image
        .rgb_bytes()
        .chunks_exact(3)
        .map(|px| luma(Rgb::new(px[0], px[1], px[2])))
        .collect();
    GrayImage {
        width: image.width(),
        height: image.height(),
        pixels,
        provenance: image.source_accession.clone(),
    }
}

/// Wrap interleaved RGB bytes (e.g. from a decoded PNG) as grayscale.
pub fn gray_from_bytes(
    width: u32,
    height: u32,
    rgb: &[u8],
    provenance: &str,
) -> Option<GrayImage> {
    if rgb.len() != width as usize * height as usize * 3 {
        return None;
    }
    let pixels = rgb
        .chunks_exact(3)
        .map(|px| luma(Rgb::new(px[0], px[1], px[2])))
        .collect();
    GrayImage::new(width, height, pixels, provenance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rasterizer::{rasterize, FillMode, MotifGeometry};

    #[test]
    fn motif_lumas() {
        let g = MotifGeometry::new(8, 8, (4, 4), 2, FillMode::Rings).unwrap();
        let out = rasterize("ACGTN", &g, "acc");
        let gray = to_grayscale(&out.image);
        assert_eq!(gray.get(4, 4), 226); // A
        assert_eq!(gray.get(5, 4), 29); // C
        assert_eq!(gray.get(4, 5), 150); // G
        assert_eq!(gray.get(3, 4), 76); // T
        assert_eq!(gray.get(4, 3), 0); // N
        assert_eq!(gray.get(0, 0), 255); // background
        assert_eq!(gray.provenance, "acc");
    }

    #[test]
    fn byte_wrapper_matches_motif_conversion() {
        let g = MotifGeometry::new(8, 8, (4, 4), 2, FillMode::Disk).unwrap();
        let out = rasterize(&"GATTACA".repeat(4), &g, "acc");
        let direct = to_grayscale(&out.image);
        let via_bytes = gray_from_bytes(8, 8, out.image.rgb_bytes(), "acc").unwrap();
        assert_eq!(direct, via_bytes);
    }
}
