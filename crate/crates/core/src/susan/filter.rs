//! The edge filter itself: USAN areas, responses, and quantized output.

use super::{GrayImage, OutputMode, SusanParams, MASK_OFFSETS};

/// 8-bit single-channel edge image.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FilteredImage {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
    pub provenance: String,
}

impl FilteredImage {
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

/// USAN area at one pixel: similarity of every in-bounds mask pixel to the
/// nucleus, summed in mask order. The nucleus contributes 1.
pub fn usan_area(gray: &GrayImage, x: u32, y: u32, params: &SusanParams) -> f64 {
    let (w, h) = (gray.width() as i32, gray.height() as i32);
    let nucleus = gray.get(x, y) as f64;
    let mut n = 0.0;
    for &(dx, dy) in &MASK_OFFSETS {
        let (px, py) = (x as i32 + dx, y as i32 + dy);
        if px < 0 || py < 0 || px >= w || py >= h {
            continue;
        }
        let diff = gray.get(px as u32, py as u32) as f64 - nucleus;
        n += params.similarity_score(diff);
    }
    n
}

/// Raw edge response R = max(g − n, 0) for every pixel, row-major.
///
/// Brightness differences are integers in [−255, 255], so similarity scores
/// come from a 511-entry table; the result is bit-identical to calling
/// [`usan_area`] per pixel because the same expression is evaluated on the
/// same inputs and summed in the same order.
pub fn susan_response(gray: &GrayImage, params: &SusanParams) -> Vec<f64> {
    let mut table = [0.0f64; 511];
    for (i, slot) in table.iter_mut().enumerate() {
        *slot = params.similarity_score(i as f64 - 255.0);
    }

    let (w, h) = (gray.width() as usize, gray.height() as usize);
    let pixels = gray.pixels();
    let g = params.geometric_threshold;
    let mut out = vec![0.0f64; w * h];

    for y in 0..h {
        for x in 0..w {
            let nucleus = pixels[y * w + x] as i32;
            let mut n = 0.0;
            if x >= 3 && y >= 3 && x + 3 < w && y + 3 < h {
                for &(dx, dy) in &MASK_OFFSETS {
                    let px = (x as i32 + dx) as usize;
                    let py = (y as i32 + dy) as usize;
                    let diff = pixels[py * w + px] as i32 - nucleus;
                    n += table[(diff + 255) as usize];
                }
            } else {
                for &(dx, dy) in &MASK_OFFSETS {
                    let px = x as i32 + dx;
                    let py = y as i32 + dy;
                    if px < 0 || py < 0 || px >= w as i32 || py >= h as i32 {
                        continue;
                    }
                    let diff = pixels[py as usize * w + px as usize] as i32 - nucleus;
                    n += table[(diff + 255) as usize];
                }
            }
            if n < g {
                out[y * w + x] = g - n;
            }
        }
    }
    out
}

/// Run the filter and quantize. Graded mode scales the response to 0..=255
/// against g; binary mode emits 255 wherever the response is positive.
pub fn susan_edges(gray: &GrayImage, params: &SusanParams) -> FilteredImage {
    let response = susan_response(gray, params);
    let g = params.geometric_threshold;
    let pixels = response
        .iter()
        .map(|&r| match params.output_mode {
            OutputMode::Graded => (r * 255.0 / g).round().min(255.0) as u8,
            OutputMode::Binary => {
                if r > 0.0 {
                    255
                } else {
                    0
                }
            }
        })
        .collect();
    FilteredImage {
        width: gray.width(),
        height: gray.height(),
        pixels,
        provenance: gray.provenance.clone(),
    }
}

/// Stack the single channel three times: interleaved RGB bytes with
/// identical channels, ready for 3-channel consumers.
pub fn replicate_channels(filtered: &FilteredImage) -> Vec<u8> {
    filtered
        .pixels()
        .iter()
        .flat_map(|&v| [v, v, v])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::susan::Similarity;

    fn gray_of(width: u32, height: u32, pixels: Vec<u8>) -> GrayImage {
        GrayImage::new(width, height, pixels, "test").unwrap()
    }

    fn uniform(width: u32, height: u32, value: u8) -> GrayImage {
        gray_of(width, height, vec![value; (width * height) as usize])
    }

    #[test]
    fn uniform_interior_is_silent_but_corners_respond() {
        let img = uniform(16, 16, 128);
        let params = SusanParams::default();
        let out = susan_edges(&img, &params);
        // Interior: full mask, n = 37 > g, response 0.
        assert_eq!(out.get(8, 8), 0);
        assert_eq!(usan_area(&img, 8, 8, &params), 37.0);
        // Corner: only 13 mask pixels are in bounds, so n < g and the
        // truncated mask responds. That is the documented border behavior.
        assert_eq!(usan_area(&img, 0, 0, &params), 13.0);
        assert!(out.get(0, 0) > 0);
    }

    #[test]
    fn lone_dark_pixel_scores_246() {
        // 36 white neighbors at |ΔI| = 255 contribute exactly 0 (the
        // similarity underflows), so n = 1 and R = 26.75.
        // round(26.75 · 255 / 27.75) = 246.
        let mut pixels = vec![255u8; 15 * 15];
        pixels[7 * 15 + 7] = 0;
        let img = gray_of(15, 15, pixels);
        let out = susan_edges(&img, &SusanParams::default());
        assert_eq!(out.get(7, 7), 246);
        // White pixels with a full mask see at most one dissimilar pixel:
        // n ≥ 36 > g, so the interior stays 0. (Border pixels respond to
        // their truncated masks regardless of content.)
        for y in 3..12 {
            for x in 3..12 {
                if (x, y) != (7, 7) {
                    assert_eq!(out.get(x, y), 0, "({x}, {y})");
                }
            }
        }
    }

    #[test]
    fn response_matches_per_pixel_usan_area() {
        // Dual route: the table-driven sweep must equal the direct
        // definition bit for bit.
        let mut pixels = Vec::with_capacity(24 * 17);
        let mut state = 0x2545F4914F6CDD1Du64;
        for _ in 0..24 * 17 {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            pixels.push((state >> 56) as u8);
        }
        let img = gray_of(24, 17, pixels);
        for similarity in [Similarity::Smooth, Similarity::Hard] {
            let params = SusanParams {
                similarity,
                ..SusanParams::default()
            };
            let response = susan_response(&img, &params);
            for y in 0..17u32 {
                for x in 0..24u32 {
                    let n = usan_area(&img, x, y, &params);
                    let expect = (params.geometric_threshold - n).max(0.0);
                    let got = response[(y * 24 + x) as usize];
                    assert!(
                        got.to_bits() == expect.to_bits(),
                        "({x}, {y}): {got} vs {expect}"
                    );
                }
            }
        }
    }

    #[test]
    fn binary_thresholds_the_raw_response() {
        let mut pixels = vec![40u8; 20 * 20];
        for y in 0..20 {
            for x in 10..20 {
                pixels[y * 20 + x] = 200;
            }
        }
        let img = gray_of(20, 20, pixels);
        let graded = SusanParams::default();
        let binary = SusanParams {
            output_mode: OutputMode::Binary,
            ..graded
        };
        let response = susan_response(&img, &graded);
        let out = susan_edges(&img, &binary);
        for (i, &r) in response.iter().enumerate() {
            let expect = if r > 0.0 { 255 } else { 0 };
            assert_eq!(out.pixels()[i], expect, "pixel {i}");
        }
        // The vertical step must actually fire somewhere away from borders.
        assert_eq!(out.get(10, 10), 255);
        assert_eq!(out.get(3, 10), 0);
    }

    #[test]
    fn replicated_channels_are_equal() {
        let img = uniform(9, 5, 7);
        let out = susan_edges(&img, &SusanParams::default());
        let rgb = replicate_channels(&out);
        assert_eq!(rgb.len(), 9 * 5 * 3);
        for (i, px) in rgb.chunks_exact(3).enumerate() {
            assert_eq!(px[0], px[1]);
            assert_eq!(px[1], px[2]);
            assert_eq!(px[0], out.pixels()[i]);
        }
    }

    #[test]
    fn graded_scaling_monotone_in_usan_deficit() {
        // Smaller USAN ⇒ larger graded value.
        let mut pixels = vec![255u8; 11 * 11];
        pixels[5 * 11 + 5] = 0;
        pixels[5 * 11 + 6] = 0;
        let img = gray_of(11, 11, pixels);
        let params = SusanParams::default();
        let out = susan_edges(&img, &params);
        // The two dark pixels see each other (c = 1), n = 2, R = 25.75.
        assert_eq!(out.get(5, 5), ((25.75 * 255.0) / 27.75_f64).round() as u8);
        assert_eq!(out.get(5, 5), out.get(6, 5));
        assert!(out.get(5, 5) < 246);
    }
}
