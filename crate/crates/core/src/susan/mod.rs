//! SUSAN edge response on grayscale images.
//!
//! For every pixel, compare the 37-pixel circular mask against the nucleus
//! brightness; the USAN area `n` is the sum of similarity scores, and the
//! edge response is `g − n` where `g` is the geometric threshold. Small
//! USAN ⇒ strong edge.

mod filter;
mod gray;

pub use filter::{replicate_channels, susan_edges, susan_response, usan_area, FilteredImage};
pub use gray::{gray_from_bytes, to_grayscale, GrayImage};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SusanError {
    #[error("invalid SUSAN params: {0}")]
    InvalidParams(String),
}

/// 37-offset circular mask (rows of width 3,5,7,7,7,5,3), nucleus included.
/// Iteration order is fixed: top row to bottom, left to right.
pub const MASK_OFFSETS: [(i32, i32); 37] = [
    (-1, -3), (0, -3), (1, -3),
    (-2, -2), (-1, -2), (0, -2), (1, -2), (2, -2),
    (-3, -1), (-2, -1), (-1, -1), (0, -1), (1, -1), (2, -1), (3, -1),
    (-3, 0), (-2, 0), (-1, 0), (0, 0), (1, 0), (2, 0), (3, 0),
    (-3, 1), (-2, 1), (-1, 1), (0, 1), (1, 1), (2, 1), (3, 1),
    (-2, 2), (-1, 2), (0, 2), (1, 2), (2, 2),
    (-1, 3), (0, 3), (1, 3),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputMode {
    /// Response scaled to 0..=255.
    Graded,
    /// 255 wherever the response is positive.
    Binary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Similarity {
    /// exp(−((ΔI / t)⁶))
    Smooth,
    /// 1 if |ΔI| ≤ t, else 0.
    Hard,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SusanParams {
    /// Brightness threshold t.
    pub brightness_threshold: f64,
    /// Geometric threshold g; response is max(g − n, 0).
    pub geometric_threshold: f64,
    pub output_mode: OutputMode,
    pub similarity: Similarity,
}

impl Default for SusanParams {
    /// t = 27, g = 0.75 · 37 = 27.75, graded smooth output.
    fn default() -> Self {
        SusanParams {
            brightness_threshold: 27.0,
            geometric_threshold: 0.75 * MASK_OFFSETS.len() as f64,
            output_mode: OutputMode::Graded,
            similarity: Similarity::Smooth,
        }
    }
}

impl SusanParams {
    pub fn validate(&self) -> Result<(), SusanError> {
        if !(self.brightness_threshold > 0.0) {
            return Err(SusanError::InvalidParams(format!(
                "brightness threshold {} must be positive",
                self.brightness_threshold
            )));
        }
        let max = MASK_OFFSETS.len() as f64;
        if !(self.geometric_threshold > 0.0 && self.geometric_threshold <= max) {
            return Err(SusanError::InvalidParams(format!(
                "geometric threshold {} outside (0, {max}]",
                self.geometric_threshold
            )));
        }
        Ok(())
    }

    /// Similarity score for one brightness difference.
    pub fn similarity_score(&self, diff: f64) -> f64 {
        match self.similarity {
            Similarity::Smooth => (-(diff / self.brightness_threshold).powi(6)).exp(),
            Similarity::Hard => {
                if diff.abs() <= self.brightness_threshold {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}
