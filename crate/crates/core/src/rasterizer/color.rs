//! Base → color palette and the grayscale weights used downstream.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rgb {
    pub r: u8,
    pub g: u8,
    pub b: u8,
}

impl Rgb {
    pub const fn new(r: u8, g: u8, b: u8) -> Self {
        Rgb { r, g, b }
    }
}

pub const WHITE: Rgb = Rgb::new(255, 255, 255);
pub const BLACK: Rgb = Rgb::new(0, 0, 0);
pub const YELLOW: Rgb = Rgb::new(255, 255, 0);
pub const BLUE: Rgb = Rgb::new(0, 0, 255);
pub const GREEN: Rgb = Rgb::new(0, 255, 0);
pub const RED: Rgb = Rgb::new(255, 0, 0);

/// Palette: A yellow, C blue, G green, T/U red, anything else black.
/// Unfilled background stays white.
pub fn base_color(base: char) -> Rgb {
    match base {
        'A' => YELLOW,
        'C' => BLUE,
        'G' => GREEN,
        'T' | 'U' => RED,
        _ => BLACK,
    }
}

/// Rec. 601 luma, rounded to the nearest integer.
pub fn luma(color: Rgb) -> u8 {
    let y = 0.299 * color.r as f64 + 0.587 * color.g as f64 + 0.114 * color.b as f64;
    y.round() as u8
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn palette_is_pinned() {
        assert_eq!(base_color('A'), Rgb::new(255, 255, 0));
        assert_eq!(base_color('C'), Rgb::new(0, 0, 255));
        assert_eq!(base_color('G'), Rgb::new(0, 255, 0));
        assert_eq!(base_color('T'), Rgb::new(255, 0, 0));
        assert_eq!(base_color('U'), base_color('T'));
        assert_eq!(base_color('N'), BLACK);
        assert_eq!(base_color('-'), BLACK);
    }

    #[test]
    fn luma_values() {
        assert_eq!(luma(YELLOW), 226);
        assert_eq!(luma(BLUE), 29);
        assert_eq!(luma(GREEN), 150);
        assert_eq!(luma(RED), 76);
        assert_eq!(luma(WHITE), 255);
        assert_eq!(luma(BLACK), 0);
    }
}
