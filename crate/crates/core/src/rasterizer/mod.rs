//! Circular color-motif rasterization: sequences are written base-by-base
//! along concentric midpoint circles (or a dense disk) around the image
//! center, one pixel per base.

mod circle;
mod color;
mod image;
pub mod png_io;

pub use circle::{circle_points, disk_order, rings_order};
pub use color::{base_color, luma, Rgb, BLACK, BLUE, GREEN, RED, WHITE, YELLOW};
pub use image::{rasterize, rasterize_with_order, FillOrder, MotifImage, RasterizedMotif};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RasterError {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("png: {0}")]
    Png(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// How sequence positions map onto pixels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FillMode {
    /// Concatenated midpoint circles of radius 0..=max_radius. Lattice gaps
    /// between rings stay background.
    Rings,
    /// Every pixel within max_radius + 0.5 of the center, ordered by rounded
    /// distance and then angle.
    Disk,
}

impl std::str::FromStr for FillMode {
    type Err = RasterError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "rings" => Ok(FillMode::Rings),
            "disk" => Ok(FillMode::Disk),
            other => Err(RasterError::InvalidGeometry(format!(
                "unknown fill mode {other:?} (expected rings|disk)"
            ))),
        }
    }
}

/// Placement of the motif within the output image.
///
/// Invariant (checked by the constructors): the full disk of radius
/// `max_radius` around `center` lies inside `width × height`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MotifGeometry {
    pub width: u32,
    pub height: u32,
    pub center: (i32, i32),
    pub max_radius: u32,
    pub fill_mode: FillMode,
}

impl MotifGeometry {
    /// Square image of side `size`, centered, with the largest radius that
    /// fits (`size / 2 - 1`).
    pub fn square(size: u32, fill_mode: FillMode) -> Result<Self, RasterError> {
        if size < 2 {
            return Err(RasterError::InvalidGeometry(format!(
                "side {size} leaves no room for a circle"
            )));
        }
        let g = MotifGeometry {
            width: size,
            height: size,
            center: ((size / 2) as i32, (size / 2) as i32),
            max_radius: size / 2 - 1,
            fill_mode,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn new(
        width: u32,
        height: u32,
        center: (i32, i32),
        max_radius: u32,
        fill_mode: FillMode,
    ) -> Result<Self, RasterError> {
        let g = MotifGeometry {
            width,
            height,
            center,
            max_radius,
            fill_mode,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), RasterError> {
        let (cx, cy) = self.center;
        let r = self.max_radius as i64;
        let fits = |c: i64, extent: u32| c - r >= 0 && c + r < extent as i64;
        if self.width == 0 || self.height == 0 {
            return Err(RasterError::InvalidGeometry("empty image".into()));
        }
        if !fits(cx as i64, self.width) || !fits(cy as i64, self.height) {
            return Err(RasterError::InvalidGeometry(format!(
                "radius {} around ({cx}, {cy}) exceeds {}x{}",
                self.max_radius, self.width, self.height
            )));
        }
        Ok(())
    }

    /// Number of bases the motif can hold.
    pub fn capacity(&self) -> usize {
        self.fill_order().len()
    }

    /// Pixel visit order for this geometry. Deterministic; may be computed
    /// once and shared read-only across threads.
    pub fn fill_order(&self) -> Vec<(i32, i32)> {
        match self.fill_mode {
            FillMode::Rings => rings_order(self.max_radius, self.center),
            FillMode::Disk => disk_order(self.max_radius, self.center),
        }
    }
}

impl Default for MotifGeometry {
    /// 200×200 rings-mode motif, center (100, 100), radius 99.
    fn default() -> Self {
        MotifGeometry::square(200, FillMode::Rings).expect("default geometry is valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_geometry() {
        let g = MotifGeometry::default();
        assert_eq!((g.width, g.height), (200, 200));
        assert_eq!(g.center, (100, 100));
        assert_eq!(g.max_radius, 99);
        assert_eq!(g.fill_mode, FillMode::Rings);
    }

    #[test]
    fn oversized_radius_is_rejected() {
        assert!(MotifGeometry::new(100, 100, (50, 50), 50, FillMode::Rings).is_err());
        assert!(MotifGeometry::new(100, 100, (50, 50), 49, FillMode::Rings).is_ok());
        assert!(MotifGeometry::new(100, 100, (10, 50), 20, FillMode::Disk).is_err());
    }

    #[test]
    fn fill_mode_parses() {
        assert_eq!("rings".parse::<FillMode>().unwrap(), FillMode::Rings);
        assert_eq!("Disk".parse::<FillMode>().unwrap(), FillMode::Disk);
        assert!("spiral".parse::<FillMode>().is_err());
    }
}
