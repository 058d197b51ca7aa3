//! PNG reading/writing for motif (RGB) and filtered (grayscale) images.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use super::{MotifImage, RasterError};

impl From<png::EncodingError> for RasterError {
    fn from(e: png::EncodingError) -> Self {
        RasterError::Png(e.to_string())
    }
}

impl From<png::DecodingError> for RasterError {
    fn from(e: png::DecodingError) -> Self {
        RasterError::Png(e.to_string())
    }
}

fn write(
    path: &Path,
    width: u32,
    height: u32,
    color: png::ColorType,
    data: &[u8],
) -> Result<(), RasterError> {
    let file = File::create(path)?;
    let mut encoder = png::Encoder::new(BufWriter::new(file), width, height);
    encoder.set_color(color);
    encoder.set_depth(png::BitDepth::Eight);
    let mut writer = encoder.write_header()?;
    writer.write_image_data(data)?;
    Ok(())
}

pub fn write_rgb_png(path: &Path, width: u32, height: u32, data: &[u8]) -> Result<(), RasterError> {
    write(path, width, height, png::ColorType::Rgb, data)
}

pub fn write_gray_png(path: &Path, width: u32, height: u32, data: &[u8]) -> Result<(), RasterError> {
    write(path, width, height, png::ColorType::Grayscale, data)
}

pub fn write_motif_png(path: &Path, image: &MotifImage) -> Result<(), RasterError> {
    write_rgb_png(path, image.width(), image.height(), image.rgb_bytes())
}

/// Decoded 8-bit image. `channels` is 1 (grayscale) or 3 (RGB).
pub struct DecodedPng {
    pub width: u32,
    pub height: u32,
    pub channels: u32,
    pub data: Vec<u8>,
}

impl DecodedPng {
    /// Expand to interleaved RGB regardless of source channel count.
    pub fn to_rgb(&self) -> Vec<u8> {
        match self.channels {
            3 => self.data.clone(),
            1 => self.data.iter().flat_map(|&v| [v, v, v]).collect(),
            _ => unreachable!("read_png only yields 1 or 3 channels"),
        }
    }
}

pub fn read_png(path: &Path) -> Result<DecodedPng, RasterError> {
    let decoder = png::Decoder::new(BufReader::new(File::open(path)?));
    let mut reader = decoder.read_info()?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| RasterError::Png("output size overflows usize".into()))?;
    let mut buf = vec![0u8; size];
    let info = reader.next_frame(&mut buf)?;
    buf.truncate(info.buffer_size());
    if info.bit_depth != png::BitDepth::Eight {
        return Err(RasterError::Png(format!(
            "unsupported bit depth {:?}",
            info.bit_depth
        )));
    }
    let channels = match info.color_type {
        png::ColorType::Rgb => 3,
        png::ColorType::Grayscale => 1,
        other => {
            return Err(RasterError::Png(format!(
                "unsupported color type {other:?}"
            )))
        }
    };
    Ok(DecodedPng {
        width: info.width,
        height: info.height,
        channels,
        data: buf,
    })
}

/// Read an RGB PNG back into a [`MotifImage`].
pub fn read_motif_png(path: &Path, accession: &str) -> Result<MotifImage, RasterError> {
    let png = read_png(path)?;
    MotifImage::from_rgb_bytes(png.width, png.height, png.to_rgb(), accession)
        .ok_or_else(|| RasterError::Png("pixel buffer size mismatch".into()))
}
