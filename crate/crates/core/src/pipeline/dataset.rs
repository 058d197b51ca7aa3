//! Labeled image collections and the GMD1 container.
//!
//! GMD1 layout, integers little-endian:
//!
//! ```text
//! magic    b"GMD1"
//! count    u32
//! height   u32
//! width    u32
//! channels u32
//! records  count × (label u8, then height·width·channels bytes,
//!          row-major with channels interleaved)
//! ```
//!
//! Accessions are not part of the container; a dataset read back from disk
//! carries an empty accession list.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::nn::{Scalar, Tensor};
use crate::rasterizer::{rasterize_with_order, FillOrder, MotifGeometry};
use crate::seqio::{
    quality_filter, MetadataEntry, QualityConfig, QualityVerdict, Region, RejectReason,
    SequenceRecord,
};
use crate::susan::{replicate_channels, susan_edges, to_grayscale, SusanParams};

pub const GMD1_MAGIC: [u8; 4] = *b"GMD1";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dataset {
    pub height: u32,
    pub width: u32,
    pub channels: u32,
    /// Per-sample pixel bytes, `height·width·channels` each.
    pub images: Vec<Vec<u8>>,
    pub labels: Vec<Region>,
    /// Parallel to `images` when built in-process; empty after a GMD1 read.
    pub accessions: Vec<String>,
}

impl Dataset {
    pub fn new(height: u32, width: u32, channels: u32) -> Self {
        Dataset {
            height,
            width,
            channels,
            images: Vec::new(),
            labels: Vec::new(),
            accessions: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn sample_bytes(&self) -> usize {
        self.height as usize * self.width as usize * self.channels as usize
    }

    pub fn region_histogram(&self) -> [usize; Region::COUNT] {
        let mut counts = [0usize; Region::COUNT];
        for &label in &self.labels {
            counts[label as usize] += 1;
        }
        counts
    }

    /// New dataset holding the given samples, in index order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let keep_accessions = self.accessions.len() == self.images.len();
        let mut out = Dataset::new(self.height, self.width, self.channels);
        for &i in indices {
            out.images.push(self.images[i].clone());
            out.labels.push(self.labels[i]);
            if keep_accessions {
                out.accessions.push(self.accessions[i].clone());
            }
        }
        out
    }

    /// Samples `indices` as an NCHW tensor scaled to [0, 1] (pixel / 255).
    /// Stored bytes are HWC; this transposes.
    pub fn batch_tensor<S: Scalar>(&self, indices: &[usize]) -> Tensor<S> {
        let (h, w, c) = (
            self.height as usize,
            self.width as usize,
            self.channels as usize,
        );
        let mut data = Vec::with_capacity(indices.len() * c * h * w);
        for &i in indices {
            let img = &self.images[i];
            for ch in 0..c {
                for pix in 0..h * w {
                    data.push(S::from_f64(img[pix * c + ch] as f64 / 255.0));
                }
            }
        }
        Tensor::from_vec(&[indices.len(), c, h, w], data)
            .expect("index arithmetic matches shape")
    }

    pub fn write_gmd1(&self, path: &Path) -> Result<(), PipelineError> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(&GMD1_MAGIC)?;
        for v in [
            self.images.len() as u32,
            self.height,
            self.width,
            self.channels,
        ] {
            w.write_all(&v.to_le_bytes())?;
        }
        let expect = self.sample_bytes();
        for (img, &label) in self.images.iter().zip(&self.labels) {
            if img.len() != expect {
                return Err(PipelineError::Format(format!(
                    "sample holds {} bytes, dimensions say {expect}",
                    img.len()
                )));
            }
            w.write_all(&[label as u8])?;
            w.write_all(img)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_gmd1(path: &Path) -> Result<Dataset, PipelineError> {
        let mut r = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)
            .map_err(|_| PipelineError::Format("truncated header".into()))?;
        if magic != GMD1_MAGIC {
            return Err(PipelineError::Format("not a GMD1 file".into()));
        }
        let mut word = [0u8; 4];
        let mut next = || -> Result<u32, PipelineError> {
            r.read_exact(&mut word)
                .map_err(|_| PipelineError::Format("truncated header".into()))?;
            Ok(u32::from_le_bytes(word))
        };
        let count = next()?;
        let height = next()?;
        let width = next()?;
        let channels = next()?;
        if height == 0 || width == 0 || channels == 0 {
            return Err(PipelineError::Format("zero dimension".into()));
        }

        let mut ds = Dataset::new(height, width, channels);
        let sample = ds.sample_bytes();
        for i in 0..count {
            let mut label = [0u8; 1];
            r.read_exact(&mut label)
                .map_err(|_| PipelineError::Format(format!("record {i} truncated")))?;
            let region = Region::from_label(label[0]).ok_or_else(|| {
                PipelineError::Format(format!("record {i} has label {}", label[0]))
            })?;
            let mut pixels = vec![0u8; sample];
            r.read_exact(&mut pixels)
                .map_err(|_| PipelineError::Format(format!("record {i} truncated")))?;
            ds.labels.push(region);
            ds.images.push(pixels);
        }
        let mut probe = [0u8; 1];
        if r.read(&mut probe)? != 0 {
            return Err(PipelineError::Format("trailing bytes".into()));
        }
        Ok(ds)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct BuildOptions {
    pub geometry: MotifGeometry,
    pub susan: SusanParams,
    pub quality: QualityConfig,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            geometry: MotifGeometry::default(),
            susan: SusanParams::default(),
            quality: QualityConfig::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct BuildStats {
    pub total: usize,
    pub accepted: usize,
    pub rejected_short: usize,
    pub rejected_ambiguous: usize,
    /// Records whose sequence exceeded the motif capacity.
    pub truncated: usize,
}

/// Rasterize, filter, and label every record that passes the quality gate.
/// Every record must have a metadata entry (checked before quality, so an
/// unlabeled record is an error even when it would be rejected anyway).
/// Output order follows input order regardless of worker scheduling.
pub fn build_dataset(
    records: &[SequenceRecord],
    metadata: &BTreeMap<String, MetadataEntry>,
    options: &BuildOptions,
) -> Result<(Dataset, BuildStats), PipelineError> {
    let mut stats = BuildStats {
        total: records.len(),
        ..BuildStats::default()
    };

    let mut work: Vec<(&SequenceRecord, Region)> = Vec::new();
    for record in records {
        let entry = metadata.get(&record.accession).ok_or_else(|| {
            PipelineError::UnlabeledRecord {
                accession: record.accession.clone(),
            }
        })?;
        match quality_filter(record, &options.quality) {
            QualityVerdict::Accept => work.push((record, entry.region)),
            QualityVerdict::Reject(RejectReason::TooShort { .. }) => stats.rejected_short += 1,
            QualityVerdict::Reject(RejectReason::TooAmbiguous { .. }) => {
                stats.rejected_ambiguous += 1
            }
        }
    }
    stats.accepted = work.len();

    let order = FillOrder::new(options.geometry);
    let built: Vec<(Vec<u8>, usize)> = work
        .par_iter()
        .map(|(record, _)| {
            let motif = rasterize_with_order(&record.bases, &order, &record.accession);
            let gray = to_grayscale(&motif.image);
            let filtered = susan_edges(&gray, &options.susan);
            (replicate_channels(&filtered), motif.truncated)
        })
        .collect();

    let mut ds = Dataset::new(options.geometry.height, options.geometry.width, 3);
    for ((record, region), (pixels, truncated)) in work.iter().zip(built) {
        if truncated > 0 {
            stats.truncated += 1;
        }
        ds.images.push(pixels);
        ds.labels.push(*region);
        ds.accessions.push(record.accession.clone());
    }
    Ok((ds, stats))
}

/// Sidecar JSON describing a built dataset.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub samples: usize,
    pub height: u32,
    pub width: u32,
    pub channels: u32,
    pub per_region: BTreeMap<String, usize>,
    pub build: BuildStats,
}

impl DatasetManifest {
    pub fn new(dataset: &Dataset, build: BuildStats) -> Self {
        let hist = dataset.region_histogram();
        let per_region = Region::ALL
            .iter()
            .map(|&r| (r.report_code().to_string(), hist[r as usize]))
            .collect();
        DatasetManifest {
            samples: dataset.len(),
            height: dataset.height,
            width: dataset.width,
            channels: dataset.channels,
            per_region,
            build,
        }
    }
}
