//! Single-sequence inference.

use super::dataset::{BuildOptions, Dataset};
use super::PipelineError;
use crate::nn::{softmax, Mode, Network, Scalar, Tensor};
use crate::seqio::{quality_filter, QualityVerdict, Region, SequenceRecord};
use crate::susan::{replicate_channels, susan_edges, to_grayscale};
use crate::rasterizer::rasterize;

#[derive(Clone, Debug, PartialEq)]
pub struct PredictionReport {
    pub accession: String,
    /// Indexed by `Region as usize`, sums to 1.
    pub probabilities: [f64; Region::COUNT],
    pub predicted: Region,
}

impl PredictionReport {
    /// `ASIA: 98.826% EUR: 0.051% AME: 0.001% AUSTR: 1.121%`
    pub fn format_line(&self) -> String {
        Region::ALL
            .iter()
            .map(|&r| {
                format!(
                    "{}: {:.3}%",
                    r.report_code(),
                    self.probabilities[r as usize] * 100.0
                )
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Encode one sequence exactly as `build_dataset` would and run it through
/// the classifier. A record that fails the quality gate is still scored —
/// the verdict is advisory at prediction time — but logged as a warning.
pub fn predict_one<S: Scalar>(
    net: &mut Network<S>,
    record: &SequenceRecord,
    options: &BuildOptions,
) -> Result<PredictionReport, PipelineError> {
    if net.spec().classes != Region::COUNT {
        return Err(PipelineError::Format(format!(
            "network emits {} classes, prediction needs {}",
            net.spec().classes,
            Region::COUNT
        )));
    }
    if let QualityVerdict::Reject(reason) = quality_filter(record, &options.quality) {
        log::warn!("{}: fails quality gate ({reason:?}), scoring anyway", record.accession);
    }

    let motif = rasterize(&record.bases, &options.geometry, &record.accession);
    let gray = to_grayscale(&motif.image);
    let filtered = susan_edges(&gray, &options.susan);

    let mut holder = Dataset::new(options.geometry.height, options.geometry.width, 3);
    holder.images.push(replicate_channels(&filtered));
    holder.labels.push(Region::Asia); // placeholder, never read
    let x = holder.batch_tensor::<S>(&[0]);

    let logits = net.forward(&x, Mode::Eval)?;
    let rows: Vec<f64> = logits.data().iter().map(|&v| v.to_f64()).collect();
    let probs = softmax(&Tensor::<f64>::from_vec(logits.shape(), rows)?)?;

    let mut probabilities = [0.0; Region::COUNT];
    probabilities.copy_from_slice(probs.data());
    let mut best = 0;
    for c in 1..Region::COUNT {
        if probabilities[c] > probabilities[best] {
            best = c;
        }
    }
    Ok(PredictionReport {
        accession: record.accession.clone(),
        probabilities,
        predicted: Region::ALL[best],
    })
}
