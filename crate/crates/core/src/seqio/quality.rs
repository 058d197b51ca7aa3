//! Acceptance gates applied to parsed sequences before rasterization.

use serde::{Deserialize, Serialize};

use super::{SeqIoError, SequenceRecord};

/// Thresholds for [`quality_filter`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QualityConfig {
    /// Minimum accepted sequence length, inclusive.
    pub min_length: usize,
    /// Sequences with an ambiguous fraction at or above this are rejected.
    pub max_ambiguous_fraction: f64,
}

impl Default for QualityConfig {
    fn default() -> Self {
        QualityConfig {
            min_length: 29_000,
            max_ambiguous_fraction: 0.05,
        }
    }
}

impl QualityConfig {
    pub fn new(min_length: usize, max_ambiguous_fraction: f64) -> Result<Self, SeqIoError> {
        if min_length == 0 {
            return Err(SeqIoError::InvalidConfig("min_length must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&max_ambiguous_fraction) {
            return Err(SeqIoError::InvalidConfig(format!(
                "max_ambiguous_fraction {max_ambiguous_fraction} outside [0, 1]"
            )));
        }
        Ok(QualityConfig {
            min_length,
            max_ambiguous_fraction,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum QualityVerdict {
    Accept,
    Reject(RejectReason),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum RejectReason {
    TooShort { length: usize, min: usize },
    TooAmbiguous { fraction: f64, max: f64 },
}

impl QualityVerdict {
    pub fn is_accept(self) -> bool {
        matches!(self, QualityVerdict::Accept)
    }
}

/// Fraction of bases outside {A, C, G, T, U}; 0 for an empty sequence.
pub fn ambiguous_fraction(bases: &str) -> f64 {
    if bases.is_empty() {
        return 0.0;
    }
    let ambiguous = bases
        .chars()
        .filter(|c| !matches!(c, 'A' | 'C' | 'G' | 'T' | 'U'))
        .count();
    ambiguous as f64 / bases.chars().count() as f64
}

/// Length gate first, then the ambiguity gate. Total: never errors.
pub fn quality_filter(record: &SequenceRecord, config: &QualityConfig) -> QualityVerdict {
    let length = record.bases.chars().count();
    if length < config.min_length {
        return QualityVerdict::Reject(RejectReason::TooShort {
            length,
            min: config.min_length,
        });
    }
    let fraction = ambiguous_fraction(&record.bases);
    if fraction >= config.max_ambiguous_fraction {
        return QualityVerdict::Reject(RejectReason::TooAmbiguous {
            fraction,
            max: config.max_ambiguous_fraction,
        });
    }
    QualityVerdict::Accept
}
