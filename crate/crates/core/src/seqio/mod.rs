//! Sequence ingestion: FASTA records, metadata sidecars, region vocabulary,
//! and the quality gates applied before rasterization.

mod fasta;
mod metadata;
mod quality;
mod region;

pub use fasta::{parse_fasta, write_fasta, SequenceRecord};
pub use metadata::{parse_metadata, MetadataEntry};
pub use quality::{ambiguous_fraction, quality_filter, QualityConfig, QualityVerdict, RejectReason};
pub use region::{CountryTable, Region};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SeqIoError {
    #[error("malformed FASTA at line {line}: {reason}")]
    MalformedFasta { line: usize, reason: String },
    #[error("input contains no sequence records")]
    EmptyInput,
    #[error("metadata header is missing column {0:?}")]
    MissingColumn(&'static str),
    #[error("duplicate accession {0:?} in metadata")]
    DuplicateAccession(String),
    #[error("unknown region token {token:?} on metadata row {row}")]
    UnknownRegion { token: String, row: usize },
    #[error("location {0:?} does not match any table entry")]
    UnmappedLocation(String),
    #[error("invalid quality config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
