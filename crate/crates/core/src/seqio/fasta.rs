//! Minimal FASTA reader/writer. Headers keep their full text; sequence data
//! is normalized to uppercase with all whitespace removed.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::SeqIoError;

/// One FASTA record plus the label fields attached later from metadata.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequenceRecord {
    /// Stable identifier extracted from the header.
    pub accession: String,
    /// Full header text without the leading `>`.
    pub header: String,
    /// Uppercase bases, no whitespace.
    pub bases: String,
    /// Sampling location, when metadata has been joined in.
    pub location: Option<String>,
    /// Collection date, when metadata has been joined in.
    pub collection_date: Option<String>,
}

impl SequenceRecord {
    pub fn new(header: &str, bases: &str) -> Self {
        SequenceRecord {
            accession: extract_accession(header),
            header: header.to_string(),
            bases: bases.to_string(),
            location: None,
            collection_date: None,
        }
    }

    pub fn len(&self) -> usize {
        self.bases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bases.is_empty()
    }
}

/// Accession is the `EPI_ISL_`-prefixed token of a `|`-separated header when
/// present, otherwise the first whitespace-delimited token.
fn extract_accession(header: &str) -> String {
    if let Some(tok) = header
        .split('|')
        .map(str::trim)
        .find(|t| t.starts_with("EPI_ISL_"))
    {
        return tok.to_string();
    }
    header
        .split_whitespace()
        .next()
        .unwrap_or_default()
        .to_string()
}

/// Parse every record from `reader`. Blank lines are skipped; any other
/// content before the first header is an error, as is an input with no
/// records at all.
pub fn parse_fasta<R: BufRead>(reader: R) -> Result<Vec<SequenceRecord>, SeqIoError> {
    let mut records = Vec::new();
    let mut header: Option<(String, usize)> = None;
    let mut bases = String::new();

    let flush = |header: Option<(String, usize)>,
                     bases: &mut String,
                     records: &mut Vec<SequenceRecord>|
     -> Result<(), SeqIoError> {
        if let Some((text, line)) = header {
            let record = SequenceRecord::new(&text, bases);
            if record.accession.is_empty() {
                return Err(SeqIoError::MalformedFasta {
                    line,
                    reason: "header has no accession token".into(),
                });
            }
            records.push(record);
            bases.clear();
        }
        Ok(())
    };

    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('>') {
            flush(header.take(), &mut bases, &mut records)?;
            header = Some((rest.to_string(), idx + 1));
        } else if header.is_none() {
            return Err(SeqIoError::MalformedFasta {
                line: idx + 1,
                reason: "sequence data before first header".into(),
            });
        } else {
            for ch in line.chars().filter(|c| !c.is_whitespace()) {
                bases.extend(ch.to_uppercase());
            }
        }
    }
    flush(header.take(), &mut bases, &mut records)?;

    if records.is_empty() {
        return Err(SeqIoError::EmptyInput);
    }
    Ok(records)
}

/// Write records in FASTA form, wrapping sequence lines at `wrap` columns
/// (70 when zero is passed).
pub fn write_fasta<W: Write>(
    writer: &mut W,
    records: &[SequenceRecord],
    wrap: usize,
) -> Result<(), SeqIoError> {
    let wrap = if wrap == 0 { 70 } else { wrap };
    for rec in records {
        writeln!(writer, ">{}", rec.header)?;
        let bytes = rec.bases.as_bytes();
        for chunk in bytes.chunks(wrap) {
            writer.write_all(chunk)?;
            writeln!(writer)?;
        }
    }
    Ok(())
}
