//! Label sidecar: a CSV keyed by accession carrying region, location, and
//! collection date.

use std::collections::BTreeMap;
use std::io::Read;

use serde::{Deserialize, Serialize};

use super::{Region, SeqIoError};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetadataEntry {
    pub region: Region,
    pub location: String,
    pub date: Option<String>,
}

/// Parse a metadata CSV with header `accession,region,location,date`.
/// Column order is free (lookup is by name), extra columns are ignored,
/// and an empty date cell becomes `None`.
pub fn parse_metadata<R: Read>(reader: R) -> Result<BTreeMap<String, MetadataEntry>, SeqIoError> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let headers = csv.headers()?.clone();
    let col = |name: &'static str| -> Result<usize, SeqIoError> {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or(SeqIoError::MissingColumn(name))
    };
    let acc_col = col("accession")?;
    let region_col = col("region")?;
    let loc_col = col("location")?;
    let date_col = col("date")?;

    let mut entries = BTreeMap::new();
    for (idx, row) in csv.records().enumerate() {
        let row = row?;
        let field = |i: usize| row.get(i).unwrap_or("").to_string();
        let accession = field(acc_col);
        if accession.is_empty() {
            continue;
        }
        let region_tok = field(region_col);
        let region = Region::parse(&region_tok).ok_or_else(|| SeqIoError::UnknownRegion {
            token: region_tok,
            row: idx + 2,
        })?;
        let date = Some(field(date_col)).filter(|d| !d.is_empty());
        let entry = MetadataEntry {
            region,
            location: field(loc_col),
            date,
        };
        if entries.insert(accession.clone(), entry).is_some() {
            return Err(SeqIoError::DuplicateAccession(accession));
        }
    }
    Ok(entries)
}
