//! Region vocabulary and the location → region lookup table.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::SeqIoError;

/// Geographic class labels. The discriminants are the on-disk label bytes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(u8)]
pub enum Region {
    Asia = 0,
    Europe = 1,
    America = 2,
    Oceania = 3,
}

impl Region {
    pub const ALL: [Region; 4] = [Region::Asia, Region::Europe, Region::America, Region::Oceania];
    pub const COUNT: usize = 4;

    pub fn label(self) -> u8 {
        self as u8
    }

    pub fn from_label(label: u8) -> Option<Region> {
        match label {
            0 => Some(Region::Asia),
            1 => Some(Region::Europe),
            2 => Some(Region::America),
            3 => Some(Region::Oceania),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Region::Asia => "Asia",
            Region::Europe => "Europe",
            Region::America => "America",
            Region::Oceania => "Oceania",
        }
    }

    /// Short code used in prediction report lines.
    pub fn report_code(self) -> &'static str {
        match self {
            Region::Asia => "ASIA",
            Region::Europe => "EUR",
            Region::America => "AME",
            Region::Oceania => "AUSTR",
        }
    }

    /// Case-insensitive parse of region names, report codes, and the
    /// "Australia" alias for Oceania.
    pub fn parse(token: &str) -> Option<Region> {
        match token.trim().to_ascii_lowercase().as_str() {
            "asia" => Some(Region::Asia),
            "europe" | "eur" => Some(Region::Europe),
            "america" | "ame" | "americas" => Some(Region::America),
            "oceania" | "austr" | "australia" => Some(Region::Oceania),
            _ => None,
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Region {
    type Err = SeqIoError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Region::parse(s).ok_or_else(|| SeqIoError::UnknownRegion {
            token: s.to_string(),
            row: 0,
        })
    }
}

/// Name → region lookup, matched against free-form location strings by
/// longest entry with whole-token boundaries.
#[derive(Debug)]
pub struct CountryTable {
    /// (lowercase name, region), in file order.
    entries: Vec<(String, Region)>,
}

static BUILTIN: OnceLock<CountryTable> = OnceLock::new();

impl CountryTable {
    /// Table compiled into the library (includes continent names so that
    /// locations like "North America / USA / ..." resolve without a country
    /// hit).
    pub fn builtin() -> &'static CountryTable {
        BUILTIN.get_or_init(|| {
            CountryTable::parse_csv(include_str!("../../data/country_regions.csv"))
                .expect("builtin country table parses")
        })
    }

    /// Parse a `country,region` CSV with a header row.
    pub fn parse_csv(text: &str) -> Result<CountryTable, SeqIoError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(text.as_bytes());
        let mut entries = Vec::new();
        for (idx, row) in reader.records().enumerate() {
            let row = row?;
            let name = row.get(0).unwrap_or("").trim();
            let region_tok = row.get(1).unwrap_or("").trim();
            if name.is_empty() {
                continue;
            }
            let region = Region::parse(region_tok).ok_or_else(|| SeqIoError::UnknownRegion {
                token: region_tok.to_string(),
                row: idx + 2,
            })?;
            entries.push((name.to_ascii_lowercase(), region));
        }
        Ok(CountryTable { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Resolve a location string such as "Asia / Turkey / Istanbul". Among
    /// all entries that occur in the string with non-alphabetic characters
    /// (or the string edge) on both sides, the longest name wins; ties keep
    /// table order.
    pub fn region_of(&self, location: &str) -> Result<Region, SeqIoError> {
        let haystack = location.to_lowercase();
        let mut best: Option<(usize, Region)> = None;
        for (name, region) in &self.entries {
            if name.len() <= best.map_or(0, |(len, _)| len) {
                continue;
            }
            if contains_token(&haystack, name) {
                best = Some((name.len(), *region));
            }
        }
        best.map(|(_, region)| region)
            .ok_or_else(|| SeqIoError::UnmappedLocation(location.to_string()))
    }
}

/// Substring match that refuses matches embedded in a longer word, so "usa"
/// will not fire inside "jerusalem".
fn contains_token(haystack: &str, needle: &str) -> bool {
    let mut start = 0;
    while let Some(pos) = haystack[start..].find(needle) {
        let at = start + pos;
        let end = at + needle.len();
        let left_ok = haystack[..at].chars().next_back().is_none_or(|c| !c.is_alphabetic());
        let right_ok = haystack[end..].chars().next().is_none_or(|c| !c.is_alphabetic());
        if left_ok && right_ok {
            return true;
        }
        start = at + haystack[at..].chars().next().map_or(1, char::len_utf8);
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_round_trip() {
        for region in Region::ALL {
            assert_eq!(Region::from_label(region.label()), Some(region));
        }
        assert_eq!(Region::from_label(4), None);
        assert_eq!(Region::Asia.label(), 0);
        assert_eq!(Region::Europe.label(), 1);
        assert_eq!(Region::America.label(), 2);
        assert_eq!(Region::Oceania.label(), 3);
    }

    #[test]
    fn parse_accepts_codes_and_aliases() {
        assert_eq!(Region::parse("ASIA"), Some(Region::Asia));
        assert_eq!(Region::parse("eur"), Some(Region::Europe));
        assert_eq!(Region::parse("Australia"), Some(Region::Oceania));
        assert_eq!(Region::parse("Atlantis"), None);
    }

    #[test]
    fn turkey_is_asia() {
        let table = CountryTable::builtin();
        assert_eq!(table.region_of("Asia / Turkey / Istanbul").unwrap(), Region::Asia);
        assert_eq!(table.region_of("Turkey").unwrap(), Region::Asia);
    }

    #[test]
    fn longest_match_wins_over_continent_prefix() {
        let table = CountryTable::builtin();
        // "Georgia" (the country) is Asia, but the longer "North America"
        // entry disambiguates the US state.
        assert_eq!(table.region_of("Georgia").unwrap(), Region::Asia);
        assert_eq!(
            table.region_of("North America / USA / Georgia").unwrap(),
            Region::America
        );
    }

    #[test]
    fn match_requires_token_boundaries() {
        let table = CountryTable::builtin();
        assert_eq!(table.region_of("Asia / Israel / Jerusalem").unwrap(), Region::Asia);
        assert!(table.region_of("Jerusalem").is_err());
    }

    #[test]
    fn unmapped_location_errors() {
        let err = CountryTable::builtin().region_of("Mars / Olympus Mons").unwrap_err();
        assert!(matches!(err, SeqIoError::UnmappedLocation(_)));
    }

    #[test]
    fn spot_checks_across_regions() {
        let table = CountryTable::builtin();
        for (loc, want) in [
            ("Europe / France / Lyon", Region::Europe),
            ("Europe / Russia / Moscow", Region::Europe),
            ("North America / Canada / Toronto", Region::America),
            ("South America / Brazil", Region::America),
            ("Oceania / Australia / Sydney", Region::Oceania),
            ("Oceania / New Zealand", Region::Oceania),
            ("Asia / South Korea / Seoul", Region::Asia),
            ("Asia / Hong Kong", Region::Asia),
        ] {
            assert_eq!(table.region_of(loc).unwrap(), want, "{loc}");
        }
    }

    #[test]
    fn custom_table_rejects_bad_region_token() {
        let err = CountryTable::parse_csv("country,region\nWakanda,Africa\n").unwrap_err();
        assert!(matches!(err, SeqIoError::UnknownRegion { row: 2, .. }));
    }
}
