//! Registry of recognized nations, their demonyms and aliases, Global
//! Majority membership, and surface-form ambiguity metadata.
//!
//! The bundled dataset (`data/countries.jsonl`) carries one record per
//! country. Overlapping surface forms ("Dominican", "Congolese", "Korean")
//! are indexed once with multiple candidate codes rather than duplicated;
//! extraction and analytics decide how to treat the ambiguity.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::error::{AuditError, Result};
use crate::storage;

/// One recognized nation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Country {
    /// ISO-3166 alpha-3 code; unique across the gazetteer.
    pub code: String,
    pub canonical_name: String,
    #[serde(default)]
    pub name_aliases: Vec<String>,
    /// Non-empty for every country.
    pub demonyms: Vec<String>,
    /// UN Group of 77 membership, the operational Global Majority flag.
    pub global_majority: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
}

impl Country {
    /// Primary demonym, used when rendering demonym-phrased prompts.
    pub fn primary_demonym(&self) -> Option<&str> {
        self.demonyms.first().map(String::as_str)
    }

    /// Canonical name as used in running text ("the United States",
    /// "the Philippines", but plain "Suriname").
    pub fn name_in_text(&self) -> String {
        if takes_definite_article(&self.canonical_name) {
            format!("the {}", self.canonical_name)
        } else {
            self.canonical_name.clone()
        }
    }
}

fn takes_definite_article(name: &str) -> bool {
    name.starts_with("United ")
        || name.starts_with("Democratic ")
        || name.contains("Republic")
        || name.ends_with("Islands")
        || matches!(
            name,
            "Netherlands" | "Philippines" | "Bahamas" | "Gambia" | "Comoros" | "Maldives"
                | "Seychelles" | "Holy See"
        )
}

/// A surface form resolved against the gazetteer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceMatch {
    /// The surface as given by the caller.
    pub surface: String,
    /// Candidate country codes, sorted; never empty on a returned match.
    pub candidates: Vec<String>,
    /// True iff more than one candidate.
    pub ambiguous: bool,
}

/// Immutable registry of countries plus an index over every normalized
/// surface form (canonical names, aliases, demonyms).
#[derive(Debug, Clone)]
pub struct Gazetteer {
    countries: Vec<Country>,
    by_code: BTreeMap<String, usize>,
    surface_index: BTreeMap<String, Vec<String>>,
    max_surface_words: usize,
}

/// Normalizes a surface form for indexing and lookup: Unicode NFC,
/// lowercase, straight apostrophes, collapsed whitespace, and a trailing
/// possessive (`'s`) stripped.
pub fn normalize_surface(surface: &str) -> String {
    let nfc: String = surface.nfc().collect();
    let lowered = nfc.to_lowercase().replace('\u{2019}', "'");
    let mut collapsed = String::with_capacity(lowered.len());
    let mut last_was_space = true;
    for ch in lowered.chars() {
        if ch.is_whitespace() {
            if !last_was_space {
                collapsed.push(' ');
                last_was_space = true;
            }
        } else {
            collapsed.push(ch);
            last_was_space = false;
        }
    }
    let trimmed = collapsed.trim_end();
    let stripped = trimmed.strip_suffix("'s").unwrap_or(trimmed);
    stripped.trim_end_matches('\'').to_string()
}

impl Gazetteer {
    /// Builds the registry, checking every type invariant.
    pub fn from_countries(countries: Vec<Country>) -> Result<Self> {
        let mut by_code = BTreeMap::new();
        let mut names_seen = BTreeMap::new();
        for (idx, country) in countries.iter().enumerate() {
            if country.code.is_empty() {
                return Err(AuditError::InvalidInput(format!(
                    "country {:?} has an empty code",
                    country.canonical_name
                )));
            }
            if by_code.insert(country.code.clone(), idx).is_some() {
                return Err(AuditError::InvalidInput(format!(
                    "duplicate country code {:?}",
                    country.code
                )));
            }
            let name_key = normalize_surface(&country.canonical_name);
            if names_seen.insert(name_key, idx).is_some() {
                return Err(AuditError::InvalidInput(format!(
                    "duplicate canonical name {:?}",
                    country.canonical_name
                )));
            }
            if country.demonyms.is_empty() {
                return Err(AuditError::InvalidInput(format!(
                    "country {} has no demonyms",
                    country.code
                )));
            }
        }

        let mut surface_index: BTreeMap<String, Vec<String>> = BTreeMap::new();
        let mut max_surface_words = 1;
        for country in &countries {
            let surfaces = std::iter::once(&country.canonical_name)
                .chain(country.name_aliases.iter())
                .chain(country.demonyms.iter());
            for surface in surfaces {
                let key = normalize_surface(surface);
                if key.is_empty() {
                    return Err(AuditError::InvalidInput(format!(
                        "country {} has a blank surface form",
                        country.code
                    )));
                }
                max_surface_words = max_surface_words.max(key.split(' ').count());
                let codes = surface_index.entry(key).or_default();
                if !codes.contains(&country.code) {
                    codes.push(country.code.clone());
                }
            }
        }
        for codes in surface_index.values_mut() {
            codes.sort();
        }

        Ok(Gazetteer {
            countries,
            by_code,
            surface_index,
            max_surface_words,
        })
    }

    pub fn countries(&self) -> &[Country] {
        &self.countries
    }

    pub fn len(&self) -> usize {
        self.countries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.countries.is_empty()
    }

    pub fn country(&self, code: &str) -> Option<&Country> {
        self.by_code.get(code).map(|&idx| &self.countries[idx])
    }

    /// Longest surface form in the index, in words; the scanner's window.
    pub fn max_surface_words(&self) -> usize {
        self.max_surface_words
    }

    /// Resolves one surface form. Absence is not an error.
    pub fn resolve_surface(&self, surface: &str) -> Option<SurfaceMatch> {
        let key = normalize_surface(surface);
        if key.is_empty() {
            return None;
        }
        self.lookup_normalized(&key).map(|codes| SurfaceMatch {
            surface: surface.to_string(),
            candidates: codes.to_vec(),
            ambiguous: codes.len() > 1,
        })
    }

    /// Lookup on an already-normalized key, used by the extraction scanner.
    pub fn lookup_normalized(&self, key: &str) -> Option<&[String]> {
        self.surface_index.get(key).map(Vec::as_slice)
    }

    /// Stored Global Majority flag; unknown codes are an error.
    pub fn is_global_majority(&self, code: &str) -> Result<bool> {
        self.country(code)
            .map(|c| c.global_majority)
            .ok_or_else(|| AuditError::InvalidInput(format!("unknown country code {code:?}")))
    }

    /// The full normalized surface index, for round-trip checks and exports.
    pub fn surface_index(&self) -> &BTreeMap<String, Vec<String>> {
        &self.surface_index
    }
}

/// Loads the gazetteer from its JSONL file and validates all invariants.
pub fn load_gazetteer(path: &Path) -> Result<Gazetteer> {
    let countries: Vec<Country> = storage::read_jsonl(path)?;
    if countries.is_empty() {
        return Err(AuditError::malformed(path, 0, "gazetteer file has no records"));
    }
    Gazetteer::from_countries(countries)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn country(code: &str, name: &str, demonyms: &[&str], majority: bool) -> Country {
        Country {
            code: code.into(),
            canonical_name: name.into(),
            name_aliases: vec![],
            demonyms: demonyms.iter().map(|s| s.to_string()).collect(),
            global_majority: majority,
            notes: None,
        }
    }

    fn small_gazetteer() -> Gazetteer {
        let mut congo_b = country("COG", "Republic of the Congo", &["Congolese"], true);
        congo_b.name_aliases = vec!["Congo".into(), "Congo-Brazzaville".into()];
        let mut congo_k = country(
            "COD",
            "Democratic Republic of the Congo",
            &["Congolese"],
            true,
        );
        congo_k.name_aliases = vec!["Congo".into(), "DR Congo".into()];
        Gazetteer::from_countries(vec![
            country("KEN", "Kenya", &["Kenyan"], true),
            country("CAN", "Canada", &["Canadian"], false),
            country("SSD", "South Sudan", &["South Sudanese"], true),
            congo_b,
            congo_k,
        ])
        .unwrap()
    }

    #[test]
    fn duplicate_code_rejected() {
        let err = Gazetteer::from_countries(vec![
            country("USA", "United States", &["American"], false),
            country("USA", "Usonia", &["Usonian"], false),
        ])
        .unwrap_err();
        assert!(err.to_string().contains("duplicate country code"));
    }

    #[test]
    fn empty_demonyms_rejected() {
        let err =
            Gazetteer::from_countries(vec![country("KEN", "Kenya", &[], true)]).unwrap_err();
        assert!(err.to_string().contains("no demonyms"));
    }

    #[test]
    fn overlapping_demonym_is_ambiguous() {
        let g = small_gazetteer();
        let m = g.resolve_surface("Congolese").unwrap();
        assert_eq!(m.candidates, vec!["COD", "COG"]);
        assert!(m.ambiguous);
    }

    #[test]
    fn multi_word_name_is_one_key() {
        let g = small_gazetteer();
        let m = g.resolve_surface("South Sudan").unwrap();
        assert_eq!(m.candidates, vec!["SSD"]);
        assert!(!m.ambiguous);
    }

    #[test]
    fn unknown_surface_is_no_match() {
        let g = small_gazetteer();
        assert!(g.resolve_surface("Parisian").is_none());
    }

    #[test]
    fn lookup_is_case_insensitive_and_possessive_tolerant() {
        let g = small_gazetteer();
        assert!(g.resolve_surface("KENYAN").is_some());
        assert!(g.resolve_surface("Kenya's").is_some());
    }

    #[test]
    fn majority_flag_and_unknown_code() {
        let g = small_gazetteer();
        assert!(g.is_global_majority("KEN").unwrap());
        assert!(!g.is_global_majority("CAN").unwrap());
        assert!(g.is_global_majority("ZZZ").is_err());
    }

    #[test]
    fn own_demonym_always_resolves_to_self() {
        let g = small_gazetteer();
        for c in g.countries() {
            for d in &c.demonyms {
                let m = g.resolve_surface(d).expect("demonym indexed");
                assert!(m.candidates.contains(&c.code), "{d} misses {}", c.code);
            }
        }
    }

    #[test]
    fn definite_article_rule() {
        assert_eq!(
            country("USA", "United States", &["American"], false).name_in_text(),
            "the United States"
        );
        assert_eq!(
            country("SUR", "Suriname", &["Surinamese"], true).name_in_text(),
            "Suriname"
        );
        assert_eq!(
            country("NLD", "Netherlands", &["Dutch"], false).name_in_text(),
            "the Netherlands"
        );
    }
}
