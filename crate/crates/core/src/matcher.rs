//! Movement identification by minimum edit distance against a dictionary of
//! tempo variants.
//!
//! Distances are taken over expanded per-frame label strings, so a variant
//! `A5 B7 C12 B5 A6` is 3 edits away from `A6 B6 C10 B6 A6`. The dictionary
//! is small enough that every variant is scanned on each attempt; only the
//! inner edit-distance loop is pruned, by a diagonal band of width
//! `edit_limit` with an early exit once a whole row exceeds it.

use std::collections::{BTreeSet, HashSet};
use std::io::Read;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::label::PoseLabel;
use crate::sequencer::{PoseSequence, RleToken, SequenceError, Span, TokenSeq};

pub const DEFAULT_EDIT_LIMIT: usize = 10;

const UNKNOWN_SYMBOL: u32 = u32::MAX;

const SAMPLE_DICTIONARY: &str = include_str!("../data/movements.json");

#[derive(Debug, Error)]
pub enum MatchError {
    #[error("dictionary: {0}")]
    Json(#[from] serde_json::Error),
    #[error("dictionary: movement `{movement}`: {source}")]
    Tokens {
        movement: String,
        #[source]
        source: SequenceError,
    },
    #[error("dictionary: movement name `{0}` appears more than once")]
    DuplicateName(String),
    #[error("dictionary: movement `{movement}` has a variant using `{label}`, which its ideal sequence never uses")]
    ForeignLabel { movement: String, label: PoseLabel },
    #[error("dictionary: {0}")]
    Io(#[from] std::io::Error),
    #[error("variant scales must be non-empty, finite and positive")]
    InvalidScales,
}

/// Expands run-length tokens into one label per frame.
pub fn expand(tokens: &TokenSeq) -> Vec<PoseLabel> {
    tokens.expand()
}

/// Unit-cost edit distance, two rows of storage.
pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let (a, b) = if a.len() < b.len() { (b, a) } else { (a, b) };
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, x) in a.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let above = row[j + 1];
            row[j + 1] = if x == y { diag } else { 1 + diag.min(above).min(row[j]) };
            diag = above;
        }
    }
    row[b.len()]
}

/// Edit distance if it is at most `limit`, computed only inside the band
/// `|i - j| <= limit`. Agrees with [`levenshtein`] whenever that is `<= limit`.
pub fn levenshtein_within<T: PartialEq>(a: &[T], b: &[T], limit: usize) -> Option<usize> {
    let (n, m) = (a.len(), b.len());
    if n.abs_diff(m) > limit {
        return None;
    }
    let cap = limit + 1;
    let mut prev: Vec<usize> = (0..=m).map(|j| j.min(cap)).collect();
    let mut cur = vec![cap; m + 1];
    for i in 1..=n {
        let lo = i.saturating_sub(limit).max(1);
        let hi = (i + limit).min(m);
        cur[0] = i.min(cap);
        cur[lo - 1] = if lo == 1 { cur[0] } else { cap };
        let mut row_min = cur[lo - 1];
        for j in lo..=hi {
            let sub = prev[j - 1] + usize::from(a[i - 1] != b[j - 1]);
            let v = sub.min(prev[j] + 1).min(cur[j - 1] + 1).min(cap);
            cur[j] = v;
            row_min = row_min.min(v);
        }
        if hi < m {
            cur[hi + 1] = cap;
        }
        if row_min > limit {
            return None;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Some(prev[m]).filter(|&d| d <= limit)
}

/// One exercise: its ideal pose sequence and the tempo variants accepted for
/// it. The ideal is always the first variant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MovementEntry {
    pub name: String,
    pub ideal: TokenSeq,
    pub variants: Vec<TokenSeq>,
    /// Unordered label pairs that follow each other somewhere in the ideal,
    /// stored with the smaller label first.
    pub adjacency: BTreeSet<(PoseLabel, PoseLabel)>,
}

impl MovementEntry {
    pub fn new(name: impl Into<String>, ideal: TokenSeq, variants: Vec<TokenSeq>) -> Result<Self, MatchError> {
        let name = name.into();
        let used: HashSet<&PoseLabel> = ideal.tokens().iter().map(|t| &t.label).collect();
        for v in &variants {
            if let Some(t) = v.tokens().iter().find(|t| !used.contains(&t.label)) {
                return Err(MatchError::ForeignLabel {
                    movement: name,
                    label: t.label.clone(),
                });
            }
        }
        let mut all = vec![ideal.clone()];
        for v in variants {
            if !all.contains(&v) {
                all.push(v);
            }
        }
        let adjacency = ideal
            .tokens()
            .windows(2)
            .map(|w| ordered_pair(&w[0].label, &w[1].label))
            .collect();
        Ok(Self {
            name,
            ideal,
            variants: all,
            adjacency,
        })
    }

    pub fn is_adjacent(&self, a: &PoseLabel, b: &PoseLabel) -> bool {
        self.adjacency.contains(&ordered_pair(a, b))
    }
}

fn ordered_pair(a: &PoseLabel, b: &PoseLabel) -> (PoseLabel, PoseLabel) {
    if a <= b {
        (a.clone(), b.clone())
    } else {
        (b.clone(), a.clone())
    }
}

#[derive(Debug, Deserialize, Serialize)]
struct DictionaryFile {
    #[serde(default = "default_edit_limit")]
    edit_limit: usize,
    movements: Vec<MovementRecord>,
}

#[derive(Debug, Deserialize, Serialize)]
struct MovementRecord {
    name: String,
    ideal: String,
    #[serde(default)]
    variants: Vec<String>,
}

fn default_edit_limit() -> usize {
    DEFAULT_EDIT_LIMIT
}

/// Immutable set of movements with variants pre-expanded to symbol strings.
#[derive(Debug, Clone)]
pub struct MovementDictionary {
    entries: Vec<MovementEntry>,
    edit_limit: usize,
    alphabet: Vec<PoseLabel>,
    compiled: Vec<Vec<Vec<u32>>>,
}

impl MovementDictionary {
    pub fn new(entries: Vec<MovementEntry>, edit_limit: usize) -> Result<Self, MatchError> {
        let mut names = HashSet::new();
        for e in &entries {
            if !names.insert(e.name.as_str()) {
                return Err(MatchError::DuplicateName(e.name.clone()));
            }
        }
        let alphabet: Vec<PoseLabel> = entries
            .iter()
            .flat_map(|e| e.ideal.tokens().iter().map(|t| t.label.clone()))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let mut dict = Self {
            entries,
            edit_limit,
            alphabet,
            compiled: Vec::new(),
        };
        dict.compiled = dict
            .entries
            .iter()
            .map(|e| e.variants.iter().map(|v| dict.symbols(&v.expand())).collect())
            .collect();
        Ok(dict)
    }

    /// Parses the JSON dictionary format:
    /// `{ "edit_limit": 10, "movements": [ { "name", "ideal", "variants": [..] } ] }`.
    pub fn from_json(json: &str) -> Result<Self, MatchError> {
        let file: DictionaryFile = serde_json::from_str(json)?;
        Self::from_file(file)
    }

    /// Three example movements over the bundled A/B/C poses.
    pub fn sample() -> Self {
        Self::from_json(SAMPLE_DICTIONARY).expect("bundled dictionary is valid")
    }

    pub fn from_reader<R: Read>(reader: R) -> Result<Self, MatchError> {
        let file: DictionaryFile = serde_json::from_reader(reader)?;
        Self::from_file(file)
    }

    fn from_file(file: DictionaryFile) -> Result<Self, MatchError> {
        let mut entries = Vec::with_capacity(file.movements.len());
        for m in file.movements {
            let parse = |s: &str| {
                s.parse::<TokenSeq>().map_err(|source| MatchError::Tokens {
                    movement: m.name.clone(),
                    source,
                })
            };
            let ideal = parse(&m.ideal)?;
            let variants = m.variants.iter().map(|v| parse(v)).collect::<Result<Vec<_>, _>>()?;
            entries.push(MovementEntry::new(m.name.clone(), ideal, variants)?);
        }
        Self::new(entries, file.edit_limit)
    }

    pub fn to_json(&self) -> String {
        let file = DictionaryFile {
            edit_limit: self.edit_limit,
            movements: self
                .entries
                .iter()
                .map(|e| MovementRecord {
                    name: e.name.clone(),
                    ideal: e.ideal.to_string(),
                    variants: e.variants.iter().skip(1).map(|v| v.to_string()).collect(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("dictionary serializes")
    }

    pub fn entries(&self) -> &[MovementEntry] {
        &self.entries
    }

    pub fn edit_limit(&self) -> usize {
        self.edit_limit
    }

    pub fn with_edit_limit(mut self, edit_limit: usize) -> Self {
        self.edit_limit = edit_limit;
        self
    }

    pub fn variant_count(&self) -> usize {
        self.entries.iter().map(|e| e.variants.len()).sum()
    }

    pub fn entry(&self, name: &str) -> Option<&MovementEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    fn symbols(&self, labels: &[PoseLabel]) -> Vec<u32> {
        labels
            .iter()
            .map(|l| self.alphabet.binary_search(l).map_or(UNKNOWN_SYMBOL, |i| i as u32))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchResult {
    pub movement: String,
    pub entry_index: usize,
    pub variant: TokenSeq,
    pub variant_index: usize,
    pub distance: usize,
    pub span: Span,
}

/// Best `(distance, variant index)` of one entry within `limit`.
fn best_in_entry(query: &[u32], variants: &[Vec<u32>], limit: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for (vi, v) in variants.iter().enumerate() {
        let bound = best.map_or(limit, |(d, _)| d);
        if let Some(d) = levenshtein_within(query, v, bound) {
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, vi));
            }
        }
    }
    best
}

/// Finds the dictionary variant closest to `seq`, if one lies within the
/// dictionary's edit limit. Ties go to the earlier entry, then the earlier
/// variant.
pub fn match_movement(seq: &PoseSequence, dict: &MovementDictionary) -> Option<MatchResult> {
    let query = dict.symbols(&seq.tokens.expand());
    let limit = dict.edit_limit;

    #[cfg(feature = "parallel")]
    let per_entry: Vec<Option<(usize, usize)>> = {
        use rayon::prelude::*;
        dict.compiled
            .par_iter()
            .map(|variants| best_in_entry(&query, variants, limit))
            .collect()
    };
    #[cfg(not(feature = "parallel"))]
    let per_entry: Vec<Option<(usize, usize)>> = dict
        .compiled
        .iter()
        .map(|variants| best_in_entry(&query, variants, limit))
        .collect();

    let mut best: Option<(usize, usize, usize)> = None;
    for (ei, found) in per_entry.into_iter().enumerate() {
        if let Some((d, vi)) = found {
            if best.is_none_or(|(bd, _, _)| d < bd) {
                best = Some((d, ei, vi));
            }
        }
    }
    best.map(|(distance, ei, vi)| {
        let entry = &dict.entries[ei];
        MatchResult {
            movement: entry.name.clone(),
            entry_index: ei,
            variant: entry.variants[vi].clone(),
            variant_index: vi,
            distance,
            span: seq.span,
        }
    })
}

/// Scales every run of `ideal` by each factor, rounding half away from zero
/// with a floor of one frame. The ideal comes first; duplicates are dropped.
pub fn generate_variants(ideal: &TokenSeq, scales: &[f64]) -> Result<Vec<TokenSeq>, MatchError> {
    if scales.is_empty() || scales.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
        return Err(MatchError::InvalidScales);
    }
    let mut out = vec![ideal.clone()];
    for &s in scales {
        let tokens = ideal
            .tokens()
            .iter()
            .map(|t| RleToken::new(t.label.clone(), ((t.run as f64 * s).round() as usize).max(1)))
            .collect();
        let v = TokenSeq::new(tokens).expect("scaling preserves token structure");
        if !out.contains(&v) {
            out.push(v);
        }
    }
    Ok(out)
}
