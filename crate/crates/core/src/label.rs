use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Reserved spelling for a NULL run in token syntax.
pub const NULL_TOKEN: &str = "NULL";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LabelError {
    #[error("empty pose label")]
    Empty,
    #[error("pose label `{0}` must consist of ASCII letters or underscores")]
    InvalidChar(String),
    #[error("`NULL` is reserved and cannot be used as a pose label")]
    Reserved,
}

/// A pose class identifier such as `A` or `squat_low`.
///
/// Labels are ASCII letters and underscores only, so that a label followed
/// by a run length (`C10`) always splits unambiguously.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct PoseLabel(String);

impl PoseLabel {
    pub fn new(s: impl Into<String>) -> Result<Self, LabelError> {
        let s = s.into();
        if s.is_empty() {
            return Err(LabelError::Empty);
        }
        if s == NULL_TOKEN {
            return Err(LabelError::Reserved);
        }
        if !s.chars().all(|c| c.is_ascii_alphabetic() || c == '_') {
            return Err(LabelError::InvalidChar(s));
        }
        Ok(Self(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for PoseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for PoseLabel {
    type Err = LabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PoseLabel::new(s)
    }
}

impl TryFrom<String> for PoseLabel {
    type Error = LabelError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        PoseLabel::new(s)
    }
}

impl From<PoseLabel> for String {
    fn from(l: PoseLabel) -> String {
        l.0
    }
}

/// Splits a `C10`-style token into its label part and run length.
pub(crate) fn split_token(token: &str) -> Option<(&str, usize)> {
    let digits = token.find(|c: char| c.is_ascii_digit())?;
    let (label, run) = token.split_at(digits);
    if label.is_empty() || !run.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    Some((label, run.parse().ok()?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_validation() {
        assert!(PoseLabel::new("A").is_ok());
        assert!(PoseLabel::new("squat_low").is_ok());
        assert_eq!(PoseLabel::new(""), Err(LabelError::Empty));
        assert_eq!(PoseLabel::new("NULL"), Err(LabelError::Reserved));
        assert!(matches!(PoseLabel::new("A1"), Err(LabelError::InvalidChar(_))));
    }

    #[test]
    fn token_split() {
        assert_eq!(split_token("C10"), Some(("C", 10)));
        assert_eq!(split_token("NULL7"), Some(("NULL", 7)));
        assert_eq!(split_token("10"), None);
        assert_eq!(split_token("C"), None);
        assert_eq!(split_token("C1x"), None);
    }
}
