//! Engine constants, loadable from a TOML file and `KINESEQ_*` environment
//! variables.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifier::{DEFAULT_K, DEFAULT_NULL_THRESHOLD, DEFAULT_POSITION_SCALE};
use crate::matcher::DEFAULT_EDIT_LIMIT;
use crate::scorer::DEFAULT_SEGMENT_LEN;
use crate::sequencer::{DEFAULT_CAPACITY, DEFAULT_FRAME_PERIOD_MS, DEFAULT_SEPARATOR_LEN};

pub const ENV_PREFIX: &str = "KINESEQ_";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config file: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("{key}: cannot parse `{value}`")]
    BadValue { key: String, value: String },
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("{key} must be {rule}")]
    OutOfRange { key: &'static str, rule: &'static str },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    pub frame_period_ms: u64,
    pub buffer_capacity: usize,
    pub null_threshold: f64,
    pub separator_len: usize,
    pub k: usize,
    pub edit_limit: usize,
    pub segment_len: usize,
    /// Weight of the position flag when synthetic datasets are written.
    /// Loaded datasets carry their own scale.
    pub position_scale: f64,
    /// Frames with any keypoint scored below this become NULL.
    pub min_keypoint_score: f64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            frame_period_ms: DEFAULT_FRAME_PERIOD_MS,
            buffer_capacity: DEFAULT_CAPACITY,
            null_threshold: DEFAULT_NULL_THRESHOLD,
            separator_len: DEFAULT_SEPARATOR_LEN,
            k: DEFAULT_K,
            edit_limit: DEFAULT_EDIT_LIMIT,
            segment_len: DEFAULT_SEGMENT_LEN,
            position_scale: DEFAULT_POSITION_SCALE,
            min_keypoint_score: 0.0,
        }
    }
}

pub const CONFIG_KEYS: [&str; 9] = [
    "frame_period_ms",
    "buffer_capacity",
    "null_threshold",
    "separator_len",
    "k",
    "edit_limit",
    "segment_len",
    "position_scale",
    "min_keypoint_score",
];

impl EngineConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
            value.trim().parse().map_err(|_| ConfigError::BadValue {
                key: key.to_string(),
                value: value.to_string(),
            })
        }
        match key {
            "frame_period_ms" => self.frame_period_ms = parse(key, value)?,
            "buffer_capacity" => self.buffer_capacity = parse(key, value)?,
            "null_threshold" => self.null_threshold = parse(key, value)?,
            "separator_len" => self.separator_len = parse(key, value)?,
            "k" => self.k = parse(key, value)?,
            "edit_limit" => self.edit_limit = parse(key, value)?,
            "segment_len" => self.segment_len = parse(key, value)?,
            "position_scale" => self.position_scale = parse(key, value)?,
            "min_keypoint_score" => self.min_keypoint_score = parse(key, value)?,
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Applies `KINESEQ_<KEY>` variables, e.g. `KINESEQ_EDIT_LIMIT=12`.
    /// Variables with the prefix but no matching key are rejected.
    pub fn apply_env<I, K, V>(&mut self, vars: I) -> Result<(), ConfigError>
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: AsRef<str>,
    {
        for (k, v) in vars {
            if let Some(key) = k.as_ref().strip_prefix(ENV_PREFIX) {
                let key = key.to_ascii_lowercase();
                if CONFIG_KEYS.contains(&key.as_str()) {
                    self.set(&key, v.as_ref())?;
                }
            }
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = |ok: bool, key| {
            if ok {
                Ok(())
            } else {
                Err(ConfigError::OutOfRange { key, rule: "positive" })
            }
        };
        positive(self.frame_period_ms > 0, "frame_period_ms")?;
        positive(self.buffer_capacity > 0, "buffer_capacity")?;
        positive(self.separator_len > 0, "separator_len")?;
        positive(self.k > 0, "k")?;
        positive(self.edit_limit > 0, "edit_limit")?;
        positive(self.segment_len > 0, "segment_len")?;
        positive(
            self.position_scale.is_finite() && self.position_scale > 0.0,
            "position_scale",
        )?;
        if !(0.0..=1.0).contains(&self.null_threshold) {
            return Err(ConfigError::OutOfRange {
                key: "null_threshold",
                rule: "within [0, 1]",
            });
        }
        if !(0.0..=1.0).contains(&self.min_keypoint_score) {
            return Err(ConfigError::OutOfRange {
                key: "min_keypoint_score",
                rule: "within [0, 1]",
            });
        }
        Ok(())
    }
}
