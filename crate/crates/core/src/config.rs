//! Pipeline configuration: one TOML file with a section per stage.
//!
//! Any key can be overridden from the environment as
//! `ASEM_<SECTION>__<KEY>`, e.g. `ASEM_RETRIEVAL__K=0`. Override values are
//! read as TOML literals when they parse as one and as strings otherwise.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifier::MultitaskConfig;
use crate::embedding::CbowConfig;
use crate::pseudolabel::LabelingConfig;
use crate::retrieval::{PrecomputedEncoder, WordSumEncoder};

pub const ENV_PREFIX: &str = "ASEM_";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config syntax: {0}")]
    Syntax(String),
    #[error("environment override {key}: {message}")]
    Override { key: String, message: String },
    #[error("invalid value for {key}: {message}")]
    Invalid { key: String, message: String },
}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        message: message.into(),
    }
}

/// Input and output locations. Relative paths resolve against the config
/// file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathsConfig {
    /// In-domain raw sentences, one per line.
    pub corpus: PathBuf,
    /// Unlabeled data bank, one sentence per line. Optional when `retrieval.k = 0`.
    #[serde(default)]
    pub bank: Option<PathBuf>,
    /// Labeled test split.
    pub test: PathBuf,
    pub seeds: PathBuf,
    pub output: PathBuf,
    /// Extra `word<TAB>TAG` entries for the lexicon tagger.
    #[serde(default)]
    pub pos_lexicon: Option<PathBuf>,
    /// Pretrained word vectors; CBOW is trained when absent.
    #[serde(default)]
    pub embeddings: Option<PathBuf>,
    /// Sentence vectors for the `precomputed` retrieval encoder.
    #[serde(default)]
    pub sentence_vectors: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusConfig {
    pub tagger: String,
    /// Share of the in-domain corpus used for training; the rest is dev.
    pub split_ratio: f64,
    pub split_seed: u64,
    /// Also train word vectors on the data bank.
    pub embed_bank: bool,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        Self {
            tagger: crate::corpus::LEXICON_BACKEND.to_string(),
            split_ratio: 0.85,
            split_seed: 13,
            embed_bank: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterConfig {
    /// Connection threshold; useful values fall within [0, 700].
    pub gamma: f64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self { gamma: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SecConfig {
    /// When false no seed words are added (the "-SEC" ablation).
    pub enabled: bool,
}

impl Default for SecConfig {
    fn default() -> Self {
        Self { enabled: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RetrievalConfig {
    /// Neighbours per query, tuned within [1, 20]; 0 disables augmentation.
    pub k: usize,
    /// Drop retrieved sentences whose connection is below gamma.
    pub filter_uncertain: bool,
    pub encoder: String,
}

impl Default for RetrievalConfig {
    fn default() -> Self {
        Self {
            k: 10,
            filter_uncertain: true,
            encoder: WordSumEncoder::ID.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// One classifier is trained per seed; the report gives each and the mean.
    pub seeds: Vec<u64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self { seeds: vec![1] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub paths: PathsConfig,
    #[serde(default)]
    pub corpus: CorpusConfig,
    #[serde(default)]
    pub embedding: CbowConfig,
    #[serde(default)]
    pub labeling: LabelingConfig,
    #[serde(default)]
    pub filter: FilterConfig,
    #[serde(default)]
    pub sec: SecConfig,
    #[serde(default)]
    pub retrieval: RetrievalConfig,
    #[serde(default)]
    pub classifier: MultitaskConfig,
    #[serde(default)]
    pub run: RunConfig,
}

/// Parses `raw` as a TOML value, falling back to a string.
fn override_value(raw: &str) -> toml::Value {
    let probe = format!("v = {raw}");
    match probe.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.to_string())),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

fn apply_overrides<I>(table: &mut toml::Table, env: I) -> Result<(), ConfigError>
where
    I: IntoIterator<Item = (String, String)>,
{
    let mut pairs: Vec<(String, String)> = env.into_iter().filter(|(k, _)| k.starts_with(ENV_PREFIX)).collect();
    pairs.sort();
    for (key, raw) in pairs {
        let rest = &key[ENV_PREFIX.len()..];
        let Some((section, field)) = rest.split_once("__") else {
            return Err(ConfigError::Override {
                key,
                message: "expected ASEM_<SECTION>__<KEY>".into(),
            });
        };
        let (section, field) = (section.to_ascii_lowercase(), field.to_ascii_lowercase());
        let entry = table
            .entry(section.clone())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        let Some(sec) = entry.as_table_mut() else {
            return Err(ConfigError::Override {
                key,
                message: format!("{section} is not a section"),
            });
        };
        log::info!("config override {section}.{field} from environment");
        sec.insert(field, override_value(&raw));
    }
    Ok(())
}

impl PipelineConfig {
    /// Parses, applies overrides from `env`, resolves paths against `base`
    /// and validates.
    pub fn from_toml<I>(text: &str, base: &Path, env: I) -> Result<Self, ConfigError>
    where
        I: IntoIterator<Item = (String, String)>,
    {
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError::Syntax(e.to_string()))?;
        apply_overrides(&mut table, env)?;
        let mut cfg: PipelineConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| ConfigError::Syntax(e.to_string()))?;
        cfg.resolve_paths(base);
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads `path` with overrides from the process environment.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&text, base, std::env::vars())
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        let p = &mut self.paths;
        fix(&mut p.corpus);
        fix(&mut p.test);
        fix(&mut p.seeds);
        fix(&mut p.output);
        for opt in [&mut p.bank, &mut p.pos_lexicon, &mut p.embeddings, &mut p.sentence_vectors] {
            if let Some(x) = opt.as_mut() {
                fix(x);
            }
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let c = &self.corpus;
        if !(c.split_ratio > 0.0 && c.split_ratio <= 1.0) {
            return Err(invalid("corpus.split_ratio", "must lie in (0, 1]"));
        }
        self.embedding
            .validate()
            .map_err(|e| invalid("embedding", e.to_string()))?;
        if !(self.filter.gamma >= 0.0 && self.filter.gamma.is_finite()) {
            return Err(invalid("filter.gamma", "must be a non-negative number"));
        }
        let r = &self.retrieval;
        if r.encoder != WordSumEncoder::ID && r.encoder != PrecomputedEncoder::ID {
            return Err(invalid("retrieval.encoder", format!("unknown encoder {:?}", r.encoder)));
        }
        if r.k > 0 && self.paths.bank.is_none() {
            return Err(invalid("paths.bank", "required when retrieval.k > 0"));
        }
        if r.k > 0 && r.encoder == PrecomputedEncoder::ID && self.paths.sentence_vectors.is_none() {
            return Err(invalid("paths.sentence_vectors", "required by the precomputed encoder"));
        }
        self.classifier
            .validate()
            .map_err(|e| invalid("classifier", e.to_string()))?;
        if self.run.seeds.is_empty() {
            return Err(invalid("run.seeds", "needs at least one seed"));
        }
        Ok(())
    }

    /// TOML text of one section, used to hash stages.
    pub fn section_text<T: Serialize>(section: &T) -> String {
        toml::to_string(section).expect("config section serializes")
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
