//! Word embeddings: the table type, its text file format, and the
//! sum-of-words sentence and aspect vectors built on top of it.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::vecmath::axpy;

mod cbow;

pub use cbow::{negative_sampling_loss, negative_sampling_loss_grad, train_cbow, CbowConfig, NegativeSample};

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("no word reaches min_count {0}")]
    EmptyVocabulary(usize),
    #[error("invalid CBOW config: {0}")]
    InvalidConfig(String),
    #[error("embedding file, line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Dense vectors keyed by word, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    words: Vec<String>,
    index: HashMap<String, usize>,
    vectors: Vec<f64>,
    counts: Vec<u64>,
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Self {
        assert!(dim > 0, "embedding dimension must be positive");
        Self {
            dim,
            words: Vec::new(),
            index: HashMap::new(),
            vectors: Vec::new(),
            counts: Vec::new(),
        }
    }

    /// Builds a table from `(word, vector)` pairs with zero counts.
    pub fn from_pairs<S: Into<String>>(dim: usize, pairs: impl IntoIterator<Item = (S, Vec<f64>)>) -> Self {
        let mut table = Self::new(dim);
        for (word, vector) in pairs {
            table.insert(word, &vector, 0);
        }
        table
    }

    /// Adds or replaces `word`.
    pub fn insert(&mut self, word: impl Into<String>, vector: &[f64], count: u64) {
        assert_eq!(vector.len(), self.dim, "vector length must equal table dim");
        let word = word.into();
        if let Some(&row) = self.index.get(&word) {
            self.vectors[row * self.dim..(row + 1) * self.dim].copy_from_slice(vector);
            self.counts[row] = count;
            return;
        }
        self.index.insert(word.clone(), self.words.len());
        self.words.push(word);
        self.vectors.extend_from_slice(vector);
        self.counts.push(count);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.index
            .get(word)
            .map(|&row| &self.vectors[row * self.dim..(row + 1) * self.dim])
    }

    /// Corpus frequency recorded at training time (0 when unknown).
    pub fn count(&self, word: &str) -> u64 {
        self.index.get(word).map_or(0, |&row| self.counts[row])
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn set_counts(&mut self, counts: &HashMap<String, u64>) {
        for (word, row) in &self.index {
            self.counts[*row] = counts.get(word).copied().unwrap_or(0);
        }
    }

    /// `vocab_size dim` header, then `word v1 .. vdim` per line.
    ///
    /// Values use the shortest decimal form that parses back to the same
    /// `f64`, so a save/load cycle is exact.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.len() * self.dim * 12);
        let _ = writeln!(out, "{} {}", self.len(), self.dim);
        for (row, word) in self.words.iter().enumerate() {
            out.push_str(word);
            for v in &self.vectors[row * self.dim..(row + 1) * self.dim] {
                let _ = write!(out, " {v}");
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, EmbeddingError> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(EmbeddingError::Format {
            line: 1,
            message: "missing header".into(),
        })?;
        let header: Vec<usize> = header
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|_| EmbeddingError::Format {
                line: 1,
                message: "header must be `vocab_size dim`".into(),
            })?;
        let [size, dim] = header[..] else {
            return Err(EmbeddingError::Format {
                line: 1,
                message: "header must be `vocab_size dim`".into(),
            });
        };
        if dim == 0 {
            return Err(EmbeddingError::Format {
                line: 1,
                message: "dimension must be positive".into(),
            });
        }
        let mut table = Self::new(dim);
        let mut vector = Vec::with_capacity(dim);
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let bad = |message: String| EmbeddingError::Format {
                line: i + 1,
                message,
            };
            let mut fields = line.split_whitespace();
            let word = fields.next().expect("non-empty line has a field");
            vector.clear();
            for f in fields {
                vector.push(f.parse::<f64>().map_err(|_| bad(format!("bad value `{f}`")))?);
            }
            if vector.len() != dim {
                return Err(bad(format!("expected {dim} values, found {}", vector.len())));
            }
            if table.contains(word) {
                return Err(bad(format!("duplicate entry `{word}`")));
            }
            table.insert(word, &vector, 0);
        }
        if table.len() != size {
            return Err(EmbeddingError::Format {
                line: 1,
                message: format!("header announces {size} rows, found {}", table.len()),
            });
        }
        Ok(table)
    }

    pub fn save(&self, path: &Path) -> Result<(), EmbeddingError> {
        write_file(path, &self.to_text())
    }

    pub fn load(path: &Path) -> Result<Self, EmbeddingError> {
        Self::from_text(&read_file(path)?)
    }

    /// `word count` per line, in table order.
    pub fn vocab_text(&self) -> String {
        let mut out = String::new();
        for (word, count) in self.words.iter().zip(&self.counts) {
            let _ = writeln!(out, "{word} {count}");
        }
        out
    }

    pub fn load_vocab_counts(&mut self, text: &str) -> Result<(), EmbeddingError> {
        let mut counts = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let Some((word, count)) = line.rsplit_once(' ') else {
                continue;
            };
            let count = count.parse().map_err(|_| EmbeddingError::Format {
                line: i + 1,
                message: format!("bad count `{count}`"),
            })?;
            counts.insert(word.to_string(), count);
        }
        self.set_counts(&counts);
        Ok(())
    }
}

pub(crate) fn write_file(path: &Path, text: &str) -> Result<(), EmbeddingError> {
    fs::write(path, text).map_err(|source| EmbeddingError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub(crate) fn read_file(path: &Path) -> Result<String, EmbeddingError> {
    fs::read_to_string(path).map_err(|source| EmbeddingError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Sum of the in-vocabulary word vectors; OOV words are skipped.
pub fn sum_vectors<'a, I>(words: I, table: &EmbeddingTable) -> (Vec<f64>, usize)
where
    I: IntoIterator<Item = &'a str>,
{
    let mut acc = vec![0.0; table.dim()];
    let mut hits = 0;
    for w in words {
        if let Some(v) = table.get(w) {
            axpy(1.0, v, &mut acc);
            hits += 1;
        }
    }
    (acc, hits)
}

/// Sentence vector: the sum of its word vectors, counting repeats.
pub fn embed_sentence(sentence: &crate::TaggedSentence, table: &EmbeddingTable) -> Vec<f64> {
    sum_vectors(sentence.surfaces(), table).0
}

/// Sum of an aspect's seed vectors together with how many seeds were found.
#[derive(Debug, Clone, PartialEq)]
pub struct AspectEmbedding {
    pub vector: Vec<f64>,
    pub in_vocabulary: usize,
}

pub fn embed_aspect<'a, I>(seeds: I, table: &EmbeddingTable) -> AspectEmbedding
where
    I: IntoIterator<Item = &'a str>,
{
    let seeds: Vec<&str> = seeds.into_iter().collect();
    let (vector, in_vocabulary) = sum_vectors(seeds.iter().copied(), table);
    if in_vocabulary == 0 {
        log::warn!(
            "none of the seed words {:?} are in the embedding vocabulary; aspect vector is zero",
            seeds
        );
    }
    AspectEmbedding {
        vector,
        in_vocabulary,
    }
}
