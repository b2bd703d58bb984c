//! Retrieval-based augmentation.
//!
//! Prior knowledge about the task (every seed word, every in-domain sentence
//! with a certain pseudo-label) is encoded into query vectors. Each query
//! pulls its `k` nearest bank sentences by cosine similarity; the union is
//! pseudo-labeled with the enhanced lexicon and filtered by connection.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::cmp::Ordering;

use serde::Serialize;
use thiserror::Error;

use crate::corpus::{SplitRole, TaggedSentence};
use crate::embedding::EmbeddingError;
use crate::pseudolabel::{AspectLexicon, PseudoLabeledSentence, PseudoLabeler};
use crate::vecmath::dot;

mod encoder;

pub use encoder::{EncoderInput, PrecomputedEncoder, SentenceEncoder, WordSumEncoder};

#[derive(Debug, Error)]
pub enum RetrievalError {
    #[error("no seed word or certain sentence could be encoded")]
    EmptyPriorKnowledge,
    #[error("the data bank is empty")]
    EmptyBank,
    #[error("k must lie in 1..={bank}, got {k}")]
    InvalidK { k: usize, bank: usize },
    #[error("no precomputed vector for `{0}`")]
    MissingVector(String),
    #[error("encoder returned a {got}-dim vector, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum QuerySource {
    Seed { aspect: usize, word: String },
    Sentence { id: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaskQuery {
    pub vector: Vec<f64>,
    pub source: QuerySource,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaskEmbeddingSet {
    pub queries: Vec<TaskQuery>,
    /// Seeds or sentences the encoder had nothing to say about.
    pub skipped: usize,
}

impl TaskEmbeddingSet {
    pub fn len(&self) -> usize {
        self.queries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queries.is_empty()
    }
}

fn checked(v: Vec<f64>, dim: usize) -> Result<Vec<f64>, RetrievalError> {
    if v.len() != dim {
        return Err(RetrievalError::DimensionMismatch {
            expected: dim,
            got: v.len(),
        });
    }
    Ok(v)
}

/// One query per (aspect, seed word) pair, then one per certain sentence.
pub fn build_task_embeddings(
    lexicon: &AspectLexicon,
    certain: &[TaggedSentence],
    encoder: &dyn SentenceEncoder,
) -> Result<TaskEmbeddingSet, RetrievalError> {
    let mut queries = Vec::new();
    let mut skipped = 0;
    for (aspect, seeds) in lexicon.aspects().iter().enumerate() {
        for word in seeds.all() {
            match encoder.encode(EncoderInput::Phrase(&word))? {
                Some(v) => queries.push(TaskQuery {
                    vector: checked(v, encoder.dim())?,
                    source: QuerySource::Seed { aspect, word },
                }),
                None => skipped += 1,
            }
        }
    }
    for s in certain {
        let input = EncoderInput::Sentence {
            role: SplitRole::InDomain,
            sentence: s,
        };
        match encoder.encode(input)? {
            Some(v) => queries.push(TaskQuery {
                vector: checked(v, encoder.dim())?,
                source: QuerySource::Sentence { id: s.id },
            }),
            None => skipped += 1,
        }
    }
    if queries.is_empty() {
        return Err(RetrievalError::EmptyPriorKnowledge);
    }
    if skipped > 0 {
        log::warn!("{skipped} prior-knowledge items could not be encoded and were skipped");
    }
    Ok(TaskEmbeddingSet { queries, skipped })
}

/// Unit vectors for the bank, searched exhaustively.
#[derive(Debug, Clone)]
pub struct RetrievalIndex {
    dim: usize,
    ids: Vec<usize>,
    vectors: Vec<f64>,
}

/// Higher score first, then lower id.
fn rank(a: &(usize, f64), b: &(usize, f64)) -> Ordering {
    b.1.partial_cmp(&a.1)
        .unwrap_or(Ordering::Equal)
        .then_with(|| a.0.cmp(&b.0))
}

impl RetrievalIndex {
    /// Encodes every bank sentence; those the encoder cannot represent are left out.
    pub fn build(bank: &[TaggedSentence], encoder: &dyn SentenceEncoder) -> Result<Self, RetrievalError> {
        let mut index = Self {
            dim: encoder.dim(),
            ids: Vec::with_capacity(bank.len()),
            vectors: Vec::with_capacity(bank.len() * encoder.dim()),
        };
        for s in bank {
            let input = EncoderInput::Sentence {
                role: SplitRole::Bank,
                sentence: s,
            };
            if let Some(v) = encoder.encode(input)? {
                index.push(s.id, &checked(v, index.dim)?);
            }
        }
        Ok(index)
    }

    /// Builds directly from `(id, unit vector)` pairs.
    pub fn from_vectors(dim: usize, items: impl IntoIterator<Item = (usize, Vec<f64>)>) -> Self {
        let mut index = Self {
            dim,
            ids: Vec::new(),
            vectors: Vec::new(),
        };
        for (id, v) in items {
            index.push(id, &v);
        }
        index
    }

    fn push(&mut self, id: usize, v: &[f64]) {
        assert_eq!(v.len(), self.dim);
        self.ids.push(id);
        self.vectors.extend_from_slice(v);
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The `k` best `(id, cosine)` pairs for a unit query, best first.
    pub fn search(&self, query: &[f64], k: usize) -> Result<Vec<(usize, f64)>, RetrievalError> {
        if self.is_empty() {
            return Err(RetrievalError::EmptyBank);
        }
        if k == 0 || k > self.len() {
            return Err(RetrievalError::InvalidK { k, bank: self.len() });
        }
        let mut scored: Vec<(usize, f64)> = self
            .ids
            .iter()
            .zip(self.vectors.chunks_exact(self.dim))
            .map(|(&id, v)| (id, dot(query, v)))
            .collect();
        if k < scored.len() {
            scored.select_nth_unstable_by(k - 1, rank);
            scored.truncate(k);
        }
        scored.sort_by(rank);
        Ok(scored)
    }
}

/// A retrieved bank sentence and the queries (by position) that found it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Candidate {
    pub id: usize,
    pub queries: Vec<usize>,
}

/// Union of every query's top-`k`, deduplicated and sorted by id.
pub fn knn_retrieve(
    index: &RetrievalIndex,
    queries: &TaskEmbeddingSet,
    k: usize,
) -> Result<Vec<Candidate>, RetrievalError> {
    let mut found: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (qi, q) in queries.queries.iter().enumerate() {
        for (id, _) in index.search(&q.vector, k)? {
            found.entry(id).or_default().push(qi);
        }
    }
    Ok(found
        .into_iter()
        .map(|(id, queries)| Candidate { id, queries })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AugmentedSentence {
    pub labeled: PseudoLabeledSentence,
    pub origins: Vec<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct AugmentedSet {
    pub items: Vec<AugmentedSentence>,
    pub dropped_uncertain: usize,
    /// Candidates whose text duplicates an in-domain sentence.
    pub dropped_in_domain: usize,
}

impl AugmentedSet {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn ids(&self) -> BTreeSet<usize> {
        self.items.iter().map(|a| a.labeled.sentence.id).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AugmentOptions {
    pub gamma: f64,
    /// When false, candidates are kept whatever their connection.
    pub filter_uncertain: bool,
}

/// Pseudo-labels retrieved bank sentences and drops the uncertain ones.
pub fn label_augmented(
    candidates: &[Candidate],
    bank: &[TaggedSentence],
    in_domain: &[TaggedSentence],
    labeler: &PseudoLabeler<'_>,
    options: AugmentOptions,
) -> AugmentedSet {
    let by_id: HashMap<usize, &TaggedSentence> = bank.iter().map(|s| (s.id, s)).collect();
    let in_domain_text: HashSet<String> = in_domain.iter().map(TaggedSentence::text).collect();
    let mut out = AugmentedSet::default();
    for c in candidates {
        let Some(sentence) = by_id.get(&c.id) else {
            log::warn!("retrieved id {} is not in the bank", c.id);
            continue;
        };
        if in_domain_text.contains(&sentence.text()) {
            out.dropped_in_domain += 1;
            continue;
        }
        let labeled = labeler.label(sentence);
        if options.filter_uncertain && labeled.connection < options.gamma {
            out.dropped_uncertain += 1;
            continue;
        }
        out.items.push(AugmentedSentence {
            labeled,
            origins: c.queries.clone(),
        });
    }
    out
}

/// Convenience for the common path: encode, index, query and label.
pub struct Augmenter<'a> {
    pub encoder: &'a dyn SentenceEncoder,
    pub k: usize,
    pub options: AugmentOptions,
}

impl Augmenter<'_> {
    pub fn run(
        &self,
        lexicon: &AspectLexicon,
        certain: &[TaggedSentence],
        in_domain: &[TaggedSentence],
        bank: &[TaggedSentence],
        labeler: &PseudoLabeler<'_>,
    ) -> Result<(TaskEmbeddingSet, Vec<Candidate>, AugmentedSet), RetrievalError> {
        let queries = build_task_embeddings(lexicon, certain, self.encoder)?;
        let index = RetrievalIndex::build(bank, self.encoder)?;
        let k = self.k.min(index.len());
        let candidates = knn_retrieve(&index, &queries, k)?;
        let augmented = label_augmented(&candidates, bank, in_domain, labeler, self.options);
        Ok((queries, candidates, augmented))
    }
}
