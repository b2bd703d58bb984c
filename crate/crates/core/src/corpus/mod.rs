//! Sentence corpora: tokens, tags, file formats and splits.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

mod io;
mod seeds;
mod tagger;
mod tokenize;

pub use io::{
    load_corpus, load_labeled, parse_corpus, parse_labeled, read_text, write_corpus, LabeledSentence,
    LabeledSet,
};
pub use seeds::SeedLexicon;
pub use tagger::{pos_tag, LexiconTagger, TaggerBackend, TaggerRegistry, LEXICON_BACKEND};
pub use tokenize::{detokenize, tokenize};

const BUNDLED_STOPWORDS: &str = include_str!("../../data/stopwords.txt");

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("unknown tagger backend `{0}`")]
    UnknownBackend(String),
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("split ratio must lie strictly between 0 and 1, got {0}")]
    InvalidRatio(f64),
    #[error("{what}, line {line}: {message}")]
    Format {
        what: &'static str,
        line: usize,
        message: String,
    },
    #[error("seed lexicon: {0}")]
    Seeds(String),
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Coarse part-of-speech tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PosTag {
    Noun,
    Adj,
    Verb,
    Other,
}

impl PosTag {
    /// Nouns and adjectives.
    pub fn is_keyword(self) -> bool {
        matches!(self, PosTag::Noun | PosTag::Adj)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PosTag::Noun => "NOUN",
            PosTag::Adj => "ADJ",
            PosTag::Verb => "VERB",
            PosTag::Other => "OTHER",
        }
    }
}

impl fmt::Display for PosTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PosTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "NOUN" | "NN" => Ok(PosTag::Noun),
            "ADJ" | "JJ" => Ok(PosTag::Adj),
            "VERB" | "VB" => Ok(PosTag::Verb),
            "OTHER" => Ok(PosTag::Other),
            other => Err(format!("unknown POS tag `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub pos: PosTag,
}

impl Token {
    pub fn new(surface: impl Into<String>, pos: PosTag) -> Self {
        let surface = surface.into();
        debug_assert!(!surface.is_empty());
        Self { surface, pos }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaggedSentence {
    pub id: usize,
    pub tokens: Vec<Token>,
}

impl TaggedSentence {
    pub fn new(id: usize, tokens: Vec<Token>) -> Self {
        Self { id, tokens }
    }

    /// Builds a sentence from `(surface, tag)` pairs. Handy in tests.
    pub fn from_pairs(id: usize, pairs: &[(&str, PosTag)]) -> Self {
        Self::new(
            id,
            pairs.iter().map(|(w, t)| Token::new(*w, *t)).collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn surfaces(&self) -> impl Iterator<Item = &str> + '_ {
        self.tokens.iter().map(|t| t.surface.as_str())
    }

    pub fn text(&self) -> String {
        detokenize(&self.tokens)
    }
}

/// Which part of the data a split holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitRole {
    InDomain,
    Dev,
    Bank,
    Test,
}

impl fmt::Display for SplitRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SplitRole::InDomain => "in-domain",
            SplitRole::Dev => "dev",
            SplitRole::Bank => "bank",
            SplitRole::Test => "test",
        })
    }
}

#[derive(Debug, Clone)]
pub struct CorpusSplit {
    pub role: SplitRole,
    pub sentences: Vec<TaggedSentence>,
}

impl CorpusSplit {
    pub fn new(role: SplitRole, sentences: Vec<TaggedSentence>) -> Self {
        Self { role, sentences }
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }
}

/// Sentiment polarity of an aspect term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Polarity {
    Pos,
    Neg,
}

impl Polarity {
    /// Index order used wherever polarities are scored; `Pos` wins ties.
    pub const ALL: [Polarity; 2] = [Polarity::Pos, Polarity::Neg];

    pub fn as_str(self) -> &'static str {
        match self {
            Polarity::Pos => "POS",
            Polarity::Neg => "NEG",
        }
    }

    pub fn index(self) -> usize {
        match self {
            Polarity::Pos => 0,
            Polarity::Neg => 1,
        }
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Polarity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "pos" | "positive" | "+" => Ok(Polarity::Pos),
            "neg" | "negative" | "-" => Ok(Polarity::Neg),
            other => Err(format!("unknown polarity `{other}`")),
        }
    }
}

/// A token span `[start, end)` marking an aspect term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TermSpan {
    pub start: usize,
    pub end: usize,
    pub polarity: Option<Polarity>,
}

impl TermSpan {
    pub fn new(start: usize, end: usize, polarity: Option<Polarity>) -> Self {
        debug_assert!(start < end);
        Self {
            start,
            end,
            polarity,
        }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }

    pub fn same_boundaries(&self, other: &TermSpan) -> bool {
        self.start == other.start && self.end == other.end
    }
}

/// The bundled English stopword list.
pub fn stopwords() -> std::collections::BTreeSet<String> {
    BUNDLED_STOPWORDS
        .lines()
        .map(str::trim)
        .filter(|w| !w.is_empty())
        .map(str::to_string)
        .collect()
}

/// Tokenizes and tags raw lines, numbering sentences from 0 in input order.
/// Lines that yield no tokens are skipped.
pub fn prepare_sentences<'a, I>(lines: I, tagger: &dyn TaggerBackend) -> Vec<TaggedSentence>
where
    I: IntoIterator<Item = &'a str>,
{
    lines
        .into_iter()
        .map(tokenize)
        .filter(|tokens| !tokens.is_empty())
        .enumerate()
        .map(|(id, tokens)| TaggedSentence::new(id, tagger::tag_with(&tokens, tagger)))
        .collect()
}

/// Shuffles with a seeded RNG and cuts at `round(ratio * n)`.
///
/// Returns `(in_domain, dev)`; together they are a partition of the input.
pub fn split_corpus(
    sentences: &[TaggedSentence],
    ratio: f64,
    seed: u64,
) -> Result<(Vec<TaggedSentence>, Vec<TaggedSentence>), CorpusError> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(CorpusError::InvalidRatio(ratio));
    }
    if sentences.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    let mut order: Vec<usize> = (0..sentences.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let cut = (ratio * sentences.len() as f64).round() as usize;
    let (head, tail) = order.split_at(cut);
    let take = |idx: &[usize]| {
        let mut idx = idx.to_vec();
        idx.sort_unstable();
        idx.into_iter().map(|i| sentences[i].clone()).collect::<Vec<_>>()
    };
    let first = take(head);
    let second = take(tail);
    Ok((first, second))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashSet;

    fn numbered(n: usize) -> Vec<TaggedSentence> {
        (0..n)
            .map(|i| TaggedSentence::from_pairs(i, &[("w", PosTag::Other)]))
            .collect()
    }

    #[test]
    fn split_sizes() {
        let (a, b) = split_corpus(&numbered(100), 0.85, 7).unwrap();
        assert_eq!((a.len(), b.len()), (85, 15));
        let (a, b) = split_corpus(&numbered(2), 0.5, 7).unwrap();
        assert_eq!((a.len(), b.len()), (1, 1));
    }

    #[test]
    fn split_is_deterministic() {
        let s = numbered(40);
        let first = split_corpus(&s, 0.85, 3).unwrap();
        let second = split_corpus(&s, 0.85, 3).unwrap();
        assert_eq!(first, second);
        let other = split_corpus(&s, 0.85, 4).unwrap();
        assert_ne!(first.0, other.0);
    }

    #[test]
    fn split_errors() {
        assert!(matches!(
            split_corpus(&[], 0.5, 0),
            Err(CorpusError::EmptyCorpus)
        ));
        assert!(matches!(
            split_corpus(&numbered(3), 1.0, 0),
            Err(CorpusError::InvalidRatio(_))
        ));
        assert!(matches!(
            split_corpus(&numbered(3), 0.0, 0),
            Err(CorpusError::InvalidRatio(_))
        ));
    }

    #[test]
    fn prepare_skips_blank_lines() {
        let tagger = LexiconTagger::bundled();
        let s = prepare_sentences(["Great pizza!", "   ", "rude waiter"], &tagger);
        assert_eq!(s.len(), 2);
        assert_eq!(s[1].id, 1);
        assert_eq!(s[0].tokens[1].pos, PosTag::Noun);
    }

    #[test]
    fn stopword_list_loaded() {
        let s = stopwords();
        assert!(s.contains("the"));
        assert!(!s.contains("pizza"));
    }

    proptest! {
        #[test]
        fn split_partitions_input(n in 1usize..200, ratio in 0.01f64..0.99, seed in any::<u64>()) {
            let s = numbered(n);
            let (a, b) = split_corpus(&s, ratio, seed).unwrap();
            prop_assert_eq!(a.len(), (ratio * n as f64).round() as usize);
            prop_assert_eq!(a.len() + b.len(), n);
            let ids_a: HashSet<_> = a.iter().map(|s| s.id).collect();
            let ids_b: HashSet<_> = b.iter().map(|s| s.id).collect();
            prop_assert!(ids_a.is_disjoint(&ids_b));
            prop_assert_eq!(ids_a.union(&ids_b).count(), n);
        }
    }
}
