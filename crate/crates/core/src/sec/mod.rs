//! Seed-word enhancement.
//!
//! Sentences are first labeled with the initial seeds only. Keywords (nouns
//! and adjectives) that turn up under two or more labels are boundary
//! keywords; keywords of sentences whose connection falls below `gamma` are
//! uncertain keywords. Words in both sets are mapped to an aspect by
//! clarity and become additional seeds.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::corpus::TaggedSentence;
use crate::embedding::EmbeddingTable;
use crate::pseudolabel::{acd_pseudo_label, connection, AspectLexicon};

mod clarity;

pub use clarity::{auto_map, ClarityTable, DEFAULT_EPSILON};

#[derive(Debug, Error)]
pub enum SecError {
    #[error("aspect index {0} out of range")]
    UnknownAspect(usize),
    #[error("gamma must be non-negative, got {0}")]
    InvalidGamma(f64),
    #[error("{0} sentences but {1} labels")]
    LabelMismatch(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum KeywordKind {
    Boundary,
    Uncertain,
    Intersection,
}

/// Keywords with the labels of the sentences they came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KeywordSet {
    pub kind: KeywordKind,
    /// word → (aspect → occurrences)
    pub words: BTreeMap<String, BTreeMap<usize, usize>>,
}

impl KeywordSet {
    pub fn word_set(&self) -> BTreeSet<String> {
        self.words.keys().cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains_key(word)
    }

    /// Words present in both sets; source counts are summed.
    pub fn intersect(&self, other: &KeywordSet) -> KeywordSet {
        let mut words = BTreeMap::new();
        for (w, sources) in &self.words {
            if let Some(more) = other.words.get(w) {
                let mut merged = sources.clone();
                for (a, c) in more {
                    *merged.entry(*a).or_default() += c;
                }
                words.insert(w.clone(), merged);
            }
        }
        KeywordSet {
            kind: KeywordKind::Intersection,
            words,
        }
    }
}

/// Words excluded from every keyword set.
#[derive(Debug, Clone, Default)]
pub struct KeywordFilter {
    pub initial_seeds: BTreeSet<String>,
    pub stopwords: BTreeSet<String>,
}

impl KeywordFilter {
    /// Excludes initial aspect seeds, polarity seeds and `stopwords`.
    pub fn new(lexicon: &AspectLexicon, stopwords: BTreeSet<String>) -> Self {
        let mut initial_seeds = lexicon.all_initial();
        for p in crate::corpus::Polarity::ALL {
            initial_seeds.extend(lexicon.polarity_seeds(p).iter().cloned());
        }
        Self {
            initial_seeds,
            stopwords,
        }
    }

    fn keeps(&self, word: &str) -> bool {
        !self.initial_seeds.contains(word) && !self.stopwords.contains(word)
    }
}

fn keywords_by_label<'a, I>(labeled: I, filter: &KeywordFilter) -> BTreeMap<String, BTreeMap<usize, usize>>
where
    I: IntoIterator<Item = (&'a TaggedSentence, usize)>,
{
    let mut words: BTreeMap<String, BTreeMap<usize, usize>> = BTreeMap::new();
    for (sentence, label) in labeled {
        for t in sentence.tokens.iter().filter(|t| t.pos.is_keyword()) {
            if filter.keeps(&t.surface) {
                *words
                    .entry(t.surface.clone())
                    .or_default()
                    .entry(label)
                    .or_default() += 1;
            }
        }
    }
    words
}

/// Keywords that occur in sentences of at least two different labels.
pub fn boundary_keywords(
    sentences: &[TaggedSentence],
    labels: &[usize],
    filter: &KeywordFilter,
) -> Result<KeywordSet, SecError> {
    if sentences.len() != labels.len() {
        return Err(SecError::LabelMismatch(sentences.len(), labels.len()));
    }
    let mut words = keywords_by_label(sentences.iter().zip(labels.iter().copied()), filter);
    words.retain(|_, sources| sources.len() >= 2);
    Ok(KeywordSet {
        kind: KeywordKind::Boundary,
        words,
    })
}

/// Every keyword of the uncertain sentences.
pub fn uncertain_keywords(
    uncertain: &[TaggedSentence],
    labels: &[usize],
    filter: &KeywordFilter,
) -> Result<KeywordSet, SecError> {
    if uncertain.len() != labels.len() {
        return Err(SecError::LabelMismatch(uncertain.len(), labels.len()));
    }
    Ok(KeywordSet {
        kind: KeywordKind::Uncertain,
        words: keywords_by_label(uncertain.iter().zip(labels.iter().copied()), filter),
    })
}

/// Every intermediate result of one enhancement run.
#[derive(Debug, Clone)]
pub struct SecTrace {
    /// Labels from the initial seeds, one per input sentence.
    pub labels: Vec<usize>,
    pub connections: Vec<f64>,
    pub boundary: KeywordSet,
    /// Positions (into the input) of sentences with connection below gamma.
    pub uncertain: Vec<usize>,
    pub uncertain_keywords: KeywordSet,
    pub intersection: KeywordSet,
    pub clarity: ClarityTable,
    /// Additional seeds: word → aspect index.
    pub mapped: BTreeMap<String, usize>,
}

impl SecTrace {
    pub fn uncertain_ids(&self, sentences: &[TaggedSentence]) -> Vec<usize> {
        self.uncertain.iter().map(|&i| sentences[i].id).collect()
    }
}

/// Runs seed enhancement once over `sentences` using the initial seeds of `lexicon`.
pub fn enhance_seed_words(
    sentences: &[TaggedSentence],
    lexicon: &AspectLexicon,
    gamma: f64,
    table: &EmbeddingTable,
    stopwords: &BTreeSet<String>,
) -> Result<SecTrace, SecError> {
    if gamma.is_nan() || gamma < 0.0 {
        return Err(SecError::InvalidGamma(gamma));
    }
    let initial = lexicon.initial_only();
    let space = initial.aspect_space(table);

    let mut labels = Vec::with_capacity(sentences.len());
    let mut connections = Vec::with_capacity(sentences.len());
    for s in sentences {
        let words: Vec<&str> = s.surfaces().collect();
        let scores = space.similarity(&words, table);
        labels.push(acd_pseudo_label(&scores));
        connections.push(connection(&scores));
    }

    let filter = KeywordFilter::new(lexicon, stopwords.clone());
    let boundary = boundary_keywords(sentences, &labels, &filter)?;

    let uncertain: Vec<usize> = (0..sentences.len())
        .filter(|&i| connections[i] < gamma)
        .collect();
    let uncertain_sentences: Vec<TaggedSentence> =
        uncertain.iter().map(|&i| sentences[i].clone()).collect();
    let uncertain_labels: Vec<usize> = uncertain.iter().map(|&i| labels[i]).collect();
    let uncertain_kw = uncertain_keywords(&uncertain_sentences, &uncertain_labels, &filter)?;

    let intersection = boundary.intersect(&uncertain_kw);
    let clarity = ClarityTable::build(sentences, &labels, lexicon.len(), DEFAULT_EPSILON);
    let mapped = auto_map(&intersection.word_set(), &clarity);

    log::info!(
        "seed enhancement: {} boundary, {} uncertain sentences, {} uncertain keywords, {} shared, {} mapped",
        boundary.len(),
        uncertain.len(),
        uncertain_kw.len(),
        intersection.len(),
        mapped.len()
    );

    Ok(SecTrace {
        labels,
        connections,
        boundary,
        uncertain,
        uncertain_keywords: uncertain_kw,
        intersection,
        clarity,
        mapped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::PosTag;
    use rand::{Rng, SeedableRng};

    const N: PosTag = PosTag::Noun;
    const A: PosTag = PosTag::Adj;
    const O: PosTag = PosTag::Other;

    fn filter() -> KeywordFilter {
        KeywordFilter {
            initial_seeds: ["pizza", "waiter"].iter().map(|w| w.to_string()).collect(),
            stopwords: ["the"].iter().map(|w| w.to_string()).collect(),
        }
    }

    #[test]
    fn boundary_rule() {
        let sentences = vec![
            TaggedSentence::from_pairs(0, &[("pizza", N), ("music", N), ("cheese", N)]),
            TaggedSentence::from_pairs(1, &[("waiter", N), ("music", N), ("the", N)]),
            TaggedSentence::from_pairs(2, &[("pizza", N), ("cheese", N), ("the", N)]),
        ];
        let tb = boundary_keywords(&sentences, &[0, 1, 0], &filter()).unwrap();
        assert_eq!(tb.word_set(), ["music".to_string()].into_iter().collect());
        assert_eq!(tb.words["music"], BTreeMap::from([(0, 1), (1, 1)]));
        assert!(matches!(
            boundary_keywords(&sentences, &[0], &filter()),
            Err(SecError::LabelMismatch(3, 1))
        ));
    }

    #[test]
    fn uncertain_rule() {
        let none = uncertain_keywords(&[], &[], &filter()).unwrap();
        assert!(none.is_empty());
        let s = TaggedSentence::from_pairs(
            0,
            &[("the", O), ("martinis", N), ("were", PosTag::Verb), ("odd", A)],
        );
        let tu = uncertain_keywords(&[s], &[2], &filter()).unwrap();
        assert_eq!(
            tu.word_set(),
            ["martinis", "odd"].iter().map(|w| w.to_string()).collect()
        );
    }

    /// Brute force: per label, collect keyword sets, then keep words seen under two labels.
    fn brute_force_boundary(sentences: &[TaggedSentence], labels: &[usize], f: &KeywordFilter) -> BTreeSet<String> {
        let k = labels.iter().max().map_or(0, |m| m + 1);
        let per_label: Vec<BTreeSet<String>> = (0..k)
            .map(|a| {
                sentences
                    .iter()
                    .zip(labels)
                    .filter(|(_, l)| **l == a)
                    .flat_map(|(s, _)| s.tokens.iter())
                    .filter(|t| matches!(t.pos, PosTag::Noun | PosTag::Adj))
                    .map(|t| t.surface.clone())
                    .filter(|w| !f.initial_seeds.contains(w) && !f.stopwords.contains(w))
                    .collect()
            })
            .collect();
        let mut out = BTreeSet::new();
        for i in 0..k {
            for j in i + 1..k {
                out.extend(per_label[i].intersection(&per_label[j]).cloned());
            }
        }
        out
    }

    #[test]
    fn boundary_matches_brute_force_on_random_fixture() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let vocab = [
            ("pizza", N), ("waiter", N), ("music", N), ("cheese", N), ("staff", N),
            ("cozy", A), ("the", O), ("was", PosTag::Verb), ("light", A), ("light", O),
            ("decor", N), ("wine", N),
        ];
        let sentences: Vec<TaggedSentence> = (0..50)
            .map(|id| {
                let len = rng.gen_range(1..8);
                let pairs: Vec<_> = (0..len).map(|_| vocab[rng.gen_range(0..vocab.len())]).collect();
                TaggedSentence::from_pairs(id, &pairs)
            })
            .collect();
        let labels: Vec<usize> = (0..50).map(|_| rng.gen_range(0..3)).collect();
        let f = filter();
        let ours = boundary_keywords(&sentences, &labels, &f).unwrap().word_set();
        assert_eq!(ours, brute_force_boundary(&sentences, &labels, &f));
        assert!(!ours.is_empty());
    }

    fn planted() -> (Vec<TaggedSentence>, AspectLexicon, EmbeddingTable) {
        let table = EmbeddingTable::from_pairs(
            2,
            [
                ("pizza", vec![1.0, 0.0]),
                ("waiter", vec![0.0, 1.0]),
                ("music", vec![0.5, 0.5]),
                ("loud", vec![0.2, 0.2]),
            ],
        );
        let lexicon = AspectLexicon::new(
            vec![
                ("food".into(), ["pizza".to_string()].into()),
                ("service".into(), ["waiter".to_string()].into()),
            ],
            [["good".to_string()].into(), ["bad".to_string()].into()],
        )
        .unwrap();
        let sentences = vec![
            TaggedSentence::from_pairs(0, &[("pizza", N), ("music", N)]),
            TaggedSentence::from_pairs(1, &[("waiter", N), ("music", N)]),
            TaggedSentence::from_pairs(2, &[("music", N), ("loud", A)]),
        ];
        (sentences, lexicon, table)
    }

    #[test]
    fn gamma_zero_maps_nothing() {
        let (sentences, lexicon, table) = planted();
        let trace = enhance_seed_words(&sentences, &lexicon, 0.0, &table, &BTreeSet::new()).unwrap();
        assert!(trace.uncertain.is_empty());
        assert!(trace.intersection.is_empty());
        assert!(trace.mapped.is_empty());
        assert!(matches!(
            enhance_seed_words(&sentences, &lexicon, -1.0, &table, &BTreeSet::new()),
            Err(SecError::InvalidGamma(_))
        ));
    }

    #[test]
    fn no_boundary_keywords_maps_nothing() {
        let (_, lexicon, table) = planted();
        let sentences = vec![
            TaggedSentence::from_pairs(0, &[("pizza", N), ("cheese", N)]),
            TaggedSentence::from_pairs(1, &[("waiter", N), ("staff", N)]),
        ];
        let trace = enhance_seed_words(&sentences, &lexicon, 1e9, &table, &BTreeSet::new()).unwrap();
        assert_eq!(trace.uncertain.len(), 2);
        assert!(trace.boundary.is_empty());
        assert!(trace.mapped.is_empty());
    }

    #[test]
    fn trace_invariants() {
        let (sentences, lexicon, table) = planted();
        let trace = enhance_seed_words(&sentences, &lexicon, 0.5, &table, &BTreeSet::new()).unwrap();
        // s2 = music+loud = (0.7, 0.7): dot-product tie, connection 0
        assert_eq!(trace.uncertain, vec![2]);
        let t = trace.intersection.word_set();
        assert!(t.is_subset(&trace.boundary.word_set()));
        assert!(t.is_subset(&trace.uncertain_keywords.word_set()));
        let mapped: BTreeSet<String> = trace.mapped.keys().cloned().collect();
        assert!(mapped.is_subset(&t));
        assert!(mapped.is_disjoint(&lexicon.all_initial()));
        let again = enhance_seed_words(&sentences, &lexicon, 0.5, &table, &BTreeSet::new()).unwrap();
        assert_eq!(again.mapped, trace.mapped);
        assert_eq!(again.boundary, trace.boundary);
    }
}
