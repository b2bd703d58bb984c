//! Pseudo-labels for the three tasks from seed words alone.
//!
//! Aspect labels come from the piecewise seed similarity and an argmax;
//! the gap between the two best scores (the connection) measures how sure
//! that label is. Term tags mark frequent nouns and each term's polarity
//! comes from the same similarity run over its context window against the
//! polarity seeds.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{SeedLexicon, TaggedSentence};
use crate::embedding::EmbeddingTable;

pub mod bio;
mod similarity;
mod terms;

pub use crate::corpus::{Polarity, TermSpan};
pub use bio::{PolarityTag, TermTag};
pub use similarity::{acd_pseudo_label, connection, SeedSpace, SimilarityMode, SimilarityScores};
pub use terms::{ate_pseudo_label, atp_pseudo_label, context_window, label_term_polarities, NounFrequency};

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("need at least 2 aspects, found {0}")]
    TooFewAspects(usize),
    #[error("aspect `{0}` has no initial seed words")]
    EmptyAspect(String),
    #[error("additional seed `{word}` is already an initial seed")]
    AlreadyInitial { word: String },
    #[error("additional seed `{word}` assigned to both `{first}` and `{second}`")]
    ConflictingAddition {
        word: String,
        first: String,
        second: String,
    },
    #[error("aspect index {0} out of range")]
    UnknownAspect(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AspectSeeds {
    pub name: String,
    pub initial: BTreeSet<String>,
    pub additional: BTreeSet<String>,
}

impl AspectSeeds {
    /// `initial ∪ additional`.
    pub fn all(&self) -> BTreeSet<String> {
        self.initial.union(&self.additional).cloned().collect()
    }
}

/// Aspect seeds split into initial and additional words, plus polarity seeds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AspectLexicon {
    aspects: Vec<AspectSeeds>,
    polarities: [BTreeSet<String>; 2],
}

impl AspectLexicon {
    pub fn new(
        aspects: Vec<(String, BTreeSet<String>)>,
        polarities: [BTreeSet<String>; 2],
    ) -> Result<Self, LexiconError> {
        if aspects.len() < 2 {
            return Err(LexiconError::TooFewAspects(aspects.len()));
        }
        let aspects = aspects
            .into_iter()
            .map(|(name, initial)| {
                if initial.is_empty() {
                    Err(LexiconError::EmptyAspect(name))
                } else {
                    Ok(AspectSeeds {
                        name,
                        initial,
                        additional: BTreeSet::new(),
                    })
                }
            })
            .collect::<Result<_, _>>()?;
        Ok(Self {
            aspects,
            polarities,
        })
    }

    pub fn from_seed_lexicon(seeds: &SeedLexicon) -> Result<Self, LexiconError> {
        let mut lexicon = Self::new(
            seeds
                .aspects
                .iter()
                .map(|(n, w)| (n.clone(), w.iter().cloned().collect()))
                .collect(),
            [
                seeds.polarities[0].iter().cloned().collect(),
                seeds.polarities[1].iter().cloned().collect(),
            ],
        )?;
        let additions: BTreeMap<String, usize> = seeds
            .derived
            .iter()
            .enumerate()
            .flat_map(|(i, words)| words.iter().map(move |w| (w.clone(), i)))
            .collect();
        lexicon = lexicon.with_additional(&additions)?;
        Ok(lexicon)
    }

    pub fn to_seed_lexicon(&self) -> SeedLexicon {
        SeedLexicon {
            aspects: self
                .aspects
                .iter()
                .map(|a| (a.name.clone(), a.initial.iter().cloned().collect()))
                .collect(),
            polarities: [
                self.polarities[0].iter().cloned().collect(),
                self.polarities[1].iter().cloned().collect(),
            ],
            derived: self
                .aspects
                .iter()
                .map(|a| a.additional.iter().cloned().collect())
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.aspects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.aspects.is_empty()
    }

    pub fn aspects(&self) -> &[AspectSeeds] {
        &self.aspects
    }

    pub fn names(&self) -> Vec<String> {
        self.aspects.iter().map(|a| a.name.clone()).collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.aspects.iter().position(|a| a.name == name)
    }

    /// Every initial seed word across aspects.
    pub fn all_initial(&self) -> BTreeSet<String> {
        self.aspects
            .iter()
            .flat_map(|a| a.initial.iter().cloned())
            .collect()
    }

    pub fn polarity_seeds(&self, p: Polarity) -> &BTreeSet<String> {
        &self.polarities[p.index()]
    }

    /// A copy with `additions` (word → aspect index) added to the additional seeds.
    pub fn with_additional(&self, additions: &BTreeMap<String, usize>) -> Result<Self, LexiconError> {
        let mut out = self.clone();
        let initial = self.all_initial();
        for (word, &aspect) in additions {
            if aspect >= out.aspects.len() {
                return Err(LexiconError::UnknownAspect(aspect));
            }
            if initial.contains(word) {
                return Err(LexiconError::AlreadyInitial { word: word.clone() });
            }
            if let Some(other) = out
                .aspects
                .iter()
                .position(|a| a.additional.contains(word))
                .filter(|&o| o != aspect)
            {
                return Err(LexiconError::ConflictingAddition {
                    word: word.clone(),
                    first: out.aspects[other].name.clone(),
                    second: out.aspects[aspect].name.clone(),
                });
            }
            out.aspects[aspect].additional.insert(word.clone());
        }
        Ok(out)
    }

    /// The lexicon restricted to its initial seeds.
    pub fn initial_only(&self) -> Self {
        let mut out = self.clone();
        out.aspects.iter_mut().for_each(|a| a.additional.clear());
        out
    }

    pub fn aspect_space(&self, table: &EmbeddingTable) -> SeedSpace {
        SeedSpace::new(self.aspects.iter().map(AspectSeeds::all).collect(), table)
    }

    pub fn polarity_space(&self, table: &EmbeddingTable) -> SeedSpace {
        SeedSpace::new(self.polarities.to_vec(), table)
    }
}

/// Scores a single sentence against the full seed groups of `lexicon`.
pub fn similarity(sentence: &TaggedSentence, lexicon: &AspectLexicon, table: &EmbeddingTable) -> SimilarityScores {
    let words: Vec<&str> = sentence.surfaces().collect();
    lexicon.aspect_space(table).similarity(&words, table)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PseudoLabeledSentence {
    pub sentence: TaggedSentence,
    /// 0-based aspect index.
    pub acd_label: usize,
    pub scores: SimilarityScores,
    pub connection: f64,
    pub term_tags: Vec<TermTag>,
    pub polarity_tags: Vec<PolarityTag>,
}

impl PseudoLabeledSentence {
    pub fn terms(&self) -> Vec<TermSpan> {
        let spans = bio::spans_from_term_tags(&self.term_tags);
        spans
            .into_iter()
            .map(|s| {
                let p = self.polarity_tags[s.start].polarity();
                TermSpan::new(s.start, s.end, p)
            })
            .collect()
    }
}

/// Labeling parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LabelingConfig {
    /// Nouns seen more than `m` times become terms.
    pub m: usize,
    /// Tokens on each side of a term used for its polarity.
    pub atp_window: usize,
}

impl Default for LabelingConfig {
    fn default() -> Self {
        Self { m: 2, atp_window: 20 }
    }
}

/// Precomputed seed spaces for labeling many sentences with one lexicon.
pub struct PseudoLabeler<'a> {
    table: &'a EmbeddingTable,
    aspects: SeedSpace,
    polarities: SeedSpace,
    nouns: &'a NounFrequency,
    config: LabelingConfig,
}

impl<'a> PseudoLabeler<'a> {
    pub fn new(
        lexicon: &AspectLexicon,
        table: &'a EmbeddingTable,
        nouns: &'a NounFrequency,
        config: LabelingConfig,
    ) -> Self {
        Self {
            table,
            aspects: lexicon.aspect_space(table),
            polarities: lexicon.polarity_space(table),
            nouns,
            config,
        }
    }

    pub fn scores(&self, sentence: &TaggedSentence) -> SimilarityScores {
        let words: Vec<&str> = sentence.surfaces().collect();
        self.aspects.similarity(&words, self.table)
    }

    pub fn label(&self, sentence: &TaggedSentence) -> PseudoLabeledSentence {
        let scores = self.scores(sentence);
        let term_tags = self.nouns.tag_terms(sentence, self.config.m);
        let spans = label_term_polarities(
            sentence,
            &term_tags,
            self.config.atp_window,
            &self.polarities,
            self.table,
        );
        let polarity_tags = bio::polarity_tags_from_spans(sentence.len(), &spans);
        PseudoLabeledSentence {
            sentence: sentence.clone(),
            acd_label: acd_pseudo_label(&scores),
            connection: connection(&scores),
            scores,
            term_tags,
            polarity_tags,
        }
    }

    pub fn label_all(&self, sentences: &[TaggedSentence]) -> Vec<PseudoLabeledSentence> {
        sentences.iter().map(|s| self.label(s)).collect()
    }
}

/// Splits into `(certain, uncertain)` by `connection >= gamma`, keeping order.
pub fn filter_uncertain(
    labeled: Vec<PseudoLabeledSentence>,
    gamma: f64,
) -> (Vec<PseudoLabeledSentence>, Vec<PseudoLabeledSentence>) {
    debug_assert!(gamma >= 0.0);
    labeled.into_iter().partition(|s| s.connection >= gamma)
}

/// `id  aspect  connection  term-tags  polarity-tags`, tab-separated.
pub fn dump(labeled: &[PseudoLabeledSentence], aspect_names: &[String]) -> String {
    let mut out = String::new();
    for s in labeled {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            s.sentence.id,
            aspect_names[s.acd_label],
            s.connection,
            bio::join_tags(&s.term_tags),
            bio::join_tags(&s.polarity_tags),
        );
    }
    out
}

/// One parsed line of a pseudo-label dump.
#[derive(Debug, Clone, PartialEq)]
pub struct DumpRecord {
    pub id: usize,
    pub aspect: String,
    pub connection: f64,
    pub term_tags: Vec<TermTag>,
    pub polarity_tags: Vec<PolarityTag>,
}

pub fn parse_dump(text: &str) -> Result<Vec<DumpRecord>, String> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            let cols: Vec<&str> = line.split('\t').collect();
            let ctx = |m: String| format!("pseudo-label dump, line {}: {m}", i + 1);
            if cols.len() != 5 {
                return Err(ctx(format!("expected 5 columns, found {}", cols.len())));
            }
            Ok(DumpRecord {
                id: cols[0].parse().map_err(|_| ctx("bad id".into()))?,
                aspect: cols[1].to_string(),
                connection: cols[2].parse().map_err(|_| ctx("bad connection".into()))?,
                term_tags: bio::parse_tags(cols[3]).map_err(ctx)?,
                polarity_tags: bio::parse_tags(cols[4]).map_err(ctx)?,
            })
        })
        .collect()
}

pub fn write_dump(path: &Path, labeled: &[PseudoLabeledSentence], aspect_names: &[String]) -> std::io::Result<()> {
    std::fs::write(path, dump(labeled, aspect_names))
}
