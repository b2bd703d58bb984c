//! Part-of-speech tagging backends.
//!
//! Only a coarse tag set is needed downstream: nouns drive term extraction,
//! nouns and adjectives are the keywords seed enhancement looks at.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use super::{CorpusError, PosTag, Token};

const BUNDLED_LEXICON: &str = include_str!("../../data/pos_lexicon.tsv");

/// Identifier of the default lexicon + suffix backend.
pub const LEXICON_BACKEND: &str = "lexicon";

/// Suffix heuristics tried longest-first on out-of-lexicon words.
const SUFFIX_RULES: &[(&str, PosTag)] = &[
    ("ness", PosTag::Noun),
    ("tion", PosTag::Noun),
    ("sion", PosTag::Noun),
    ("ment", PosTag::Noun),
    ("ship", PosTag::Noun),
    ("ity", PosTag::Noun),
    ("ism", PosTag::Noun),
    ("ist", PosTag::Noun),
    ("ery", PosTag::Noun),
    ("ous", PosTag::Adj),
    ("ful", PosTag::Adj),
    ("less", PosTag::Adj),
    ("able", PosTag::Adj),
    ("ible", PosTag::Adj),
    ("ive", PosTag::Adj),
    ("ish", PosTag::Adj),
    ("ic", PosTag::Adj),
    ("y", PosTag::Adj),
    ("ize", PosTag::Verb),
    ("ise", PosTag::Verb),
    ("ing", PosTag::Verb),
    ("ed", PosTag::Verb),
];

/// Assigns a tag to each token of a sentence.
pub trait TaggerBackend: Send + Sync {
    fn id(&self) -> &str;

    fn tag_sentence(&self, surfaces: &[&str]) -> Vec<PosTag>;
}

/// Word → tag lookup with suffix heuristics and an [`PosTag::Other`] fallback.
#[derive(Debug, Clone)]
pub struct LexiconTagger {
    entries: HashMap<String, PosTag>,
}

impl LexiconTagger {
    /// The word list shipped with the crate.
    pub fn bundled() -> Self {
        Self::from_tsv(BUNDLED_LEXICON).expect("bundled POS lexicon is well-formed")
    }

    /// Parses `word<TAB>TAG` lines. Blank lines and `#` comments are skipped.
    pub fn from_tsv(text: &str) -> Result<Self, CorpusError> {
        let mut entries = HashMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (word, tag) = line.split_once('\t').ok_or_else(|| CorpusError::Format {
                what: "POS lexicon",
                line: lineno + 1,
                message: "expected word<TAB>TAG".into(),
            })?;
            let tag: PosTag = tag.trim().parse().map_err(|message| CorpusError::Format {
                what: "POS lexicon",
                line: lineno + 1,
                message,
            })?;
            entries.insert(word.trim().to_lowercase(), tag);
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self, CorpusError> {
        let text = super::io::read_text(path)?;
        Self::from_tsv(&text)
    }

    /// Adds entries from `other`, overriding existing ones.
    pub fn extend(&mut self, other: LexiconTagger) {
        self.entries.extend(other.entries);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn tag_word(&self, word: &str) -> PosTag {
        if let Some(tag) = self.entries.get(word) {
            return *tag;
        }
        if !word.chars().all(char::is_alphabetic) {
            return PosTag::Other;
        }
        SUFFIX_RULES
            .iter()
            .filter(|(suffix, _)| word.len() > suffix.len() + 1 && word.ends_with(suffix))
            .max_by_key(|(suffix, _)| suffix.len())
            .map(|(_, tag)| *tag)
            .unwrap_or(PosTag::Other)
    }
}

impl TaggerBackend for LexiconTagger {
    fn id(&self) -> &str {
        LEXICON_BACKEND
    }

    fn tag_sentence(&self, surfaces: &[&str]) -> Vec<PosTag> {
        surfaces.iter().map(|w| self.tag_word(w)).collect()
    }
}

/// Named tagger backends.
pub struct TaggerRegistry {
    backends: BTreeMap<String, Box<dyn TaggerBackend>>,
}

impl Default for TaggerRegistry {
    fn default() -> Self {
        let mut registry = Self::empty();
        registry.register(Box::new(LexiconTagger::bundled()));
        registry
    }
}

impl TaggerRegistry {
    pub fn empty() -> Self {
        Self {
            backends: BTreeMap::new(),
        }
    }

    /// Registers `backend` under its id, replacing any previous holder.
    pub fn register(&mut self, backend: Box<dyn TaggerBackend>) {
        self.backends.insert(backend.id().to_string(), backend);
    }

    pub fn get(&self, id: &str) -> Result<&dyn TaggerBackend, CorpusError> {
        self.backends
            .get(id)
            .map(|b| b.as_ref())
            .ok_or_else(|| CorpusError::UnknownBackend(id.to_string()))
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.backends.keys().map(String::as_str)
    }
}

/// Fills in the `pos` field of every token using the backend registered as `backend`.
pub fn pos_tag(
    sentence: &[Token],
    registry: &TaggerRegistry,
    backend: &str,
) -> Result<Vec<Token>, CorpusError> {
    let tagger = registry.get(backend)?;
    Ok(tag_with(sentence, tagger))
}

pub(crate) fn tag_with(sentence: &[Token], tagger: &dyn TaggerBackend) -> Vec<Token> {
    let surfaces: Vec<&str> = sentence.iter().map(|t| t.surface.as_str()).collect();
    let tags = tagger.tag_sentence(&surfaces);
    debug_assert_eq!(tags.len(), sentence.len());
    sentence
        .iter()
        .zip(tags)
        .map(|(t, pos)| Token::new(t.surface.clone(), pos))
        .collect()
}
