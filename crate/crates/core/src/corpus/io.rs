//! Corpus and labeled-evaluation file formats.
//!
//! A corpus file holds one sentence per line. A labeled file is
//! tab-separated: `sentence<TAB>aspect[<TAB>spans]`, where `spans` is a
//! space-separated list of `start:end[:polarity]` token offsets (end
//! exclusive). An aspect field naming several comma-separated aspects marks
//! a multi-aspect sentence; those are dropped on load.

use std::fs;
use std::path::Path;

use super::{
    prepare_sentences, tagger::tag_with, tokenize, CorpusError, Polarity, TaggedSentence,
    TaggerBackend, TermSpan,
};

pub fn read_text(path: &Path) -> Result<String, CorpusError> {
    fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn parse_corpus(text: &str, tagger: &dyn TaggerBackend) -> Vec<TaggedSentence> {
    prepare_sentences(text.lines(), tagger)
}

pub fn load_corpus(path: &Path, tagger: &dyn TaggerBackend) -> Result<Vec<TaggedSentence>, CorpusError> {
    Ok(parse_corpus(&read_text(path)?, tagger))
}

/// Writes detokenized sentences, one per line.
pub fn write_corpus(path: &Path, sentences: &[TaggedSentence]) -> Result<(), CorpusError> {
    let mut out = String::new();
    for s in sentences {
        out.push_str(&s.text());
        out.push('\n');
    }
    fs::write(path, out).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSentence {
    pub sentence: TaggedSentence,
    pub aspect: String,
    /// `None` when the file carries no term column for this line.
    pub terms: Option<Vec<TermSpan>>,
}

#[derive(Debug, Clone, Default)]
pub struct LabeledSet {
    pub items: Vec<LabeledSentence>,
    /// Lines dropped because they named more than one aspect.
    pub dropped_multi_aspect: usize,
}

impl LabeledSet {
    pub fn sentences(&self) -> Vec<TaggedSentence> {
        self.items.iter().map(|i| i.sentence.clone()).collect()
    }
}

fn parse_span(field: &str, len: usize, line: usize) -> Result<TermSpan, CorpusError> {
    let bad = |message: String| CorpusError::Format {
        what: "labeled file",
        line,
        message,
    };
    let parts: Vec<&str> = field.split(':').collect();
    if !(2..=3).contains(&parts.len()) {
        return Err(bad(format!("span `{field}` is not start:end[:polarity]")));
    }
    let start: usize = parts[0]
        .parse()
        .map_err(|_| bad(format!("bad span start in `{field}`")))?;
    let end: usize = parts[1]
        .parse()
        .map_err(|_| bad(format!("bad span end in `{field}`")))?;
    if start >= end || end > len {
        return Err(bad(format!(
            "span `{field}` out of range for a {len}-token sentence"
        )));
    }
    let polarity = match parts.get(2) {
        Some(p) if !p.is_empty() => Some(p.parse::<Polarity>().map_err(bad)?),
        _ => None,
    };
    Ok(TermSpan::new(start, end, polarity))
}

pub fn parse_labeled(text: &str, tagger: &dyn TaggerBackend) -> Result<LabeledSet, CorpusError> {
    let mut set = LabeledSet::default();
    let mut next_id = 0;
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let raw = raw.trim_end_matches('\r');
        if raw.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = raw.split('\t').collect();
        if cols.len() < 2 {
            return Err(CorpusError::Format {
                what: "labeled file",
                line,
                message: "expected sentence<TAB>aspect[<TAB>spans]".into(),
            });
        }
        let tokens = tokenize(cols[0]);
        if tokens.is_empty() {
            return Err(CorpusError::Format {
                what: "labeled file",
                line,
                message: "sentence has no tokens".into(),
            });
        }
        let mut aspects: Vec<&str> = cols[1]
            .split(',')
            .map(str::trim)
            .filter(|a| !a.is_empty())
            .collect();
        aspects.sort_unstable();
        aspects.dedup();
        match aspects.len() {
            0 => {
                return Err(CorpusError::Format {
                    what: "labeled file",
                    line,
                    message: "empty aspect label".into(),
                })
            }
            1 => {}
            _ => {
                set.dropped_multi_aspect += 1;
                continue;
            }
        }
        let terms = match cols.get(2) {
            None => None,
            Some(field) => {
                let mut spans = field
                    .split_whitespace()
                    .map(|f| parse_span(f, tokens.len(), line))
                    .collect::<Result<Vec<_>, _>>()?;
                spans.sort();
                if spans.windows(2).any(|w| w[0].end > w[1].start) {
                    return Err(CorpusError::Format {
                        what: "labeled file",
                        line,
                        message: "overlapping term spans".into(),
                    });
                }
                Some(spans)
            }
        };
        set.items.push(LabeledSentence {
            sentence: TaggedSentence::new(next_id, tag_with(&tokens, tagger)),
            aspect: aspects[0].to_string(),
            terms,
        });
        next_id += 1;
    }
    Ok(set)
}

pub fn load_labeled(path: &Path, tagger: &dyn TaggerBackend) -> Result<LabeledSet, CorpusError> {
    parse_labeled(&read_text(path)?, tagger)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::LexiconTagger;

    #[test]
    fn labeled_lines() {
        let tagger = LexiconTagger::bundled();
        let text = "The pizza was great\tfood\t1:2:pos\n\
                    \n\
                    Rude waiter , cold soup\tservice,food\n\
                    the hot dogs were bad\tfood\t1:3:NEG\n\
                    Nice place\tambience\n";
        let set = parse_labeled(text, &tagger).unwrap();
        assert_eq!(set.items.len(), 3);
        assert_eq!(set.dropped_multi_aspect, 1);
        assert_eq!(set.items[0].aspect, "food");
        assert_eq!(
            set.items[0].terms,
            Some(vec![TermSpan::new(1, 2, Some(Polarity::Pos))])
        );
        assert_eq!(set.items[1].sentence.id, 1);
        assert_eq!(
            set.items[1].terms,
            Some(vec![TermSpan::new(1, 3, Some(Polarity::Neg))])
        );
        assert_eq!(set.items[2].terms, None);
    }

    #[test]
    fn empty_span_column_means_no_terms() {
        let tagger = LexiconTagger::bundled();
        let set = parse_labeled("nice place\tambience\t\n", &tagger).unwrap();
        assert_eq!(set.items[0].terms, Some(vec![]));
    }

    #[test]
    fn bad_spans_are_rejected() {
        let tagger = LexiconTagger::bundled();
        for text in [
            "the pizza\tfood\t1:5:pos\n",
            "the pizza\tfood\t1:1\n",
            "the pizza\tfood\tx:2\n",
            "the pizza\tfood\t1:2:meh\n",
            "the hot pizza\tfood\t0:2 1:3\n",
            "no label column\n",
        ] {
            let err = parse_labeled(text, &tagger).unwrap_err();
            assert!(matches!(err, CorpusError::Format { line: 1, .. }), "{text:?}");
        }
    }
}
