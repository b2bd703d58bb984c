//! BIO tag sets for term extraction and term polarity.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{Polarity, TermSpan};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TermTag {
    B,
    I,
    O,
}

impl TermTag {
    pub const ALL: [TermTag; 3] = [TermTag::B, TermTag::I, TermTag::O];

    pub fn index(self) -> usize {
        match self {
            TermTag::B => 0,
            TermTag::I => 1,
            TermTag::O => 2,
        }
    }

    pub fn from_index(i: usize) -> Self {
        Self::ALL[i]
    }
}

impl fmt::Display for TermTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TermTag::B => "B",
            TermTag::I => "I",
            TermTag::O => "O",
        })
    }
}

impl FromStr for TermTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "B" => Ok(TermTag::B),
            "I" => Ok(TermTag::I),
            "O" => Ok(TermTag::O),
            other => Err(format!("unknown term tag `{other}`")),
        }
    }
}

/// `O`, `B-POS`, `I-POS`, `B-NEG`, `I-NEG`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PolarityTag {
    O,
    B(Polarity),
    I(Polarity),
}

impl PolarityTag {
    pub const ALL: [PolarityTag; 5] = [
        PolarityTag::B(Polarity::Pos),
        PolarityTag::I(Polarity::Pos),
        PolarityTag::B(Polarity::Neg),
        PolarityTag::I(Polarity::Neg),
        PolarityTag::O,
    ];

    pub fn index(self) -> usize {
        Self::ALL.iter().position(|t| *t == self).expect("tag in ALL")
    }

    pub fn from_index(i: usize) -> Self {
        Self::ALL[i]
    }

    pub fn polarity(self) -> Option<Polarity> {
        match self {
            PolarityTag::O => None,
            PolarityTag::B(p) | PolarityTag::I(p) => Some(p),
        }
    }
}

impl fmt::Display for PolarityTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolarityTag::O => f.write_str("O"),
            PolarityTag::B(p) => write!(f, "B-{p}"),
            PolarityTag::I(p) => write!(f, "I-{p}"),
        }
    }
}

impl FromStr for PolarityTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "O" {
            return Ok(PolarityTag::O);
        }
        let (head, pol) = s
            .split_once('-')
            .ok_or_else(|| format!("unknown polarity tag `{s}`"))?;
        let pol: Polarity = pol.parse()?;
        match head {
            "B" => Ok(PolarityTag::B(pol)),
            "I" => Ok(PolarityTag::I(pol)),
            _ => Err(format!("unknown polarity tag `{s}`")),
        }
    }
}

/// No `I` without a preceding `B` or `I`.
pub fn term_tags_well_formed(tags: &[TermTag]) -> bool {
    let mut prev = TermTag::O;
    for &t in tags {
        if t == TermTag::I && prev == TermTag::O {
            return false;
        }
        prev = t;
    }
    true
}

/// No `I-p` unless the previous tag is `B-p` or `I-p`.
pub fn polarity_tags_well_formed(tags: &[PolarityTag]) -> bool {
    let mut prev = PolarityTag::O;
    for &t in tags {
        if let PolarityTag::I(p) = t {
            if prev.polarity() != Some(p) {
                return false;
            }
        }
        prev = t;
    }
    true
}

pub fn term_tags_from_spans(len: usize, spans: &[TermSpan]) -> Vec<TermTag> {
    let mut tags = vec![TermTag::O; len];
    for span in spans {
        tags[span.start] = TermTag::B;
        for t in &mut tags[span.start + 1..span.end] {
            *t = TermTag::I;
        }
    }
    tags
}

/// Spans without polarity; tags should be well-formed, a stray `I` starts a new span.
pub fn spans_from_term_tags(tags: &[TermTag]) -> Vec<TermSpan> {
    let mut spans = Vec::new();
    let mut open: Option<usize> = None;
    for (i, &t) in tags.iter().enumerate() {
        match t {
            TermTag::B => {
                if let Some(start) = open.take() {
                    spans.push(TermSpan::new(start, i, None));
                }
                open = Some(i);
            }
            TermTag::I => {
                if open.is_none() {
                    open = Some(i);
                }
            }
            TermTag::O => {
                if let Some(start) = open.take() {
                    spans.push(TermSpan::new(start, i, None));
                }
            }
        }
    }
    if let Some(start) = open {
        spans.push(TermSpan::new(start, tags.len(), None));
    }
    spans
}

/// Spans with a missing polarity are left as `O`.
pub fn polarity_tags_from_spans(len: usize, spans: &[TermSpan]) -> Vec<PolarityTag> {
    let mut tags = vec![PolarityTag::O; len];
    for span in spans {
        if let Some(p) = span.polarity {
            tags[span.start] = PolarityTag::B(p);
            for t in &mut tags[span.start + 1..span.end] {
                *t = PolarityTag::I(p);
            }
        }
    }
    tags
}

pub fn join_tags<T: fmt::Display>(tags: &[T]) -> String {
    tags.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

pub fn parse_tags<T: FromStr<Err = String>>(field: &str) -> Result<Vec<T>, String> {
    field.split_whitespace().map(str::parse).collect()
}
