use super::{ClassifierError, MultitaskModel, SharedEncoder, TaskProbabilities};
use crate::corpus::{Polarity, TermSpan};
use crate::eval::sentence_atp;
use crate::pseudolabel::bio::{spans_from_term_tags, PolarityTag, TermTag};
use crate::vecmath::argmax;

/// Decoded output for one sentence.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub aspect: usize,
    pub term_tags: Vec<TermTag>,
    /// Term spans with their polarities.
    pub terms: Vec<TermSpan>,
    /// Majority over `terms`; without terms, whichever polarity carries more
    /// tag probability summed over all tokens.
    pub sentence_polarity: Polarity,
}

/// An `I` that does not continue a term becomes `B`.
pub fn repair_term_tags(tags: &mut [TermTag]) {
    let mut prev = TermTag::O;
    for t in tags.iter_mut() {
        if *t == TermTag::I && prev == TermTag::O {
            *t = TermTag::B;
        }
        prev = *t;
    }
}

/// Greedy per-token argmax over `[B, I, O]`, then repair.
pub fn decode_term_tags(ate: &[Vec<f64>]) -> Vec<TermTag> {
    let mut tags: Vec<TermTag> = ate.iter().map(|p| TermTag::from_index(argmax(p))).collect();
    repair_term_tags(&mut tags);
    tags
}

/// Majority of the span's per-token polarity tags; `O` tokens abstain and
/// ties go to POS.
fn span_polarity(atp_tags: &[PolarityTag]) -> Polarity {
    let mut votes = [0usize; 2];
    for tag in atp_tags {
        if let Some(p) = tag.polarity() {
            votes[p.index()] += 1;
        }
    }
    if votes[Polarity::Neg.index()] > votes[Polarity::Pos.index()] {
        Polarity::Neg
    } else {
        Polarity::Pos
    }
}

/// Decodes probabilities into an aspect and polarized term spans.
pub fn decode(probs: &TaskProbabilities) -> Prediction {
    let term_tags = decode_term_tags(&probs.ate);
    let atp_tags: Vec<PolarityTag> = probs.atp.iter().map(|p| PolarityTag::from_index(argmax(p))).collect();
    let terms: Vec<TermSpan> = spans_from_term_tags(&term_tags)
        .into_iter()
        .map(|s| TermSpan::new(s.start, s.end, Some(span_polarity(&atp_tags[s.start..s.end]))))
        .collect();
    let polarities: Vec<Polarity> = terms.iter().filter_map(|t| t.polarity).collect();
    let sentence_polarity = sentence_atp(&polarities).unwrap_or_else(|_| {
        let mut mass = [0.0; 2];
        for p in &probs.atp {
            for (i, tag) in PolarityTag::ALL.iter().enumerate() {
                if let Some(pol) = tag.polarity() {
                    mass[pol.index()] += p[i];
                }
            }
        }
        if mass[Polarity::Neg.index()] > mass[Polarity::Pos.index()] {
            Polarity::Neg
        } else {
            Polarity::Pos
        }
    });
    Prediction {
        aspect: argmax(&probs.acd),
        term_tags,
        terms,
        sentence_polarity,
    }
}

pub fn predict<E: SharedEncoder>(model: &MultitaskModel<E>, tokens: &[String]) -> Result<Prediction, ClassifierError> {
    Ok(decode(&model.forward(tokens)?))
}
