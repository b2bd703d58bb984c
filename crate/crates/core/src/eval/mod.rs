//! Metrics and the evaluation report.

mod metrics;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifier::Prediction;
use crate::corpus::{LabeledSentence, Polarity};

pub use metrics::{accuracy, macro_f1, sentence_atp, span_f1, ClassScore, MacroF1, SpanScores};

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("gold has {gold} items but predictions have {predicted}")]
    LengthMismatch { gold: usize, predicted: usize },
    #[error("nothing to evaluate")]
    Empty,
    #[error("class {class} outside 0..{classes}")]
    UnknownClass { class: usize, classes: usize },
    #[error("sentence has no polarized terms")]
    NoTerms,
    #[error("gold aspect {0:?} is not one of the configured aspects")]
    UnknownAspect(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedScore {
    pub class: String,
    #[serde(flatten)]
    pub score: ClassScore,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationMetrics {
    pub evaluated: usize,
    pub accuracy: f64,
    pub macro_f1: f64,
    pub per_class: Vec<NamedScore>,
}

impl ClassificationMetrics {
    fn compute(gold: &[usize], predicted: &[usize], names: &[String]) -> Result<Self, MetricError> {
        let acc = accuracy(gold, predicted)?;
        let m = macro_f1(gold, predicted, names.len(), false)?;
        Ok(Self {
            evaluated: gold.len(),
            accuracy: acc,
            macro_f1: m.macro_f1,
            per_class: names
                .iter()
                .zip(m.per_class)
                .map(|(n, score)| NamedScore { class: n.clone(), score })
                .collect(),
        })
    }
}

/// Metrics of one trained model on the test split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub seed: u64,
    pub acd: ClassificationMetrics,
    /// Exact term-span match, on sentences with gold spans.
    pub ate: Option<SpanScores>,
    /// Exact term-span match that also requires the same polarity.
    pub atp_terms: Option<SpanScores>,
    /// Sentence polarity inferred from term polarities; multi-polarity
    /// sentences are left out.
    pub atp_sentence: Option<ClassificationMetrics>,
    pub dropped_multi_polarity: usize,
    /// Sizes of intermediate artifacts (seed words added, certain sentences, ...).
    pub stats: BTreeMap<String, usize>,
}

/// Scores `predictions` against `gold`, aligned by position.
pub fn evaluate(gold: &[LabeledSentence], predictions: &[Prediction], aspects: &[String], seed: u64) -> Result<RunMetrics, MetricError> {
    if gold.len() != predictions.len() {
        return Err(MetricError::LengthMismatch {
            gold: gold.len(),
            predicted: predictions.len(),
        });
    }
    let gold_acd = gold
        .iter()
        .map(|g| {
            aspects
                .iter()
                .position(|a| *a == g.aspect)
                .ok_or_else(|| MetricError::UnknownAspect(g.aspect.clone()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let pred_acd: Vec<usize> = predictions.iter().map(|p| p.aspect).collect();
    let acd = ClassificationMetrics::compute(&gold_acd, &pred_acd, aspects)?;

    let with_spans: Vec<(&Vec<_>, &Prediction)> = gold
        .iter()
        .zip(predictions)
        .filter_map(|(g, p)| g.terms.as_ref().map(|t| (t, p)))
        .collect();
    let (ate, atp_terms) = if with_spans.is_empty() {
        (None, None)
    } else {
        let gs: Vec<_> = with_spans.iter().map(|(g, _)| (*g).clone()).collect();
        let ps: Vec<_> = with_spans.iter().map(|(_, p)| p.terms.clone()).collect();
        (Some(span_f1(&gs, &ps, false)?), Some(span_f1(&gs, &ps, true)?))
    };

    let mut gold_pol = Vec::new();
    let mut pred_pol = Vec::new();
    let mut dropped_multi_polarity = 0;
    for (terms, p) in &with_spans {
        let pols: Vec<Polarity> = terms.iter().filter_map(|t| t.polarity).collect();
        if pols.is_empty() {
            continue;
        }
        if pols.iter().any(|x| *x != pols[0]) {
            dropped_multi_polarity += 1;
            continue;
        }
        gold_pol.push(pols[0].index());
        pred_pol.push(p.sentence_polarity.index());
    }
    let atp_sentence = if gold_pol.is_empty() {
        None
    } else {
        let names: Vec<String> = Polarity::ALL.iter().map(|p| p.as_str().to_string()).collect();
        Some(ClassificationMetrics::compute(&gold_pol, &pred_pol, &names)?)
    };
    Ok(RunMetrics {
        seed,
        acd,
        ate,
        atp_terms,
        atp_sentence,
        dropped_multi_polarity,
        stats: BTreeMap::new(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanMetrics {
    pub acd_accuracy: f64,
    pub acd_macro_f1: f64,
    pub ate_f1: Option<f64>,
    pub atp_sentence_accuracy: Option<f64>,
    pub atp_sentence_macro_f1: Option<f64>,
}

fn mean_of(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Option<Vec<f64>> = values.collect();
    v.filter(|v| !v.is_empty()).map(|v| v.iter().sum::<f64>() / v.len() as f64)
}

impl MeanMetrics {
    pub fn over(runs: &[RunMetrics]) -> Self {
        Self {
            acd_accuracy: mean_of(runs.iter().map(|r| Some(r.acd.accuracy))).unwrap_or(0.0),
            acd_macro_f1: mean_of(runs.iter().map(|r| Some(r.acd.macro_f1))).unwrap_or(0.0),
            ate_f1: mean_of(runs.iter().map(|r| r.ate.as_ref().map(|s| s.f1))),
            atp_sentence_accuracy: mean_of(runs.iter().map(|r| r.atp_sentence.as_ref().map(|s| s.accuracy))),
            atp_sentence_macro_f1: mean_of(runs.iter().map(|r| r.atp_sentence.as_ref().map(|s| s.macro_f1))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub config_hash: String,
    pub aspects: Vec<String>,
    pub test_sentences: usize,
    pub dropped_multi_aspect: usize,
    pub runs: Vec<RunMetrics>,
    pub mean: MeanMetrics,
}

impl MetricReport {
    pub fn new(config_hash: String, aspects: Vec<String>, test_sentences: usize, dropped_multi_aspect: usize, runs: Vec<RunMetrics>) -> Self {
        let mean = MeanMetrics::over(&runs);
        Self {
            config_hash,
            aspects,
            test_sentences,
            dropped_multi_aspect,
            runs,
            mean,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Plain-text summary for terminals.
    pub fn to_table(&self) -> String {
        let opt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.4}"));
        let mut out = String::new();
        let _ = writeln!(out, "config {}  test sentences {}  dropped multi-aspect {}", self.config_hash, self.test_sentences, self.dropped_multi_aspect);
        let _ = writeln!(out, "{:<10} {:>9} {:>9} {:>9} {:>9} {:>9}", "seed", "acd-acc", "acd-f1", "ate-f1", "atp-acc", "atp-f1");
        for r in &self.runs {
            let _ = writeln!(
                out,
                "{:<10} {:>9.4} {:>9.4} {:>9} {:>9} {:>9}",
                r.seed,
                r.acd.accuracy,
                r.acd.macro_f1,
                opt(r.ate.as_ref().map(|s| s.f1)),
                opt(r.atp_sentence.as_ref().map(|s| s.accuracy)),
                opt(r.atp_sentence.as_ref().map(|s| s.macro_f1)),
            );
        }
        let m = &self.mean;
        let _ = writeln!(
            out,
            "{:<10} {:>9.4} {:>9.4} {:>9} {:>9} {:>9}",
            "mean",
            m.acd_accuracy,
            m.acd_macro_f1,
            opt(m.ate_f1),
            opt(m.atp_sentence_accuracy),
            opt(m.atp_sentence_macro_f1),
        );
        if let Some(r) = self.runs.first() {
            let _ = writeln!(out, "per-aspect F1 (seed {})", r.seed);
            for c in &r.acd.per_class {
                let _ = writeln!(out, "  {:<16} {:>7.4}  support {}", c.class, c.score.f1, c.score.support);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{PosTag, TaggedSentence, TermSpan};
    use crate::pseudolabel::bio::TermTag;

    fn labeled(aspect: &str, terms: Option<Vec<TermSpan>>) -> LabeledSentence {
        LabeledSentence {
            sentence: TaggedSentence::from_pairs(0, &[("a", PosTag::Noun), ("b", PosTag::Noun)]),
            aspect: aspect.into(),
            terms,
        }
    }

    fn pred(aspect: usize, terms: Vec<TermSpan>, pol: Polarity) -> Prediction {
        Prediction {
            aspect,
            term_tags: vec![TermTag::O; 2],
            terms,
            sentence_polarity: pol,
        }
    }

    #[test]
    fn evaluation_drops_multi_polarity() {
        use Polarity::*;
        let names = vec!["food".to_string(), "service".to_string()];
        let gold = vec![
            labeled("food", Some(vec![TermSpan::new(0, 1, Some(Pos))])),
            labeled("service", Some(vec![TermSpan::new(0, 1, Some(Pos)), TermSpan::new(1, 2, Some(Neg))])),
            labeled("service", None),
        ];
        let preds = vec![
            pred(0, vec![TermSpan::new(0, 1, Some(Pos))], Pos),
            pred(0, vec![TermSpan::new(1, 2, Some(Pos))], Pos),
            pred(1, vec![], Neg),
        ];
        let r = evaluate(&gold, &preds, &names, 1).unwrap();
        assert!((r.acd.accuracy - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(r.dropped_multi_polarity, 1);
        assert_eq!(r.atp_sentence.as_ref().unwrap().evaluated, 1);
        let ate = r.ate.unwrap();
        assert_eq!((ate.gold, ate.predicted, ate.correct), (3, 2, 2));
        assert_eq!(r.atp_terms.unwrap().correct, 1);
        assert!(matches!(
            evaluate(&[labeled("drinks", None)], &[pred(0, vec![], Pos)], &names, 1),
            Err(MetricError::UnknownAspect(_))
        ));
    }

    #[test]
    fn report_json_round_trip() {
        let names = vec!["food".to_string(), "service".to_string()];
        let gold = vec![labeled("food", None), labeled("service", None)];
        let preds = vec![pred(0, vec![], Polarity::Pos), pred(0, vec![], Polarity::Pos)];
        let runs = vec![evaluate(&gold, &preds, &names, 1).unwrap(), evaluate(&gold, &preds, &names, 2).unwrap()];
        let report = MetricReport::new("abc".into(), names, 2, 0, runs);
        assert_eq!(report.mean.acd_accuracy, 0.5);
        assert_eq!(report.mean.ate_f1, None);
        assert_eq!(MetricReport::from_json(&report.to_json()).unwrap(), report);
        assert!(report.to_table().contains("mean"));
    }
}
