use serde::{Deserialize, Serialize};

use super::MetricError;
use crate::corpus::{Polarity, TermSpan};

pub fn accuracy(gold: &[usize], predicted: &[usize]) -> Result<f64, MetricError> {
    check_lengths(gold.len(), predicted.len())?;
    let hits = gold.iter().zip(predicted).filter(|(g, p)| g == p).count();
    Ok(hits as f64 / gold.len() as f64)
}

fn check_lengths(gold: usize, predicted: usize) -> Result<(), MetricError> {
    if gold != predicted {
        return Err(MetricError::LengthMismatch { gold, predicted });
    }
    if gold == 0 {
        return Err(MetricError::Empty);
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Gold occurrences.
    pub support: usize,
    /// Absent from both gold and predictions.
    pub absent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MacroF1 {
    pub macro_f1: f64,
    pub per_class: Vec<ClassScore>,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Unweighted mean of per-class F1 over `0..classes`.
///
/// A class absent from both sides scores 0 and counts toward the mean unless
/// `exclude_absent` is set.
pub fn macro_f1(gold: &[usize], predicted: &[usize], classes: usize, exclude_absent: bool) -> Result<MacroF1, MetricError> {
    check_lengths(gold.len(), predicted.len())?;
    if let Some(&c) = gold.iter().chain(predicted).find(|&&c| c >= classes) {
        return Err(MetricError::UnknownClass { class: c, classes });
    }
    let mut tp = vec![0usize; classes];
    let mut fp = vec![0usize; classes];
    let mut fn_ = vec![0usize; classes];
    for (&g, &p) in gold.iter().zip(predicted) {
        if g == p {
            tp[g] += 1;
        } else {
            fp[p] += 1;
            fn_[g] += 1;
        }
    }
    let per_class: Vec<ClassScore> = (0..classes)
        .map(|c| ClassScore {
            precision: ratio(tp[c], tp[c] + fp[c]),
            recall: ratio(tp[c], tp[c] + fn_[c]),
            f1: ratio(2 * tp[c], 2 * tp[c] + fp[c] + fn_[c]),
            support: tp[c] + fn_[c],
            absent: tp[c] + fp[c] + fn_[c] == 0,
        })
        .collect();
    let counted: Vec<f64> = per_class
        .iter()
        .filter(|s| !(exclude_absent && s.absent))
        .map(|s| s.f1)
        .collect();
    let macro_f1 = if counted.is_empty() {
        0.0
    } else {
        counted.iter().sum::<f64>() / counted.len() as f64
    };
    Ok(MacroF1 { macro_f1, per_class })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpanScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub gold: usize,
    pub predicted: usize,
    pub correct: usize,
}

/// Exact-boundary span matching summed over sentences. With
/// `match_polarity` a span also needs the same polarity to count.
///
/// Two empty span sets agree perfectly and score 1.
pub fn span_f1(gold: &[Vec<TermSpan>], predicted: &[Vec<TermSpan>], match_polarity: bool) -> Result<SpanScores, MetricError> {
    if gold.len() != predicted.len() {
        return Err(MetricError::LengthMismatch {
            gold: gold.len(),
            predicted: predicted.len(),
        });
    }
    let (mut g, mut p, mut c) = (0, 0, 0);
    for (gs, ps) in gold.iter().zip(predicted) {
        g += gs.len();
        p += ps.len();
        let mut used = vec![false; gs.len()];
        for span in ps {
            let hit = gs.iter().enumerate().position(|(i, gspan)| {
                !used[i] && gspan.same_boundaries(span) && (!match_polarity || gspan.polarity == span.polarity)
            });
            if let Some(i) = hit {
                used[i] = true;
                c += 1;
            }
        }
    }
    if g == 0 && p == 0 {
        return Ok(SpanScores {
            precision: 1.0,
            recall: 1.0,
            f1: 1.0,
            gold: 0,
            predicted: 0,
            correct: 0,
        });
    }
    Ok(SpanScores {
        precision: ratio(c, p),
        recall: ratio(c, g),
        f1: ratio(2 * c, g + p),
        gold: g,
        predicted: p,
        correct: c,
    })
}

/// Majority polarity of a sentence's terms; ties go to POS.
pub fn sentence_atp(polarities: &[Polarity]) -> Result<Polarity, MetricError> {
    if polarities.is_empty() {
        return Err(MetricError::NoTerms);
    }
    let neg = polarities.iter().filter(|p| **p == Polarity::Neg).count();
    Ok(if 2 * neg > polarities.len() { Polarity::Neg } else { Polarity::Pos })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_macro_f1() {
        let g = [0, 1, 2, 1];
        assert_eq!(macro_f1(&g, &g, 3, false).unwrap().macro_f1, 1.0);
        assert_eq!(accuracy(&g, &g).unwrap(), 1.0);
    }

    #[test]
    fn one_class_predictions() {
        let gold = [0, 0, 0, 0, 0, 1, 1, 1, 1, 1];
        let pred = [0; 10];
        let m = macro_f1(&gold, &pred, 2, false).unwrap();
        assert!((m.per_class[0].f1 - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(m.per_class[1].f1, 0.0);
        assert!((m.macro_f1 - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(accuracy(&gold, &pred).unwrap(), 0.5);
    }

    #[test]
    fn absent_classes() {
        let g = [0, 1];
        assert_eq!(macro_f1(&g, &g, 3, false).unwrap().macro_f1, 2.0 / 3.0);
        assert_eq!(macro_f1(&g, &g, 3, true).unwrap().macro_f1, 1.0);
    }

    #[test]
    fn errors() {
        assert!(matches!(macro_f1(&[], &[], 2, false), Err(MetricError::Empty)));
        assert!(matches!(accuracy(&[0], &[0, 1]), Err(MetricError::LengthMismatch { .. })));
        assert!(matches!(macro_f1(&[0], &[3], 2, false), Err(MetricError::UnknownClass { .. })));
        assert!(matches!(sentence_atp(&[]), Err(MetricError::NoTerms)));
    }

    #[test]
    fn sentence_polarity_rule() {
        use Polarity::*;
        assert_eq!(sentence_atp(&[Pos, Pos, Neg]).unwrap(), Pos);
        assert_eq!(sentence_atp(&[Pos, Neg]).unwrap(), Pos);
        assert_eq!(sentence_atp(&[Neg, Neg, Pos]).unwrap(), Neg);
    }

    #[test]
    fn span_scores() {
        let s = |a, b| TermSpan::new(a, b, None);
        let gold = vec![vec![s(0, 1)], vec![s(2, 4)]];
        assert_eq!(span_f1(&gold, &gold, false).unwrap().f1, 1.0);
        assert_eq!(span_f1(&gold, &[vec![], vec![]], false).unwrap().f1, 0.0);
        assert_eq!(span_f1(&[vec![]], &[vec![]], false).unwrap().f1, 1.0);
    }

    /// Ten sentences counted by hand: 12 gold spans, 10 predicted, 7 exact.
    #[test]
    fn ten_sentence_fixture() {
        let s = |a, b| TermSpan::new(a, b, None);
        let gold = vec![
            vec![s(0, 1)],
            vec![s(1, 3)],
            vec![s(0, 1), s(4, 5)],
            vec![],
            vec![s(2, 3)],
            vec![s(0, 2), s(3, 4)],
            vec![s(5, 6)],
            vec![s(1, 2)],
            vec![s(0, 1), s(2, 3)],
            vec![s(3, 5)],
        ];
        let pred = vec![
            vec![s(0, 1)],         // hit
            vec![s(1, 2)],         // boundary miss
            vec![s(0, 1), s(4, 5)], // two hits
            vec![s(2, 3)],         // spurious
            vec![s(2, 3)],         // hit
            vec![s(0, 2)],         // hit, one missed
            vec![],                // missed
            vec![s(1, 2)],         // hit
            vec![s(2, 3)],         // hit, one missed
            vec![s(3, 4)],         // boundary miss
        ];
        let r = span_f1(&gold, &pred, false).unwrap();
        assert_eq!((r.gold, r.predicted, r.correct), (12, 10, 7));
        assert!((r.precision - 0.7).abs() < 1e-12);
        assert!((r.recall - 7.0 / 12.0).abs() < 1e-12);
        assert!((r.f1 - 14.0 / 22.0).abs() < 1e-12);
    }

    #[test]
    fn polarity_aware_spans() {
        let gold = vec![vec![TermSpan::new(0, 1, Some(Polarity::Pos))]];
        let pred = vec![vec![TermSpan::new(0, 1, Some(Polarity::Neg))]];
        assert_eq!(span_f1(&gold, &pred, false).unwrap().f1, 1.0);
        assert_eq!(span_f1(&gold, &pred, true).unwrap().f1, 0.0);
    }
}
