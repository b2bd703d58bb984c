//! Clarity of a word between two aspects from l1-normalized TF-IDF weights.
//!
//! Each aspect gets one pseudo-document: the concatenation of all
//! sentences pseudo-labeled with it. Term frequency is the raw count in
//! that document, IDF is `ln((1 + K) / (1 + df)) + 1` over the K documents,
//! and the weights of each document are scaled to sum to 1. The clarity of
//! `w` for `(a_i, a_j)` is `t_i(w) · ln(t_i(w) / t_j(w))`, with `ε` added to
//! both weights first so absent words stay finite.

use std::collections::{BTreeMap, BTreeSet};

use super::SecError;
use crate::corpus::TaggedSentence;

pub const DEFAULT_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ClarityTable {
    aspects: usize,
    epsilon: f64,
    /// word → normalized weight per aspect document (unsmoothed).
    weights: BTreeMap<String, Vec<f64>>,
}

fn counts_as_term(word: &str) -> bool {
    word.chars().any(char::is_alphanumeric)
}

impl ClarityTable {
    /// `labels[i]` is the aspect of `sentences[i]`.
    pub fn build(sentences: &[TaggedSentence], labels: &[usize], aspects: usize, epsilon: f64) -> Self {
        assert_eq!(sentences.len(), labels.len());
        let mut tf: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for (s, &label) in sentences.iter().zip(labels) {
            for w in s.surfaces().filter(|w| counts_as_term(w)) {
                tf.entry(w.to_string()).or_insert_with(|| vec![0.0; aspects])[label] += 1.0;
            }
        }
        let docs = aspects as f64;
        let mut totals = vec![0.0; aspects];
        for row in tf.values_mut() {
            let df = row.iter().filter(|&&c| c > 0.0).count() as f64;
            let idf = ((1.0 + docs) / (1.0 + df)).ln() + 1.0;
            for (a, v) in row.iter_mut().enumerate() {
                *v *= idf;
                totals[a] += *v;
            }
        }
        for row in tf.values_mut() {
            for (a, v) in row.iter_mut().enumerate() {
                if totals[a] > 0.0 {
                    *v /= totals[a];
                }
            }
        }
        Self {
            aspects,
            epsilon,
            weights: tf,
        }
    }

    pub fn aspects(&self) -> usize {
        self.aspects
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Normalized TF-IDF weight of `word` in `aspect`'s document, before smoothing.
    pub fn weight(&self, word: &str, aspect: usize) -> f64 {
        self.weights.get(word).map_or(0.0, |row| row[aspect])
    }

    pub fn vocabulary(&self) -> impl Iterator<Item = &str> {
        self.weights.keys().map(String::as_str)
    }

    pub fn clarity(&self, word: &str, a_i: usize, a_j: usize) -> Result<f64, SecError> {
        for a in [a_i, a_j] {
            if a >= self.aspects {
                return Err(SecError::UnknownAspect(a));
            }
        }
        let ti = self.weight(word, a_i) + self.epsilon;
        let tj = self.weight(word, a_j) + self.epsilon;
        Ok(ti * (ti / tj).ln())
    }

    /// `Σ_{j ≠ i} clarity(word, i, j)`.
    pub fn aggregate(&self, word: &str, a_i: usize) -> Result<f64, SecError> {
        let mut sum = 0.0;
        for j in (0..self.aspects).filter(|&j| j != a_i) {
            sum += self.clarity(word, a_i, j)?;
        }
        Ok(sum)
    }
}

/// Assigns each word to the aspect with the largest aggregate clarity
/// (lowest index on ties). Words whose best aggregate is not positive are dropped.
pub fn auto_map(words: &BTreeSet<String>, table: &ClarityTable) -> BTreeMap<String, usize> {
    let mut mapped = BTreeMap::new();
    for w in words {
        let aggregates: Vec<f64> = (0..table.aspects())
            .map(|i| table.aggregate(w, i).expect("index in range"))
            .collect();
        let best = crate::vecmath::argmax(&aggregates);
        if aggregates[best] > 0.0 {
            mapped.insert(w.clone(), best);
        }
    }
    mapped
}
