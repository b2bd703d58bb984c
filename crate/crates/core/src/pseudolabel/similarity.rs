use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::embedding::{embed_aspect, sum_vectors, EmbeddingTable};
use crate::vecmath::{argmax, dot};

/// Which branch of the similarity produced a set of scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SimilarityMode {
    /// At least one group shares a word with the sentence.
    SeedOverlap,
    /// No group shares a word; scores are `s · a_i`.
    EmbeddingDot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityScores {
    pub scores: Vec<f64>,
    pub mode: SimilarityMode,
}

impl SimilarityScores {
    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

/// Seed groups (aspects or polarities) with their summed vectors cached.
#[derive(Debug, Clone)]
pub struct SeedSpace {
    groups: Vec<BTreeSet<String>>,
    centroids: Vec<Vec<f64>>,
}

impl SeedSpace {
    pub fn new(groups: Vec<BTreeSet<String>>, table: &EmbeddingTable) -> Self {
        let centroids = groups
            .iter()
            .map(|g| embed_aspect(g.iter().map(String::as_str), table).vector)
            .collect();
        Self { groups, centroids }
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn group(&self, i: usize) -> &BTreeSet<String> {
        &self.groups[i]
    }

    pub fn centroid(&self, i: usize) -> &[f64] {
        &self.centroids[i]
    }

    /// Scores a bag of words against every group.
    ///
    /// When no group shares a word with `words`, each score is the dot
    /// product of the sentence vector with the group vector. Otherwise a
    /// group scores `Σ w·s` over the distinct shared words `w` (OOV words
    /// add nothing) and groups without a shared word score 0.
    pub fn similarity(&self, words: &[&str], table: &EmbeddingTable) -> SimilarityScores {
        let (sentence_vec, _) = sum_vectors(words.iter().copied(), table);
        let distinct: BTreeSet<&str> = words.iter().copied().collect();

        let overlap: Vec<Vec<&str>> = self
            .groups
            .iter()
            .map(|g| distinct.iter().copied().filter(|w| g.contains(*w)).collect())
            .collect();

        if overlap.iter().all(Vec::is_empty) {
            let scores = self
                .centroids
                .iter()
                .map(|a| dot(&sentence_vec, a))
                .collect();
            return SimilarityScores {
                scores,
                mode: SimilarityMode::EmbeddingDot,
            };
        }

        let scores = overlap
            .iter()
            .map(|shared| {
                shared
                    .iter()
                    .filter_map(|w| table.get(w))
                    .map(|v| dot(v, &sentence_vec))
                    .sum()
            })
            .collect();
        SimilarityScores {
            scores,
            mode: SimilarityMode::SeedOverlap,
        }
    }
}

/// Index of the best-scoring aspect; ties go to the lowest index.
pub fn acd_pseudo_label(scores: &SimilarityScores) -> usize {
    argmax(&scores.scores)
}

/// Gap between the best and second-best score.
pub fn connection(scores: &SimilarityScores) -> f64 {
    let mut top = f64::NEG_INFINITY;
    let mut second = f64::NEG_INFINITY;
    for &s in &scores.scores {
        if s > top {
            second = top;
            top = s;
        } else if s > second {
            second = s;
        }
    }
    if second == f64::NEG_INFINITY {
        return 0.0;
    }
    (top - second).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(words: &[&str]) -> BTreeSet<String> {
        words.iter().map(|w| w.to_string()).collect()
    }

    fn scores(v: &[f64]) -> SimilarityScores {
        SimilarityScores {
            scores: v.to_vec(),
            mode: SimilarityMode::EmbeddingDot,
        }
    }

    #[test]
    fn seed_overlap_branch() {
        let table = EmbeddingTable::from_pairs(
            2,
            [
                ("pizza", vec![1.0, 0.0]),
                ("great", vec![0.5, 0.5]),
                ("waiter", vec![0.0, 1.0]),
            ],
        );
        let space = SeedSpace::new(vec![set(&["pizza"]), set(&["waiter"])], &table);
        let s = space.similarity(&["pizza", "great"], &table);
        assert_eq!(s.mode, SimilarityMode::SeedOverlap);
        assert_eq!(s.scores, vec![1.5, 0.0]);
        assert_eq!(acd_pseudo_label(&s), 0);
        assert_eq!(connection(&s), 1.5);
    }

    #[test]
    fn dot_product_branch() {
        let table = EmbeddingTable::from_pairs(
            2,
            [
                ("food", vec![1.0, 0.0]),
                ("serv", vec![0.0, 1.0]),
                ("nice", vec![0.1, 0.3]),
                ("day", vec![0.2, 0.4]),
            ],
        );
        let space = SeedSpace::new(vec![set(&["food"]), set(&["serv"])], &table);
        let s = space.similarity(&["nice", "day"], &table);
        assert_eq!(s.mode, SimilarityMode::EmbeddingDot);
        assert!((s.scores[0] - 0.3).abs() < 1e-12);
        assert!((s.scores[1] - 0.7).abs() < 1e-12);
        assert_eq!(acd_pseudo_label(&s), 1);
    }

    #[test]
    fn symmetric_seeds_tie() {
        let table = EmbeddingTable::from_pairs(
            2,
            [("a", vec![1.0, 0.0]), ("b", vec![0.0, 1.0]), ("x", vec![1.0, 1.0])],
        );
        let space = SeedSpace::new(vec![set(&["a"]), set(&["b"])], &table);
        let s = space.similarity(&["a", "x", "b"], &table);
        assert_eq!(s.scores[0], s.scores[1]);
        assert_eq!(acd_pseudo_label(&s), 0);
        assert_eq!(connection(&s), 0.0);
    }

    #[test]
    fn repeated_seed_counted_once_in_overlap_but_twice_in_sentence_vector() {
        let table = EmbeddingTable::from_pairs(1, [("a", vec![2.0]), ("b", vec![1.0])]);
        let space = SeedSpace::new(vec![set(&["a"]), set(&["b"])], &table);
        let s = space.similarity(&["a", "a"], &table);
        // s = 4, shared {a}: a·s = 8
        assert_eq!(s.scores, vec![8.0, 0.0]);
    }

    #[test]
    fn oov_seed_overlap_scores_zero() {
        let table = EmbeddingTable::from_pairs(1, [("b", vec![1.0])]);
        let space = SeedSpace::new(vec![set(&["ghost"]), set(&["b"])], &table);
        let s = space.similarity(&["ghost"], &table);
        assert_eq!(s.mode, SimilarityMode::SeedOverlap);
        assert_eq!(s.scores, vec![0.0, 0.0]);
    }

    #[test]
    fn connection_examples() {
        assert_eq!(connection(&scores(&[5.0, 2.0, 1.0])), 3.0);
        assert_eq!(connection(&scores(&[4.0, 4.0, 0.0])), 0.0);
        assert_eq!(connection(&scores(&[2.5, 0.0])), 2.5);
        assert_eq!(connection(&scores(&[-1.0, -3.0])), 2.0);
        assert_eq!(acd_pseudo_label(&scores(&[0.7, 0.7])), 0);
        assert_eq!(acd_pseudo_label(&scores(&[0.0, 0.0])), 0);
        assert_eq!(connection(&scores(&[0.0, 0.0])), 0.0);
    }
}
