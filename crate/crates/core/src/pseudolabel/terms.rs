//! Term extraction from frequent nouns and context-window term polarity.

use std::collections::HashMap;

use super::bio::{spans_from_term_tags, TermTag};
use super::similarity::{acd_pseudo_label, SeedSpace};
use crate::corpus::{Polarity, PosTag, TaggedSentence, TermSpan};
use crate::embedding::EmbeddingTable;

/// How often each word occurs tagged as a noun.
#[derive(Debug, Clone, Default)]
pub struct NounFrequency {
    counts: HashMap<String, usize>,
}

impl NounFrequency {
    pub fn from_corpus<'a, I>(corpus: I) -> Self
    where
        I: IntoIterator<Item = &'a TaggedSentence>,
    {
        let mut counts = HashMap::new();
        for s in corpus {
            for t in &s.tokens {
                if t.pos == PosTag::Noun {
                    *counts.entry(t.surface.clone()).or_default() += 1;
                }
            }
        }
        Self { counts }
    }

    pub fn count(&self, word: &str) -> usize {
        self.counts.get(word).copied().unwrap_or(0)
    }

    /// Tags every noun seen more than `m` times; adjacent qualifying nouns form one span.
    pub fn tag_terms(&self, sentence: &TaggedSentence, m: usize) -> Vec<TermTag> {
        let mut tags = Vec::with_capacity(sentence.len());
        let mut prev_term = false;
        for t in &sentence.tokens {
            let term = t.pos == PosTag::Noun && self.count(&t.surface) > m;
            tags.push(match (term, prev_term) {
                (false, _) => TermTag::O,
                (true, false) => TermTag::B,
                (true, true) => TermTag::I,
            });
            prev_term = term;
        }
        tags
    }
}

/// Term tags for every sentence, with noun counts taken over `corpus` itself.
pub fn ate_pseudo_label(corpus: &[TaggedSentence], m: usize) -> Vec<Vec<TermTag>> {
    let freq = NounFrequency::from_corpus(corpus);
    corpus.iter().map(|s| freq.tag_terms(s, m)).collect()
}

/// Up to `window` tokens on each side of `span`, clipped at the sentence
/// boundaries. The span itself is excluded.
pub fn context_window<'a>(sentence: &'a TaggedSentence, span: &TermSpan, window: usize) -> Vec<&'a str> {
    let left = span.start.saturating_sub(window)..span.start;
    let right = span.end..(span.end + window).min(sentence.len());
    left.chain(right)
        .map(|i| sentence.tokens[i].surface.as_str())
        .collect()
}

/// Polarity of one term from the seed similarity of its context window.
///
/// `polarity_space` must hold the groups in [`Polarity::ALL`] order, so ties
/// resolve to [`Polarity::Pos`].
pub fn atp_pseudo_label(
    sentence: &TaggedSentence,
    term: &TermSpan,
    window: usize,
    polarity_space: &SeedSpace,
    table: &EmbeddingTable,
) -> Polarity {
    debug_assert_eq!(polarity_space.len(), Polarity::ALL.len());
    let context = context_window(sentence, term, window);
    let scores = polarity_space.similarity(&context, table);
    Polarity::ALL[acd_pseudo_label(&scores)]
}

/// Spans from the term tags with a polarity attached to each.
pub fn label_term_polarities(
    sentence: &TaggedSentence,
    term_tags: &[TermTag],
    window: usize,
    polarity_space: &SeedSpace,
    table: &EmbeddingTable,
) -> Vec<TermSpan> {
    spans_from_term_tags(term_tags)
        .into_iter()
        .map(|span| {
            let p = atp_pseudo_label(sentence, &span, window, polarity_space, table);
            TermSpan::new(span.start, span.end, Some(p))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pseudolabel::bio::term_tags_well_formed;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    const N: PosTag = PosTag::Noun;
    const A: PosTag = PosTag::Adj;
    const O: PosTag = PosTag::Other;

    fn set(words: &[&str]) -> BTreeSet<String> {
        words.iter().map(|w| w.to_string()).collect()
    }

    #[test]
    fn frequent_nouns_are_terms() {
        let corpus = vec![
            TaggedSentence::from_pairs(0, &[("pizza", N), ("soup", N)]),
            TaggedSentence::from_pairs(1, &[("the", O), ("pizza", N)]),
            TaggedSentence::from_pairs(2, &[("pizza", N), ("good", A)]),
        ];
        let tags = ate_pseudo_label(&corpus, 2);
        assert_eq!(tags[0], vec![TermTag::B, TermTag::O]);
        assert_eq!(tags[1], vec![TermTag::O, TermTag::B]);
        assert_eq!(tags[2], vec![TermTag::B, TermTag::O]);
    }

    #[test]
    fn adjacent_nouns_merge() {
        let s = TaggedSentence::from_pairs(0, &[("hot", N), ("dogs", N), ("rock", O)]);
        let corpus = vec![s.clone(), s.clone(), s.clone()];
        let tags = ate_pseudo_label(&corpus, 2);
        assert_eq!(tags[0], vec![TermTag::B, TermTag::I, TermTag::O]);
    }

    #[test]
    fn same_word_not_tagged_when_not_a_noun() {
        let corpus = vec![
            TaggedSentence::from_pairs(0, &[("light", N)]),
            TaggedSentence::from_pairs(1, &[("light", N)]),
            TaggedSentence::from_pairs(2, &[("light", N)]),
            TaggedSentence::from_pairs(3, &[("light", A)]),
        ];
        let tags = ate_pseudo_label(&corpus, 2);
        assert_eq!(tags[0], vec![TermTag::B]);
        assert_eq!(tags[3], vec![TermTag::O]);
    }

    fn polarity_fixture() -> (EmbeddingTable, SeedSpace) {
        let table = EmbeddingTable::from_pairs(
            2,
            [
                ("good", vec![1.0, 0.0]),
                ("bad", vec![0.0, 1.0]),
                ("the", vec![0.1, 0.1]),
                ("pizza", vec![0.3, 0.2]),
                ("was", vec![0.05, 0.05]),
            ],
        );
        let space = SeedSpace::new(vec![set(&["good"]), set(&["bad"])], &table);
        (table, space)
    }

    #[test]
    fn positive_context() {
        let (table, space) = polarity_fixture();
        let s = TaggedSentence::from_pairs(0, &[("the", O), ("pizza", N), ("was", O), ("good", A)]);
        let span = TermSpan::new(1, 2, None);
        assert_eq!(context_window(&s, &span, 5), vec!["the", "was", "good"]);
        assert_eq!(atp_pseudo_label(&s, &span, 5, &space, &table), Polarity::Pos);
        // a window of 1 no longer reaches `good`: dot-product branch decides
        assert_eq!(context_window(&s, &span, 1), vec!["the", "was"]);
    }

    #[test]
    fn term_at_sentence_start_and_empty_context() {
        let (table, space) = polarity_fixture();
        let s = TaggedSentence::from_pairs(0, &[("pizza", N), ("bad", A)]);
        let span = TermSpan::new(0, 1, None);
        assert_eq!(context_window(&s, &span, 3), vec!["bad"]);
        assert_eq!(atp_pseudo_label(&s, &span, 3, &space, &table), Polarity::Neg);
        let alone = TaggedSentence::from_pairs(0, &[("pizza", N)]);
        assert!(context_window(&alone, &span, 3).is_empty());
        assert_eq!(atp_pseudo_label(&alone, &span, 3, &space, &table), Polarity::Pos);
    }

    #[test]
    fn balanced_context_ties_to_positive() {
        let table = EmbeddingTable::from_pairs(
            2,
            [("good", vec![1.0, 0.0]), ("bad", vec![0.0, 1.0]), ("pizza", vec![0.0, 0.0])],
        );
        let space = SeedSpace::new(vec![set(&["good"]), set(&["bad"])], &table);
        let s = TaggedSentence::from_pairs(0, &[("good", A), ("pizza", N), ("bad", A)]);
        assert_eq!(
            atp_pseudo_label(&s, &TermSpan::new(1, 2, None), 5, &space, &table),
            Polarity::Pos
        );
    }

    /// Brute force: count noun occurrences, then mark maximal runs.
    fn brute_force(corpus: &[TaggedSentence], m: usize) -> Vec<Vec<(usize, usize)>> {
        let mut counts: Vec<(String, usize)> = Vec::new();
        for s in corpus {
            for t in &s.tokens {
                if t.pos == PosTag::Noun {
                    match counts.iter_mut().find(|(w, _)| *w == t.surface) {
                        Some(entry) => entry.1 += 1,
                        None => counts.push((t.surface.clone(), 1)),
                    }
                }
            }
        }
        let qualifies = |t: &crate::Token| {
            t.pos == PosTag::Noun
                && counts.iter().any(|(w, c)| *w == t.surface && *c > m)
        };
        corpus
            .iter()
            .map(|s| {
                let mut runs = Vec::new();
                let mut i = 0;
                while i < s.len() {
                    if qualifies(&s.tokens[i]) {
                        let start = i;
                        while i < s.len() && qualifies(&s.tokens[i]) {
                            i += 1;
                        }
                        runs.push((start, i));
                    } else {
                        i += 1;
                    }
                }
                runs
            })
            .collect()
    }

    fn synthetic_corpus(seed: u64, n: usize) -> Vec<TaggedSentence> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let words = [
            ("pizza", N), ("soup", N), ("hot", N), ("dogs", N), ("staff", N),
            ("rare", N), ("good", A), ("the", O), ("was", PosTag::Verb), ("light", A),
            ("light", N), ("unique", N),
        ];
        (0..n)
            .map(|id| {
                let len = rng.gen_range(1..12);
                let pairs: Vec<(&str, PosTag)> =
                    (0..len).map(|_| words[rng.gen_range(0..words.len())]).collect();
                TaggedSentence::from_pairs(id, &pairs)
            })
            .collect()
    }

    #[test]
    fn matches_brute_force_on_synthetic_corpus() {
        let corpus = synthetic_corpus(11, 200);
        for m in [0, 2, 20, 100] {
            let ours: Vec<Vec<(usize, usize)>> = ate_pseudo_label(&corpus, m)
                .iter()
                .map(|tags| spans_from_term_tags(tags).iter().map(|s| (s.start, s.end)).collect())
                .collect();
            assert_eq!(ours, brute_force(&corpus, m), "m = {m}");
        }
    }

    proptest! {
        #[test]
        fn term_tags_always_well_formed(seed in any::<u64>(), m in 0usize..6) {
            let corpus = synthetic_corpus(seed, 20);
            for tags in ate_pseudo_label(&corpus, m) {
                prop_assert!(term_tags_well_formed(&tags));
            }
        }
    }
}
