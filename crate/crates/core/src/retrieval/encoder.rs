//! Sentence encoders used for retrieval queries and the data bank.

use std::collections::HashMap;
use std::path::Path;

use super::RetrievalError;
use crate::corpus::{SplitRole, TaggedSentence};
use crate::embedding::{sum_vectors, EmbeddingTable};
use crate::vecmath::normalize;

/// Something to encode: a split sentence or a free phrase such as a seed word.
#[derive(Debug, Clone, Copy)]
pub enum EncoderInput<'a> {
    Sentence {
        role: SplitRole,
        sentence: &'a TaggedSentence,
    },
    Phrase(&'a str),
}

impl EncoderInput<'_> {
    /// Lookup key for precomputed vectors: bank sentences use their plain id,
    /// other splits `<role>:<id>`, phrases `seed:<text>`.
    pub fn key(&self) -> String {
        match self {
            EncoderInput::Sentence {
                role: SplitRole::Bank,
                sentence,
            } => sentence.id.to_string(),
            EncoderInput::Sentence { role, sentence } => format!("{role}:{}", sentence.id),
            EncoderInput::Phrase(text) => format!("seed:{text}"),
        }
    }
}

/// Maps text to unit-length vectors of a fixed dimension.
///
/// `Ok(None)` means the input carries no signal for this encoder (for
/// instance every word is out of vocabulary).
pub trait SentenceEncoder: Send + Sync {
    fn id(&self) -> &str;

    fn dim(&self) -> usize;

    fn encode(&self, input: EncoderInput<'_>) -> Result<Option<Vec<f64>>, RetrievalError>;
}

/// l2-normalized sum of CBOW word vectors.
pub struct WordSumEncoder<'a> {
    table: &'a EmbeddingTable,
}

impl<'a> WordSumEncoder<'a> {
    pub const ID: &'static str = "word-sum";

    pub fn new(table: &'a EmbeddingTable) -> Self {
        Self { table }
    }
}

impl SentenceEncoder for WordSumEncoder<'_> {
    fn id(&self) -> &str {
        Self::ID
    }

    fn dim(&self) -> usize {
        self.table.dim()
    }

    fn encode(&self, input: EncoderInput<'_>) -> Result<Option<Vec<f64>>, RetrievalError> {
        let (mut v, hits) = match input {
            EncoderInput::Sentence { sentence, .. } => sum_vectors(sentence.surfaces(), self.table),
            EncoderInput::Phrase(text) => {
                let tokens = crate::corpus::tokenize(text);
                sum_vectors(tokens.iter().map(|t| t.surface.as_str()), self.table)
            }
        };
        if hits == 0 || !normalize(&mut v) {
            return Ok(None);
        }
        Ok(Some(v))
    }
}

/// Vectors read from a file in the embedding text format, keyed as in
/// [`EncoderInput::key`]. Lets any external encoder plug in.
pub struct PrecomputedEncoder {
    vectors: HashMap<String, Vec<f64>>,
    dim: usize,
}

impl PrecomputedEncoder {
    pub const ID: &'static str = "precomputed";

    pub fn from_table(table: &EmbeddingTable) -> Self {
        let vectors = table
            .words()
            .iter()
            .map(|k| {
                let mut v = table.get(k).expect("word in table").to_vec();
                normalize(&mut v);
                (k.clone(), v)
            })
            .collect();
        Self {
            vectors,
            dim: table.dim(),
        }
    }

    pub fn load(path: &Path) -> Result<Self, RetrievalError> {
        let table = EmbeddingTable::load(path)?;
        Ok(Self::from_table(&table))
    }
}

impl SentenceEncoder for PrecomputedEncoder {
    fn id(&self) -> &str {
        Self::ID
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn encode(&self, input: EncoderInput<'_>) -> Result<Option<Vec<f64>>, RetrievalError> {
        let key = input.key();
        match self.vectors.get(&key) {
            Some(v) if v.iter().any(|x| *x != 0.0) => Ok(Some(v.clone())),
            Some(_) => Ok(None),
            None => Err(RetrievalError::MissingVector(key)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::PosTag;
    use crate::vecmath::l2_norm;

    #[test]
    fn word_sum_is_unit_norm() {
        let table = EmbeddingTable::from_pairs(2, [("a", vec![3.0, 0.0]), ("b", vec![0.0, 4.0])]);
        let enc = WordSumEncoder::new(&table);
        let s = TaggedSentence::from_pairs(0, &[("a", PosTag::Noun), ("b", PosTag::Noun)]);
        let v = enc
            .encode(EncoderInput::Sentence { role: SplitRole::Bank, sentence: &s })
            .unwrap()
            .unwrap();
        assert!((l2_norm(&v) - 1.0).abs() < 1e-12);
        assert_eq!(v, vec![0.6, 0.8]);
        assert!(enc.encode(EncoderInput::Phrase("zzz")).unwrap().is_none());
        assert_eq!(enc.encode(EncoderInput::Phrase("B")).unwrap(), Some(vec![0.0, 1.0]));
    }

    #[test]
    fn precomputed_keys() {
        let table = EmbeddingTable::from_pairs(
            2,
            [
                ("7", vec![2.0, 0.0]),
                ("in-domain:3", vec![0.0, 5.0]),
                ("seed:pizza", vec![1.0, 1.0]),
                ("seed:zero", vec![0.0, 0.0]),
            ],
        );
        let enc = PrecomputedEncoder::from_table(&table);
        let s7 = TaggedSentence::from_pairs(7, &[("x", PosTag::Other)]);
        let s3 = TaggedSentence::from_pairs(3, &[("x", PosTag::Other)]);
        assert_eq!(
            enc.encode(EncoderInput::Sentence { role: SplitRole::Bank, sentence: &s7 }).unwrap(),
            Some(vec![1.0, 0.0])
        );
        assert_eq!(
            enc.encode(EncoderInput::Sentence { role: SplitRole::InDomain, sentence: &s3 }).unwrap(),
            Some(vec![0.0, 1.0])
        );
        assert!(enc.encode(EncoderInput::Phrase("zero")).unwrap().is_none());
        assert!(matches!(
            enc.encode(EncoderInput::Phrase("wine")),
            Err(RetrievalError::MissingVector(k)) if k == "seed:wine"
        ));
    }
}
