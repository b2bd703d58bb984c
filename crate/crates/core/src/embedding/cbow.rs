//! Continuous bag-of-words training with negative sampling.
//!
//! The context vector is the mean of the input vectors in a symmetric window
//! around the target. Each step maximizes `log σ(u_t·h) + Σ log σ(-u_n·h)`
//! over the target's output vector `u_t` and `negatives` noise words drawn
//! from the unigram distribution raised to 0.75.

use std::collections::HashMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{EmbeddingError, EmbeddingTable};
use crate::vecmath::{axpy, dot};
use crate::TaggedSentence;

const UNIGRAM_POWER: f64 = 0.75;
const MIN_LR_FRACTION: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CbowConfig {
    pub dim: usize,
    pub epochs: usize,
    pub window: usize,
    pub negatives: usize,
    pub min_count: usize,
    pub learning_rate: f64,
    pub rng_seed: u64,
}

impl Default for CbowConfig {
    fn default() -> Self {
        Self {
            dim: 200,
            epochs: 10,
            window: 10,
            negatives: 5,
            min_count: 2,
            learning_rate: 0.025,
            rng_seed: 1,
        }
    }
}

impl CbowConfig {
    pub fn validate(&self) -> Result<(), EmbeddingError> {
        let bad = |m: &str| Err(EmbeddingError::InvalidConfig(m.to_string()));
        if self.dim == 0 {
            return bad("dim must be > 0");
        }
        if self.epochs == 0 {
            return bad("epochs must be > 0");
        }
        if self.window == 0 {
            return bad("window must be > 0");
        }
        if self.negatives == 0 {
            return bad("negatives must be >= 1");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        Ok(())
    }
}

/// One training example: context rows, the target row and the sampled noise rows.
#[derive(Debug, Clone, PartialEq)]
pub struct NegativeSample {
    pub context: Vec<usize>,
    pub target: usize,
    pub negatives: Vec<usize>,
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `-log σ(x)` computed without overflow.
fn neg_log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        (-x).exp().ln_1p()
    } else {
        -x + x.exp().ln_1p()
    }
}

fn context_mean(input: &[f64], dim: usize, context: &[usize], out: &mut [f64]) {
    out.iter_mut().for_each(|v| *v = 0.0);
    for &c in context {
        axpy(1.0, &input[c * dim..(c + 1) * dim], out);
    }
    let scale = 1.0 / context.len() as f64;
    out.iter_mut().for_each(|v| *v *= scale);
}

/// Loss for one example given the context mean `h`.
///
/// Writes `dL/dh` into `grad_h` and reports `dL/du_row = coeff * h` for every
/// output row through `on_output(row, coeff)`. Output vectors are only read.
fn step_core(
    h: &[f64],
    output: &[f64],
    dim: usize,
    target: usize,
    negatives: &[usize],
    grad_h: &mut [f64],
    mut on_output: impl FnMut(usize, f64),
) -> f64 {
    grad_h.iter_mut().for_each(|g| *g = 0.0);
    let mut loss = 0.0;

    let u = &output[target * dim..(target + 1) * dim];
    let score = dot(u, h);
    loss += neg_log_sigmoid(score);
    let coeff = sigmoid(score) - 1.0;
    axpy(coeff, u, grad_h);
    on_output(target, coeff);

    for &n in negatives {
        let u = &output[n * dim..(n + 1) * dim];
        let score = dot(u, h);
        loss += neg_log_sigmoid(-score);
        let coeff = sigmoid(score);
        axpy(coeff, u, grad_h);
        on_output(n, coeff);
    }
    loss
}

/// Negative-sampling loss of one example over row-major `input`/`output` matrices.
pub fn negative_sampling_loss(input: &[f64], output: &[f64], dim: usize, sample: &NegativeSample) -> f64 {
    let mut h = vec![0.0; dim];
    let mut scratch = vec![0.0; dim];
    context_mean(input, dim, &sample.context, &mut h);
    step_core(&h, output, dim, sample.target, &sample.negatives, &mut scratch, |_, _| {})
}

/// Loss and dense gradients with respect to both matrices.
pub fn negative_sampling_loss_grad(
    input: &[f64],
    output: &[f64],
    dim: usize,
    sample: &NegativeSample,
) -> (f64, Vec<f64>, Vec<f64>) {
    let mut h = vec![0.0; dim];
    let mut grad_h = vec![0.0; dim];
    context_mean(input, dim, &sample.context, &mut h);
    let mut grad_out = vec![0.0; output.len()];
    let loss = step_core(&h, output, dim, sample.target, &sample.negatives, &mut grad_h, |row, coeff| {
        axpy(coeff, &h, &mut grad_out[row * dim..(row + 1) * dim]);
    });
    let mut grad_in = vec![0.0; input.len()];
    let share = 1.0 / sample.context.len() as f64;
    for &c in &sample.context {
        axpy(share, &grad_h, &mut grad_in[c * dim..(c + 1) * dim]);
    }
    (loss, grad_in, grad_out)
}

struct Vocabulary {
    words: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, usize>,
}

fn build_vocabulary(corpus: &[TaggedSentence], min_count: usize) -> Vocabulary {
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for s in corpus {
        for w in s.surfaces() {
            *counts.entry(w).or_default() += 1;
        }
    }
    let mut kept: Vec<(&str, u64)> = counts
        .into_iter()
        .filter(|(_, c)| *c >= min_count as u64)
        .collect();
    kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let words: Vec<String> = kept.iter().map(|(w, _)| w.to_string()).collect();
    let index = words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
    Vocabulary {
        counts: kept.iter().map(|(_, c)| *c).collect(),
        words,
        index,
    }
}

/// Cumulative noise distribution over vocabulary rows.
struct NoiseSampler {
    cumulative: Vec<f64>,
}

impl NoiseSampler {
    fn new(counts: &[u64]) -> Self {
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = counts
            .iter()
            .map(|&c| {
                acc += (c as f64).powf(UNIGRAM_POWER);
                acc
            })
            .collect();
        cumulative.iter_mut().for_each(|c| *c /= acc);
        Self { cumulative }
    }

    fn sample(&self, rng: &mut impl Rng) -> usize {
        let x: f64 = rng.gen();
        self.cumulative
            .partition_point(|&c| c <= x)
            .min(self.cumulative.len() - 1)
    }
}

/// Trains CBOW vectors on `corpus`. Single-threaded and bit-for-bit
/// reproducible for a fixed `rng_seed`.
pub fn train_cbow(corpus: &[TaggedSentence], cfg: &CbowConfig) -> Result<EmbeddingTable, EmbeddingError> {
    cfg.validate()?;
    if corpus.is_empty() {
        return Err(EmbeddingError::EmptyCorpus);
    }
    let vocab = build_vocabulary(corpus, cfg.min_count);
    if vocab.words.is_empty() {
        return Err(EmbeddingError::EmptyVocabulary(cfg.min_count));
    }
    let dim = cfg.dim;
    let rows = vocab.words.len();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);

    let mut input: Vec<f64> = (0..rows * dim)
        .map(|_| (rng.gen::<f64>() - 0.5) / dim as f64)
        .collect();
    let mut output = vec![0.0; rows * dim];
    let noise = NoiseSampler::new(&vocab.counts);

    let encoded: Vec<Vec<usize>> = corpus
        .iter()
        .map(|s| s.surfaces().filter_map(|w| vocab.index.get(w).copied()).collect())
        .collect();
    let total_steps = (cfg.epochs * encoded.iter().map(Vec::len).sum::<usize>()).max(1);

    let mut h = vec![0.0; dim];
    let mut grad_h = vec![0.0; dim];
    let mut context = Vec::with_capacity(2 * cfg.window);
    let mut negatives = Vec::with_capacity(cfg.negatives);
    let mut output_grads: Vec<(usize, f64)> = Vec::with_capacity(cfg.negatives + 1);
    let mut done = 0usize;

    for _ in 0..cfg.epochs {
        for sentence in &encoded {
            for (pos, &target) in sentence.iter().enumerate() {
                let lr = cfg.learning_rate
                    * (1.0 - done as f64 / total_steps as f64).max(MIN_LR_FRACTION);
                done += 1;

                let lo = pos.saturating_sub(cfg.window);
                let hi = (pos + cfg.window + 1).min(sentence.len());
                context.clear();
                context.extend((lo..hi).filter(|&i| i != pos).map(|i| sentence[i]));
                if context.is_empty() {
                    continue;
                }
                negatives.clear();
                for _ in 0..cfg.negatives {
                    let n = noise.sample(&mut rng);
                    if n != target {
                        negatives.push(n);
                    }
                }

                context_mean(&input, dim, &context, &mut h);
                output_grads.clear();
                step_core(&h, &output, dim, target, &negatives, &mut grad_h, |row, coeff| {
                    output_grads.push((row, coeff))
                });
                for &(row, coeff) in &output_grads {
                    axpy(-lr * coeff, &h, &mut output[row * dim..(row + 1) * dim]);
                }
                let share = -lr / context.len() as f64;
                for &c in &context {
                    axpy(share, &grad_h, &mut input[c * dim..(c + 1) * dim]);
                }
            }
        }
    }

    let mut table = EmbeddingTable::new(dim);
    for (row, word) in vocab.words.iter().enumerate() {
        table.insert(word.clone(), &input[row * dim..(row + 1) * dim], vocab.counts[row]);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::PosTag;

    fn sentence(id: usize, words: &[&str]) -> TaggedSentence {
        TaggedSentence::from_pairs(
            id,
            &words.iter().map(|w| (*w, PosTag::Other)).collect::<Vec<_>>(),
        )
    }

    fn small_cfg() -> CbowConfig {
        CbowConfig {
            dim: 16,
            epochs: 3,
            window: 3,
            min_count: 1,
            ..CbowConfig::default()
        }
    }

    #[test]
    fn config_validation() {
        assert!(CbowConfig::default().validate().is_ok());
        for cfg in [
            CbowConfig { dim: 0, ..CbowConfig::default() },
            CbowConfig { epochs: 0, ..CbowConfig::default() },
            CbowConfig { window: 0, ..CbowConfig::default() },
            CbowConfig { negatives: 0, ..CbowConfig::default() },
            CbowConfig { learning_rate: f64::NAN, ..CbowConfig::default() },
        ] {
            assert!(matches!(cfg.validate(), Err(EmbeddingError::InvalidConfig(_))));
        }
    }

    #[test]
    fn min_count_can_empty_the_vocabulary() {
        let corpus = vec![sentence(0, &["a", "b", "c"])];
        let cfg = CbowConfig { min_count: 5, ..small_cfg() };
        assert!(matches!(train_cbow(&corpus, &cfg), Err(EmbeddingError::EmptyVocabulary(5))));
        assert!(matches!(train_cbow(&[], &small_cfg()), Err(EmbeddingError::EmptyCorpus)));
    }

    #[test]
    fn vocabulary_respects_min_count_and_records_counts() {
        let corpus = vec![sentence(0, &["a", "b", "a"]), sentence(1, &["a", "c", "b"])];
        let cfg = CbowConfig { min_count: 2, ..small_cfg() };
        let table = train_cbow(&corpus, &cfg).unwrap();
        assert_eq!(table.words(), &["a".to_string(), "b".to_string()]);
        assert_eq!(table.count("a"), 3);
        assert!(table.get("c").is_none());
    }

    #[test]
    fn noise_sampler_follows_smoothed_unigram() {
        let sampler = NoiseSampler::new(&[16, 1]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let draws = 20_000;
        let zeros = (0..draws).filter(|_| sampler.sample(&mut rng) == 0).count();
        let expected = 8.0 / 9.0;
        assert!((zeros as f64 / draws as f64 - expected).abs() < 0.01);
    }

    #[test]
    fn loss_is_stable_for_large_scores() {
        assert!(neg_log_sigmoid(800.0) >= 0.0);
        assert!((neg_log_sigmoid(-800.0) - 800.0).abs() < 1e-9);
        assert!((sigmoid(0.0) - 0.5).abs() < 1e-15);
    }
}
