//! Multi-task classifier for aspect category detection (ACD), aspect term
//! extraction (ATE) and aspect term polarity (ATP).

mod decode;
mod encoder;
mod export;
mod model;
mod train;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pseudolabel::bio::{PolarityTag, TermTag};
use crate::pseudolabel::PseudoLabeledSentence;

pub use decode::{decode, decode_term_tags, predict, repair_term_tags, Prediction};
pub use encoder::{FrozenEmbeddingEncoder, SharedEncoder, WindowCache, WindowEncoder, DEFAULT_RADIUS};
pub use export::{parse_training_export, training_export, Checkpoint, NativeModel, CHECKPOINT_VERSION};
pub use model::MultitaskModel;
pub use train::{train, AdamW, TrainReport};

pub const ATE_CLASSES: usize = 3;
pub const ATP_CLASSES: usize = 5;

/// Lower bound applied to probabilities before taking logs.
pub const PROB_FLOOR: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum ClassifierError {
    #[error("cannot classify an empty sentence")]
    EmptySentence,
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("training diverged at epoch {epoch}: loss is {loss}")]
    Diverged { epoch: usize, loss: f64 },
    #[error("invalid classifier config: {0}")]
    InvalidConfig(String),
    #[error("label for sample {index} does not fit: {message}")]
    BadLabel { index: usize, message: String },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
}

/// How per-token terms are combined inside one sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TokenNormalization {
    #[default]
    Sum,
    Mean,
}

impl TokenNormalization {
    pub fn factor(self, tokens: usize) -> f64 {
        match self {
            TokenNormalization::Sum => 1.0,
            TokenNormalization::Mean => 1.0 / tokens.max(1) as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    pub acd: f64,
    pub ate: f64,
    pub atp: f64,
    pub normalization: TokenNormalization,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            acd: 1.0,
            ate: 0.8,
            atp: 0.6,
            normalization: TokenNormalization::Sum,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MultitaskConfig {
    pub lambda_acd: f64,
    pub lambda_ate: f64,
    pub lambda_atp: f64,
    pub token_normalization: TokenNormalization,
    pub encoder: String,
    pub window_dim: usize,
    pub hidden_dim: usize,
    pub radius: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
    pub weight_decay: f64,
    pub rng_seed: u64,
    pub threads: usize,
}

impl Default for MultitaskConfig {
    fn default() -> Self {
        Self {
            lambda_acd: 1.0,
            lambda_ate: 0.8,
            lambda_atp: 0.6,
            token_normalization: TokenNormalization::Sum,
            encoder: WindowEncoder::ID.to_string(),
            window_dim: 32,
            hidden_dim: 64,
            radius: DEFAULT_RADIUS,
            epochs: 10,
            batch_size: 16,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            adam_eps: 1e-8,
            weight_decay: 1e-5,
            rng_seed: 7,
            threads: 1,
        }
    }
}

impl MultitaskConfig {
    pub fn weights(&self) -> LossWeights {
        LossWeights {
            acd: self.lambda_acd,
            ate: self.lambda_ate,
            atp: self.lambda_atp,
            normalization: self.token_normalization,
        }
    }

    pub fn validate(&self) -> Result<(), ClassifierError> {
        let bad = |m: &str| Err(ClassifierError::InvalidConfig(m.to_string()));
        for (name, v) in [("lambda_acd", self.lambda_acd), ("lambda_ate", self.lambda_ate), ("lambda_atp", self.lambda_atp)] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(&format!("{name} must be a non-negative number"));
            }
        }
        if self.lambda_acd + self.lambda_ate + self.lambda_atp <= 0.0 {
            return bad("at least one task weight must be positive");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be positive");
        }
        if self.hidden_dim == 0 {
            return bad("hidden_dim must be positive");
        }
        if self.threads == 0 {
            return bad("threads must be positive");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return bad("betas must lie in [0, 1)");
        }
        if self.weight_decay < 0.0 {
            return bad("weight_decay must be non-negative");
        }
        if self.encoder != WindowEncoder::ID && self.encoder != FrozenEmbeddingEncoder::ID {
            return bad(&format!("unknown encoder {:?}", self.encoder));
        }
        Ok(())
    }
}

/// One training sample. Missing token labels skip that task's loss term.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingExample {
    pub tokens: Vec<String>,
    pub acd: usize,
    pub term_tags: Option<Vec<TermTag>>,
    pub polarity_tags: Option<Vec<PolarityTag>>,
}

impl TrainingExample {
    pub fn from_pseudo(p: &PseudoLabeledSentence) -> Self {
        Self {
            tokens: p.sentence.surfaces().map(str::to_string).collect(),
            acd: p.acd_label,
            term_tags: Some(p.term_tags.clone()),
            polarity_tags: Some(p.polarity_tags.clone()),
        }
    }

    pub fn check(&self, index: usize, aspects: usize) -> Result<(), ClassifierError> {
        let bad = |message: String| Err(ClassifierError::BadLabel { index, message });
        if self.tokens.is_empty() {
            return bad("no tokens".into());
        }
        if self.acd >= aspects {
            return bad(format!("aspect {} out of range for {aspects} aspects", self.acd));
        }
        let n = self.tokens.len();
        if self.term_tags.as_ref().is_some_and(|t| t.len() != n) {
            return bad("term tag count differs from token count".into());
        }
        if self.polarity_tags.as_ref().is_some_and(|t| t.len() != n) {
            return bad("polarity tag count differs from token count".into());
        }
        Ok(())
    }
}

/// Per-task class probabilities for one sentence.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskProbabilities {
    /// Over aspects.
    pub acd: Vec<f64>,
    /// Per token over `[B, I, O]`.
    pub ate: Vec<Vec<f64>>,
    /// Per token over `[B-POS, I-POS, B-NEG, I-NEG, O]`.
    pub atp: Vec<Vec<f64>>,
}

fn nll(p: f64) -> f64 {
    -p.max(PROB_FLOOR).ln()
}

/// Weighted multi-task loss, averaged over the batch.
pub fn multitask_loss(batch: &[TrainingExample], predictions: &[TaskProbabilities], weights: &LossWeights) -> f64 {
    assert_eq!(batch.len(), predictions.len());
    if batch.is_empty() {
        return 0.0;
    }
    let mut total = 0.0;
    for (ex, pr) in batch.iter().zip(predictions) {
        let norm = weights.normalization.factor(ex.tokens.len());
        let mut sample = weights.acd * nll(pr.acd[ex.acd]);
        if let Some(tags) = &ex.term_tags {
            sample += weights.ate * norm * tags.iter().enumerate().map(|(t, y)| nll(pr.ate[t][y.index()])).sum::<f64>();
        }
        if let Some(tags) = &ex.polarity_tags {
            sample += weights.atp * norm * tags.iter().enumerate().map(|(t, y)| nll(pr.atp[t][y.index()])).sum::<f64>();
        }
        total += sample;
    }
    total / batch.len() as f64
}

/// Unweighted per-task losses `[acd, ate, atp]`, each averaged over the batch.
pub fn task_losses(batch: &[TrainingExample], predictions: &[TaskProbabilities], normalization: TokenNormalization) -> [f64; 3] {
    assert_eq!(batch.len(), predictions.len());
    let mut out = [0.0; 3];
    if batch.is_empty() {
        return out;
    }
    for (ex, pr) in batch.iter().zip(predictions) {
        let norm = normalization.factor(ex.tokens.len());
        out[0] += nll(pr.acd[ex.acd]);
        if let Some(tags) = &ex.term_tags {
            out[1] += norm * tags.iter().enumerate().map(|(t, y)| nll(pr.ate[t][y.index()])).sum::<f64>();
        }
        if let Some(tags) = &ex.polarity_tags {
            out[2] += norm * tags.iter().enumerate().map(|(t, y)| nll(pr.atp[t][y.index()])).sum::<f64>();
        }
    }
    out.map(|v| v / batch.len() as f64)
}
