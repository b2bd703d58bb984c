use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ClassifierError, LossWeights, MultitaskConfig, MultitaskModel, SharedEncoder, TrainingExample};

/// Adam with decoupled weight decay.
#[derive(Debug, Clone)]
pub struct AdamW {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    weight_decay: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    step: i32,
}

impl AdamW {
    pub fn new(params: usize, lr: f64, beta1: f64, beta2: f64, eps: f64, weight_decay: f64) -> Self {
        Self {
            lr,
            beta1,
            beta2,
            eps,
            weight_decay,
            m: vec![0.0; params],
            v: vec![0.0; params],
            step: 0,
        }
    }

    pub fn from_config(params: usize, c: &MultitaskConfig) -> Self {
        Self::new(params, c.learning_rate, c.beta1, c.beta2, c.adam_eps, c.weight_decay)
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        self.step += 1;
        let bc1 = 1.0 - self.beta1.powi(self.step);
        let bc2 = 1.0 - self.beta2.powi(self.step);
        for i in 0..params.len() {
            let g = grad[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] -= self.lr * (m_hat / (v_hat.sqrt() + self.eps) + self.weight_decay * params[i]);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Loss over the whole training set before the first update.
    pub initial_loss: f64,
    /// Mean batch loss of each epoch.
    pub epoch_losses: Vec<f64>,
    /// Loss over the whole training set after the last update.
    pub final_loss: f64,
}

fn batch_gradient<E: SharedEncoder>(
    model: &MultitaskModel<E>,
    batch: &[&TrainingExample],
    weights: &LossWeights,
    threads: usize,
) -> Result<(f64, Vec<f64>), ClassifierError> {
    let scale = 1.0 / batch.len() as f64;
    let n = model.param_count();
    if threads <= 1 || batch.len() < 2 {
        let mut grad = vec![0.0; n];
        let loss = model.accumulate_gradient(batch, weights, scale, &mut grad)?;
        return Ok((loss, grad));
    }
    let chunk = batch.len().div_ceil(threads);
    let parts: Vec<Result<(f64, Vec<f64>), ClassifierError>> = std::thread::scope(|s| {
        let handles: Vec<_> = batch
            .chunks(chunk)
            .map(|shard| {
                s.spawn(move || {
                    let mut grad = vec![0.0; n];
                    let loss = model.accumulate_gradient(shard, weights, scale, &mut grad)?;
                    Ok((loss, grad))
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("gradient worker panicked")).collect()
    });
    // Reduce in shard order so results depend only on the thread count.
    let mut loss = 0.0;
    let mut grad = vec![0.0; n];
    for part in parts {
        let (l, g) = part?;
        loss += l;
        grad.iter_mut().zip(&g).for_each(|(a, b)| *a += b);
    }
    Ok((loss, grad))
}

fn full_loss<E: SharedEncoder>(model: &MultitaskModel<E>, data: &[TrainingExample], weights: &LossWeights) -> Result<f64, ClassifierError> {
    let refs: Vec<&TrainingExample> = data.iter().collect();
    model.loss(&refs, weights)
}

/// Mini-batch AdamW over `data`, shuffled each epoch.
pub fn train<E: SharedEncoder>(
    model: &mut MultitaskModel<E>,
    data: &[TrainingExample],
    config: &MultitaskConfig,
) -> Result<TrainReport, ClassifierError> {
    config.validate()?;
    if data.is_empty() {
        return Err(ClassifierError::EmptyTrainingSet);
    }
    let aspects = model.aspects().len();
    for (i, ex) in data.iter().enumerate() {
        ex.check(i, aspects)?;
    }
    let weights = config.weights();
    let initial_loss = full_loss(model, data, &weights)?;
    if !initial_loss.is_finite() {
        return Err(ClassifierError::Diverged { epoch: 0, loss: initial_loss });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let mut opt = AdamW::from_config(model.param_count(), config);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut epoch_losses = Vec::with_capacity(config.epochs);
    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let mut sum = 0.0;
        let mut batches = 0;
        for idx in order.chunks(config.batch_size) {
            let batch: Vec<&TrainingExample> = idx.iter().map(|&i| &data[i]).collect();
            let (loss, grad) = batch_gradient(model, &batch, &weights, config.threads)?;
            if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                return Err(ClassifierError::Diverged { epoch, loss });
            }
            opt.step(model.params_mut(), &grad);
            sum += loss;
            batches += 1;
        }
        let mean = sum / batches as f64;
        log::debug!("epoch {epoch}: mean batch loss {mean:.6}");
        epoch_losses.push(mean);
    }
    let final_loss = full_loss(model, data, &weights)?;
    if !final_loss.is_finite() {
        return Err(ClassifierError::Diverged {
            epoch: config.epochs,
            loss: final_loss,
        });
    }
    Ok(TrainReport {
        initial_loss,
        epoch_losses,
        final_loss,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::{FrozenEmbeddingEncoder, WindowEncoder};
    use crate::embedding::EmbeddingTable;
    use crate::pseudolabel::bio::{PolarityTag, TermTag};
    use crate::Polarity;
    use rand::Rng;

    fn table(dim: usize, words: &[&str], seed: u64) -> EmbeddingTable {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        EmbeddingTable::from_pairs(dim, words.iter().map(|w| (*w, (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())))
    }

    /// Two aspects, each with its own cue words; the cue is always a term.
    fn separable(n: usize, seed: u64) -> (EmbeddingTable, Vec<TrainingExample>) {
        let cues = [["pizza", "pasta", "sushi"], ["waiter", "staff", "host"]];
        let filler = ["the", "was", "very", "a", "and", "really"];
        let mut words: Vec<&str> = cues.iter().flatten().copied().collect();
        words.extend(filler);
        let t = table(6, &words, 99);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..n)
            .map(|i| {
                let aspect = i % 2;
                let len = rng.gen_range(3..7);
                let cue_at = rng.gen_range(0..len);
                let mut tokens = Vec::new();
                let mut terms = Vec::new();
                let mut pols = Vec::new();
                for j in 0..len {
                    if j == cue_at {
                        tokens.push(cues[aspect][rng.gen_range(0..3)].to_string());
                        terms.push(TermTag::B);
                        pols.push(PolarityTag::B(Polarity::Pos));
                    } else {
                        tokens.push(filler[rng.gen_range(0..filler.len())].to_string());
                        terms.push(TermTag::O);
                        pols.push(PolarityTag::O);
                    }
                }
                TrainingExample {
                    tokens,
                    acd: aspect,
                    term_tags: Some(terms),
                    polarity_tags: Some(pols),
                }
            })
            .collect();
        (t, data)
    }

    fn small_config(epochs: usize) -> MultitaskConfig {
        MultitaskConfig {
            window_dim: 4,
            hidden_dim: 8,
            epochs,
            learning_rate: 1e-2,
            ..Default::default()
        }
    }

    #[test]
    fn separable_loss_halves() {
        let (t, data) = separable(100, 1);
        let cfg = small_config(20);
        let mut model = MultitaskModel::new(WindowEncoder::new(t, 4, 8, 2), vec!["food".into(), "service".into()], 3);
        let report = train(&mut model, &data, &cfg).unwrap();
        assert_eq!(report.epoch_losses.len(), 20);
        assert!(report.final_loss < 0.5 * report.initial_loss, "{report:?}");
    }

    #[test]
    fn empty_training_set_is_an_error() {
        let t = table(2, &["a"], 0);
        let mut model = MultitaskModel::new(FrozenEmbeddingEncoder::new(t), vec!["x".into(), "y".into()], 0);
        assert!(matches!(train(&mut model, &[], &small_config(1)), Err(ClassifierError::EmptyTrainingSet)));
    }

    #[test]
    fn zero_token_weights_equal_acd_only_training() {
        let (t, data) = separable(40, 2);
        let cfg = MultitaskConfig {
            lambda_ate: 0.0,
            lambda_atp: 0.0,
            ..small_config(3)
        };
        let stripped: Vec<TrainingExample> = data
            .iter()
            .map(|e| TrainingExample {
                term_tags: None,
                polarity_tags: None,
                ..e.clone()
            })
            .collect();
        let names = vec!["food".to_string(), "service".to_string()];
        let mut a = MultitaskModel::new(WindowEncoder::new(t.clone(), 4, 8, 2), names.clone(), 5);
        let mut b = MultitaskModel::new(WindowEncoder::new(t, 4, 8, 2), names, 5);
        let ra = train(&mut a, &data, &cfg).unwrap();
        let acd_only = MultitaskConfig {
            lambda_acd: 1.0,
            ..cfg.clone()
        };
        let rb = train(&mut b, &stripped, &acd_only).unwrap();
        assert_eq!(ra, rb);
        assert_eq!(a.params(), b.params());
    }

    #[test]
    fn training_is_deterministic_and_threads_agree() {
        let (t, data) = separable(30, 3);
        let names = vec!["food".to_string(), "service".to_string()];
        let run = |threads: usize| {
            let mut m = MultitaskModel::new(WindowEncoder::new(t.clone(), 4, 8, 2), names.clone(), 11);
            let cfg = MultitaskConfig { threads, ..small_config(2) };
            let r = train(&mut m, &data, &cfg).unwrap();
            (r, m.params().to_vec())
        };
        assert_eq!(run(1), run(1));
        let (r1, p1) = run(1);
        let (r3, p3) = run(3);
        assert!((r1.final_loss - r3.final_loss).abs() < 1e-6);
        assert!(p1.iter().zip(&p3).all(|(a, b)| (a - b).abs() < 1e-6));
    }

    #[test]
    fn mismatched_labels_are_rejected() {
        let t = table(2, &["a"], 0);
        let mut model = MultitaskModel::new(FrozenEmbeddingEncoder::new(t), vec!["x".into(), "y".into()], 0);
        let ex = TrainingExample {
            tokens: vec!["a".into()],
            acd: 5,
            term_tags: None,
            polarity_tags: None,
        };
        assert!(matches!(train(&mut model, &[ex], &small_config(1)), Err(ClassifierError::BadLabel { .. })));
    }
}
