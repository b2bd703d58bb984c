use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::encoder::{xavier, SharedEncoder};
use super::{ClassifierError, LossWeights, TaskProbabilities, TrainingExample, ATE_CLASSES, ATP_CLASSES, PROB_FLOOR};
use crate::vecmath::{axpy, dot, softmax_in_place};

/// Offsets of each parameter block inside the flat parameter vector.
type Forward<C> = (TaskProbabilities, Vec<f64>, Vec<f64>, C);

/// Gold labels, predicted distributions, weight, and the head's weight and bias offsets.
type TokenTask<'a> = (Option<Vec<usize>>, &'a Vec<Vec<f64>>, f64, usize, usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Layout {
    hidden: usize,
    aspects: usize,
    encoder: usize,
    acd_w: usize,
    acd_b: usize,
    ate_w: usize,
    ate_b: usize,
    atp_w: usize,
    atp_b: usize,
    total: usize,
}

impl Layout {
    fn new(encoder_params: usize, hidden: usize, aspects: usize) -> Self {
        let acd_w = encoder_params;
        let acd_b = acd_w + aspects * hidden;
        let ate_w = acd_b + aspects;
        let ate_b = ate_w + ATE_CLASSES * hidden;
        let atp_w = ate_b + ATE_CLASSES;
        let atp_b = atp_w + ATP_CLASSES * hidden;
        let total = atp_b + ATP_CLASSES;
        Self {
            hidden,
            aspects,
            encoder: encoder_params,
            acd_w,
            acd_b,
            ate_w,
            ate_b,
            atp_w,
            atp_b,
            total,
        }
    }
}

/// Affine map `W x + b` followed by softmax.
fn head(params: &[f64], w: usize, b: usize, classes: usize, dim: usize, x: &[f64]) -> Vec<f64> {
    let mut logits: Vec<f64> = (0..classes)
        .map(|c| params[b + c] + dot(&params[w + c * dim..w + (c + 1) * dim], x))
        .collect();
    softmax_in_place(&mut logits);
    logits
}

/// Gradient of a softmax head given `dL/dlogits`; accumulates `dL/dx` into `dx`.
#[allow(clippy::too_many_arguments)]
fn head_backward(
    params: &[f64],
    grad: &mut [f64],
    w: usize,
    b: usize,
    dim: usize,
    x: &[f64],
    d_logits: &[f64],
    dx: &mut [f64],
) {
    for (c, &g) in d_logits.iter().enumerate() {
        grad[b + c] += g;
        axpy(g, x, &mut grad[w + c * dim..w + (c + 1) * dim]);
        axpy(g, &params[w + c * dim..w + (c + 1) * dim], dx);
    }
}

/// Shared encoder with ACD, ATE and ATP heads.
pub struct MultitaskModel<E: SharedEncoder> {
    encoder: E,
    aspects: Vec<String>,
    params: Vec<f64>,
    layout: Layout,
}

impl<E: SharedEncoder> MultitaskModel<E> {
    /// Randomly initialized model; identical for identical seeds.
    pub fn new(encoder: E, aspects: Vec<String>, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = encoder.hidden_dim();
        let k = aspects.len();
        let layout = Layout::new(encoder.param_count(), h, k);
        let mut params = encoder.init_params(&mut rng);
        debug_assert_eq!(params.len(), layout.encoder);
        for classes in [k, ATE_CLASSES, ATP_CLASSES] {
            params.extend(xavier(&mut rng, h, classes, classes * h));
            params.extend(std::iter::repeat_n(0.0, classes));
        }
        debug_assert_eq!(params.len(), layout.total);
        Self {
            encoder,
            aspects,
            params,
            layout,
        }
    }

    /// Wraps existing parameters, e.g. from a checkpoint.
    pub fn from_params(encoder: E, aspects: Vec<String>, params: Vec<f64>) -> Result<Self, ClassifierError> {
        let layout = Layout::new(encoder.param_count(), encoder.hidden_dim(), aspects.len());
        if params.len() != layout.total {
            return Err(ClassifierError::Checkpoint(format!(
                "expected {} parameters, found {}",
                layout.total,
                params.len()
            )));
        }
        Ok(Self {
            encoder,
            aspects,
            params,
            layout,
        })
    }

    pub fn encoder(&self) -> &E {
        &self.encoder
    }

    pub fn aspects(&self) -> &[String] {
        &self.aspects
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn param_count(&self) -> usize {
        self.layout.total
    }

    /// Index range of the task-head parameters.
    pub fn head_param_range(&self) -> std::ops::Range<usize> {
        self.layout.encoder..self.layout.total
    }

    /// Index range of the ACD head parameters.
    pub fn acd_head_range(&self) -> std::ops::Range<usize> {
        self.layout.acd_w..self.layout.ate_w
    }

    /// Probabilities, hidden vectors, pooled vector and the encoder cache.
    fn run(&self, params: &[f64], tokens: &[String]) -> Result<Forward<E::Cache>, ClassifierError> {
        if tokens.is_empty() {
            return Err(ClassifierError::EmptySentence);
        }
        let l = &self.layout;
        let h = l.hidden;
        let (hidden, cache) = self.encoder.forward(&params[..l.encoder], tokens);
        let n = tokens.len();
        let mut pooled = vec![0.0; h];
        for t in 0..n {
            axpy(1.0 / n as f64, &hidden[t * h..(t + 1) * h], &mut pooled);
        }
        let acd = head(params, l.acd_w, l.acd_b, l.aspects, h, &pooled);
        let ate = (0..n)
            .map(|t| head(params, l.ate_w, l.ate_b, ATE_CLASSES, h, &hidden[t * h..(t + 1) * h]))
            .collect();
        let atp = (0..n)
            .map(|t| head(params, l.atp_w, l.atp_b, ATP_CLASSES, h, &hidden[t * h..(t + 1) * h]))
            .collect();
        Ok((TaskProbabilities { acd, ate, atp }, hidden, pooled, cache))
    }

    /// Class probabilities for every task.
    pub fn forward(&self, tokens: &[String]) -> Result<TaskProbabilities, ClassifierError> {
        self.run(&self.params, tokens).map(|r| r.0)
    }

    /// Weighted batch loss.
    pub fn loss(&self, batch: &[&TrainingExample], weights: &LossWeights) -> Result<f64, ClassifierError> {
        let predictions = batch
            .iter()
            .map(|ex| self.forward(&ex.tokens))
            .collect::<Result<Vec<_>, _>>()?;
        let owned: Vec<TrainingExample> = batch.iter().map(|e| (*e).clone()).collect();
        Ok(super::multitask_loss(&owned, &predictions, weights))
    }

    /// Loss and its gradient with respect to every parameter.
    ///
    /// `scale` multiplies each sample's contribution; pass `1 / |batch|` for
    /// the mean over a batch.
    pub fn accumulate_gradient(
        &self,
        examples: &[&TrainingExample],
        weights: &LossWeights,
        scale: f64,
        grad: &mut [f64],
    ) -> Result<f64, ClassifierError> {
        let l = self.layout;
        let h = l.hidden;
        let p = &self.params;
        let mut total = 0.0;
        for ex in examples {
            let (probs, hidden, pooled, cache) = self.run(p, &ex.tokens)?;
            let n = ex.tokens.len();
            let mut d_hidden = vec![0.0; n * h];

            // ACD on the mean-pooled representation.
            let y = ex.acd;
            total -= scale * weights.acd * probs.acd[y].max(PROB_FLOOR).ln();
            let d_logits: Vec<f64> = probs
                .acd
                .iter()
                .enumerate()
                .map(|(c, &pc)| scale * weights.acd * (pc - f64::from(u8::from(c == y))))
                .collect();
            let mut d_pooled = vec![0.0; h];
            head_backward(p, grad, l.acd_w, l.acd_b, h, &pooled, &d_logits, &mut d_pooled);
            for t in 0..n {
                axpy(1.0 / n as f64, &d_pooled, &mut d_hidden[t * h..(t + 1) * h]);
            }

            let token_scale = weights.normalization.factor(n);
            let token_tasks: [TokenTask; 2] = [
                (
                    ex.term_tags.as_ref().map(|t| t.iter().map(|x| x.index()).collect()),
                    &probs.ate,
                    weights.ate,
                    l.ate_w,
                    l.ate_b,
                ),
                (
                    ex.polarity_tags.as_ref().map(|t| t.iter().map(|x| x.index()).collect()),
                    &probs.atp,
                    weights.atp,
                    l.atp_w,
                    l.atp_b,
                ),
            ];
            for (labels, probs, lambda, w, b) in token_tasks {
                let Some(labels) = labels else { continue };
                let coeff = scale * lambda * token_scale;
                for t in 0..n {
                    let yt = labels[t];
                    total -= coeff * probs[t][yt].max(PROB_FLOOR).ln();
                    let d_logits: Vec<f64> = probs[t]
                        .iter()
                        .enumerate()
                        .map(|(c, &pc)| coeff * (pc - f64::from(u8::from(c == yt))))
                        .collect();
                    let (x, dx) = (&hidden[t * h..(t + 1) * h], &mut d_hidden[t * h..(t + 1) * h]);
                    head_backward(p, grad, w, b, h, x, &d_logits, dx);
                }
            }

            self.encoder
                .backward(&p[..l.encoder], &cache, &d_hidden, &mut grad[..l.encoder]);
        }
        Ok(total)
    }

    /// Mean loss over `batch` and its full gradient.
    pub fn loss_and_gradient(
        &self,
        batch: &[&TrainingExample],
        weights: &LossWeights,
    ) -> Result<(f64, Vec<f64>), ClassifierError> {
        let mut grad = vec![0.0; self.layout.total];
        let scale = 1.0 / batch.len().max(1) as f64;
        let loss = self.accumulate_gradient(batch, weights, scale, &mut grad)?;
        Ok((loss, grad))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::{TokenNormalization, WindowEncoder};
    use crate::embedding::EmbeddingTable;
    use crate::pseudolabel::bio::{PolarityTag, TermTag};
    use rand::Rng;

    fn fixture(seed: u64) -> (MultitaskModel<WindowEncoder>, Vec<TrainingExample>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let words = ["pizza", "staff", "rude", "good", "the"];
        let table = EmbeddingTable::from_pairs(
            3,
            words.iter().map(|w| (*w, (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect())),
        );
        let model = MultitaskModel::new(WindowEncoder::new(table, 2, 4, 2), vec!["a".into(), "b".into(), "c".into()], seed);
        let batch = (0..3)
            .map(|_| {
                let n = rng.gen_range(1..6);
                TrainingExample {
                    tokens: (0..n).map(|_| words[rng.gen_range(0..words.len())].to_string()).collect(),
                    acd: rng.gen_range(0..3),
                    term_tags: Some((0..n).map(|_| TermTag::from_index(rng.gen_range(0..3))).collect()),
                    polarity_tags: Some((0..n).map(|_| PolarityTag::from_index(rng.gen_range(0..5))).collect()),
                }
            })
            .collect();
        (model, batch)
    }

    #[test]
    fn gradient_matches_finite_differences() {
        for seed in 0..10 {
            let (mut model, batch) = fixture(seed);
            let refs: Vec<&TrainingExample> = batch.iter().collect();
            let normalization = if seed % 2 == 0 { TokenNormalization::Sum } else { TokenNormalization::Mean };
            let w = LossWeights { normalization, ..LossWeights::default() };
            let (loss, grad) = model.loss_and_gradient(&refs, &w).unwrap();
            assert!((loss - model.loss(&refs, &w).unwrap()).abs() < 1e-12);
            let h = 1e-5;
            for (i, &analytic) in grad.iter().enumerate() {
                let orig = model.params()[i];
                model.params_mut()[i] = orig + h;
                let up = model.loss(&refs, &w).unwrap();
                model.params_mut()[i] = orig - h;
                let down = model.loss(&refs, &w).unwrap();
                model.params_mut()[i] = orig;
                let numeric = (up - down) / (2.0 * h);
                let rel = (numeric - analytic).abs() / numeric.abs().max(analytic.abs()).max(1e-6);
                assert!(rel < 1e-4, "seed {seed} param {i}: analytic {} numeric {numeric}", analytic);
            }
        }
    }

    #[test]
    fn layout_covers_every_parameter() {
        let (model, _) = fixture(0);
        assert_eq!(model.params().len(), model.param_count());
        assert_eq!(model.head_param_range().end, model.param_count());
        assert!(model.acd_head_range().start >= model.head_param_range().start);
    }
}
