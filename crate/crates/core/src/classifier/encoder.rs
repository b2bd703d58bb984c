//! Shared token encoders feeding the task heads.

use rand::Rng;

use crate::embedding::EmbeddingTable;
use crate::vecmath::axpy;

/// Turns a sentence into one hidden vector per token.
///
/// Parameters live in a flat slice owned by the model so the optimizer and
/// gradient checks can treat encoder and heads uniformly.
pub trait SharedEncoder: Send + Sync {
    /// Whatever `forward` needs to remember for `backward`.
    type Cache: Send;

    fn id(&self) -> &str;

    fn hidden_dim(&self) -> usize;

    fn param_count(&self) -> usize;

    fn init_params(&self, rng: &mut dyn rand::RngCore) -> Vec<f64>;

    /// Returns `tokens.len() * hidden_dim` values, row-major by token.
    fn forward(&self, params: &[f64], tokens: &[String]) -> (Vec<f64>, Self::Cache);

    /// Accumulates parameter gradients into `grad` given `dL/dhidden`.
    fn backward(&self, params: &[f64], cache: &Self::Cache, d_hidden: &[f64], grad: &mut [f64]);
}

/// Frozen word vector concatenated with a learned projection of the
/// neighbourhood mean (`±radius` tokens, the token included), then one
/// `tanh` layer.
#[derive(Debug, Clone)]
pub struct WindowEncoder {
    table: EmbeddingTable,
    window_dim: usize,
    hidden_dim: usize,
    radius: usize,
}

pub struct WindowCache {
    /// neighbourhood means, n × d
    means: Vec<f64>,
    /// [e; W_c m], n × (d + c)
    inputs: Vec<f64>,
    /// tanh outputs, n × h
    hidden: Vec<f64>,
}

pub const DEFAULT_RADIUS: usize = 2;

impl WindowEncoder {
    pub const ID: &'static str = "window";

    pub fn new(table: EmbeddingTable, window_dim: usize, hidden_dim: usize, radius: usize) -> Self {
        assert!(hidden_dim > 0);
        Self {
            table,
            window_dim,
            hidden_dim,
            radius,
        }
    }

    pub fn table(&self) -> &EmbeddingTable {
        &self.table
    }

    pub fn window_dim(&self) -> usize {
        self.window_dim
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    fn input_dim(&self) -> usize {
        self.table.dim() + self.window_dim
    }

    fn split<'p>(&self, params: &'p [f64]) -> (&'p [f64], &'p [f64], &'p [f64]) {
        let d = self.table.dim();
        let (wc, rest) = params.split_at(self.window_dim * d);
        let (wh, bh) = rest.split_at(self.hidden_dim * self.input_dim());
        (wc, wh, bh)
    }
}

pub(crate) fn xavier(rng: &mut dyn rand::RngCore, fan_in: usize, fan_out: usize, n: usize) -> Vec<f64> {
    let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
    (0..n).map(|_| rng.gen_range(-bound..bound)).collect()
}

impl SharedEncoder for WindowEncoder {
    type Cache = WindowCache;

    fn id(&self) -> &str {
        Self::ID
    }

    fn hidden_dim(&self) -> usize {
        self.hidden_dim
    }

    fn param_count(&self) -> usize {
        self.window_dim * self.table.dim() + self.hidden_dim * self.input_dim() + self.hidden_dim
    }

    fn init_params(&self, rng: &mut dyn rand::RngCore) -> Vec<f64> {
        let d = self.table.dim();
        let mut p = xavier(rng, d, self.window_dim, self.window_dim * d);
        p.extend(xavier(rng, self.input_dim(), self.hidden_dim, self.hidden_dim * self.input_dim()));
        p.extend(std::iter::repeat_n(0.0, self.hidden_dim));
        p
    }

    fn forward(&self, params: &[f64], tokens: &[String]) -> (Vec<f64>, WindowCache) {
        let n = tokens.len();
        let d = self.table.dim();
        let c = self.window_dim;
        let x_dim = self.input_dim();
        let h_dim = self.hidden_dim;
        let (wc, wh, bh) = self.split(params);

        let mut embedded = vec![0.0; n * d];
        for (t, w) in tokens.iter().enumerate() {
            if let Some(v) = self.table.get(w) {
                embedded[t * d..(t + 1) * d].copy_from_slice(v);
            }
        }
        let mut means = vec![0.0; n * d];
        for t in 0..n {
            let lo = t.saturating_sub(self.radius);
            let hi = (t + self.radius + 1).min(n);
            let share = 1.0 / (hi - lo) as f64;
            let (row, _) = means[t * d..].split_at_mut(d);
            for j in lo..hi {
                axpy(share, &embedded[j * d..(j + 1) * d], row);
            }
        }
        let mut inputs = vec![0.0; n * x_dim];
        let mut hidden = vec![0.0; n * h_dim];
        for t in 0..n {
            let x = &mut inputs[t * x_dim..(t + 1) * x_dim];
            x[..d].copy_from_slice(&embedded[t * d..(t + 1) * d]);
            let m = &means[t * d..(t + 1) * d];
            for k in 0..c {
                x[d + k] = crate::vecmath::dot(&wc[k * d..(k + 1) * d], m);
            }
            for j in 0..h_dim {
                let pre = bh[j] + crate::vecmath::dot(&wh[j * x_dim..(j + 1) * x_dim], x);
                hidden[t * h_dim + j] = pre.tanh();
            }
        }
        let out = hidden.clone();
        (
            out,
            WindowCache {
                means,
                inputs,
                hidden,
            },
        )
    }

    fn backward(&self, params: &[f64], cache: &WindowCache, d_hidden: &[f64], grad: &mut [f64]) {
        let d = self.table.dim();
        let c = self.window_dim;
        let x_dim = self.input_dim();
        let h_dim = self.hidden_dim;
        let n = cache.hidden.len() / h_dim;
        let (_, wh, _) = self.split(params);
        let (g_wc, rest) = grad.split_at_mut(c * d);
        let (g_wh, g_bh) = rest.split_at_mut(h_dim * x_dim);

        let mut d_pre = vec![0.0; h_dim];
        let mut d_z = vec![0.0; c];
        for t in 0..n {
            let h = &cache.hidden[t * h_dim..(t + 1) * h_dim];
            let dh = &d_hidden[t * h_dim..(t + 1) * h_dim];
            for j in 0..h_dim {
                d_pre[j] = dh[j] * (1.0 - h[j] * h[j]);
            }
            let x = &cache.inputs[t * x_dim..(t + 1) * x_dim];
            d_z.iter_mut().for_each(|v| *v = 0.0);
            for j in 0..h_dim {
                if d_pre[j] == 0.0 {
                    continue;
                }
                g_bh[j] += d_pre[j];
                axpy(d_pre[j], x, &mut g_wh[j * x_dim..(j + 1) * x_dim]);
                axpy(d_pre[j], &wh[j * x_dim + d..(j + 1) * x_dim], &mut d_z);
            }
            let m = &cache.means[t * d..(t + 1) * d];
            for k in 0..c {
                if d_z[k] != 0.0 {
                    axpy(d_z[k], m, &mut g_wc[k * d..(k + 1) * d]);
                }
            }
        }
    }
}

/// Parameter-free encoder: hidden vectors are the frozen word vectors.
#[derive(Debug, Clone)]
pub struct FrozenEmbeddingEncoder {
    table: EmbeddingTable,
}

impl FrozenEmbeddingEncoder {
    pub const ID: &'static str = "frozen";

    pub fn new(table: EmbeddingTable) -> Self {
        Self { table }
    }

    pub fn table(&self) -> &EmbeddingTable {
        &self.table
    }
}

impl SharedEncoder for FrozenEmbeddingEncoder {
    type Cache = ();

    fn id(&self) -> &str {
        Self::ID
    }

    fn hidden_dim(&self) -> usize {
        self.table.dim()
    }

    fn param_count(&self) -> usize {
        0
    }

    fn init_params(&self, _rng: &mut dyn rand::RngCore) -> Vec<f64> {
        Vec::new()
    }

    fn forward(&self, _params: &[f64], tokens: &[String]) -> (Vec<f64>, ()) {
        let d = self.table.dim();
        let mut out = vec![0.0; tokens.len() * d];
        for (t, w) in tokens.iter().enumerate() {
            if let Some(v) = self.table.get(w) {
                out[t * d..(t + 1) * d].copy_from_slice(v);
            }
        }
        (out, ())
    }

    fn backward(&self, _params: &[f64], _cache: &(), _d_hidden: &[f64], _grad: &mut [f64]) {}
}
