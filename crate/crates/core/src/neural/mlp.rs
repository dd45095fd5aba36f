//! Dense feed-forward network: forward pass, exact reverse-mode gradients,
//! and the RMSprop update step.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha12Rng;

use super::matrix::{affine_backward, affine_forward, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Linear,
    Tanh,
}

impl Activation {
    fn apply(self, m: &mut Matrix) {
        match self {
            Activation::Relu => {
                for v in m.data_mut() {
                    if *v < 0.0 {
                        *v = 0.0;
                    }
                }
            }
            Activation::Linear => {}
            Activation::Tanh => {
                for v in m.data_mut() {
                    *v = v.tanh();
                }
            }
        }
    }

    /// Derivative expressed in terms of the post-activation value.
    fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Linear => 1.0,
            Activation::Tanh => 1.0 - y * y,
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Activation::Relu => write!(f, "relu"),
            Activation::Linear => write!(f, "linear"),
            Activation::Tanh => write!(f, "tanh"),
        }
    }
}

impl FromStr for Activation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "relu" => Ok(Activation::Relu),
            "linear" => Ok(Activation::Linear),
            "tanh" => Ok(Activation::Tanh),
            other => Err(format!("unknown activation '{other}'")),
        }
    }
}

/// Fully connected network. `dims` runs input -> hidden ... -> output;
/// all hidden layers share one activation, the output head has its own.
#[derive(Debug, Clone)]
pub struct Mlp {
    dims: Vec<usize>,
    weights: Vec<Matrix>, // [layer]: fan_out x fan_in
    biases: Vec<Vec<f64>>,
    hidden: Activation,
    output: Activation,
}

/// Per-layer parameter gradients, shaped like the network they came from.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub weights: Vec<Matrix>,
    pub biases: Vec<Vec<f64>>,
}

impl Gradients {
    fn zeros_like(mlp: &Mlp) -> Self {
        Self {
            weights: mlp
                .weights
                .iter()
                .map(|w| Matrix::zeros(w.rows(), w.cols()))
                .collect(),
            biases: mlp.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    pub fn add(&mut self, other: &Gradients) {
        for (a, b) in self.weights.iter_mut().zip(&other.weights) {
            for (x, y) in a.data_mut().iter_mut().zip(b.data()) {
                *x += y;
            }
        }
        for (a, b) in self.biases.iter_mut().zip(&other.biases) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }
}

/// Post-activation values of every layer for one batched forward pass.
pub struct ForwardCache {
    activations: Vec<Matrix>,
}

impl ForwardCache {
    pub fn output(&self) -> &Matrix {
        self.activations.last().expect("at least one layer")
    }
}

impl Mlp {
    /// Random init: weights uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)],
    /// biases zero.
    pub fn new(dims: &[usize], hidden: Activation, output: Activation, rng: &mut ChaCha12Rng) -> Self {
        assert!(dims.len() >= 2, "need at least input and output dims");
        assert!(dims.iter().all(|&d| d > 0), "zero-width layer");
        let mut weights = Vec::with_capacity(dims.len() - 1);
        let mut biases = Vec::with_capacity(dims.len() - 1);
        for w in dims.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let limit = 1.0 / (fan_in as f64).sqrt();
            let data: Vec<f64> = (0..fan_in * fan_out)
                .map(|_| rng.random_range(-limit..limit))
                .collect();
            weights.push(Matrix::from_vec(fan_out, fan_in, data));
            biases.push(vec![0.0; fan_out]);
        }
        Self {
            dims: dims.to_vec(),
            weights,
            biases,
            hidden,
            output,
        }
    }

    pub fn from_parts(
        dims: Vec<usize>,
        weights: Vec<Matrix>,
        biases: Vec<Vec<f64>>,
        hidden: Activation,
        output: Activation,
    ) -> Self {
        assert!(dims.len() >= 2);
        assert_eq!(weights.len(), dims.len() - 1);
        assert_eq!(biases.len(), dims.len() - 1);
        for (i, w) in weights.iter().enumerate() {
            assert_eq!(w.rows(), dims[i + 1], "layer {i} fan-out mismatch");
            assert_eq!(w.cols(), dims[i], "layer {i} fan-in mismatch");
            assert_eq!(biases[i].len(), dims[i + 1]);
        }
        Self {
            dims,
            weights,
            biases,
            hidden,
            output,
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn input_dim(&self) -> usize {
        self.dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.dims.last().unwrap()
    }

    pub fn hidden_activation(&self) -> Activation {
        self.hidden
    }

    pub fn output_activation(&self) -> Activation {
        self.output
    }

    pub fn weights(&self) -> &[Matrix] {
        &self.weights
    }

    pub fn biases(&self) -> &[Vec<f64>] {
        &self.biases
    }

    pub fn param_count(&self) -> usize {
        self.weights
            .iter()
            .map(|w| w.data().len())
            .chain(self.biases.iter().map(|b| b.len()))
            .sum()
    }

    /// Single-vector forward pass.
    pub fn forward(&self, input: &[f64]) -> Vec<f64> {
        assert_eq!(input.len(), self.input_dim(), "input dimension mismatch");
        let x = Matrix::from_vec(1, input.len(), input.to_vec());
        self.forward_batch(&x).output().row(0).to_vec()
    }

    /// Batched forward pass, keeping per-layer activations for backward.
    pub fn forward_batch(&self, input: &Matrix) -> ForwardCache {
        assert_eq!(input.cols(), self.input_dim(), "input dimension mismatch");
        let n_layers = self.weights.len();
        let mut activations = Vec::with_capacity(n_layers);
        let mut current = input;
        for (i, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let mut out = affine_forward(current, w, b);
            let act = if i + 1 == n_layers { self.output } else { self.hidden };
            act.apply(&mut out);
            activations.push(out);
            current = activations.last().unwrap();
        }
        ForwardCache { activations }
    }

    /// Exact reverse-mode gradients of the forward map for the upstream
    /// gradient `grad_out` (dL/d output). Returns parameter gradients and
    /// the gradient with respect to the input batch.
    pub fn backward(
        &self,
        input: &Matrix,
        cache: &ForwardCache,
        grad_out: &Matrix,
    ) -> (Gradients, Matrix) {
        let n_layers = self.weights.len();
        assert_eq!(grad_out.rows(), input.rows(), "batch size mismatch");
        assert_eq!(grad_out.cols(), self.output_dim(), "output dim mismatch");
        let mut grads = Gradients::zeros_like(self);
        let mut upstream = grad_out.clone();
        for layer in (0..n_layers).rev() {
            let act = if layer + 1 == n_layers { self.output } else { self.hidden };
            let post = &cache.activations[layer];
            // Through the activation: dL/d pre = dL/d post * act'(post).
            for r in 0..upstream.rows() {
                let post_row = post.row(r);
                for (u, &y) in upstream.row_mut(r).iter_mut().zip(post_row) {
                    *u *= act.derivative_from_output(y);
                }
            }
            let layer_input = if layer == 0 {
                input
            } else {
                &cache.activations[layer - 1]
            };
            let (dw, db, dx) = affine_backward(layer_input, &self.weights[layer], &upstream);
            grads.weights[layer] = dw;
            grads.biases[layer] = db;
            upstream = dx;
        }
        (grads, upstream)
    }

    /// Clamps every weight and bias to [-limit, limit].
    pub fn clip_params(&mut self, limit: f64) {
        for w in &mut self.weights {
            for v in w.data_mut() {
                *v = v.clamp(-limit, limit);
            }
        }
        for b in &mut self.biases {
            for v in b.iter_mut() {
                *v = v.clamp(-limit, limit);
            }
        }
    }

    pub fn max_abs_param(&self) -> f64 {
        let w = self
            .weights
            .iter()
            .flat_map(|w| w.data())
            .fold(0.0f64, |acc, v| acc.max(v.abs()));
        self.biases
            .iter()
            .flatten()
            .fold(w, |acc, v| acc.max(v.abs()))
    }

    pub fn all_finite(&self) -> bool {
        self.weights.iter().all(|w| w.all_finite())
            && self.biases.iter().flatten().all(|v| v.is_finite())
    }

    pub(crate) fn params_mut(&mut self) -> (&mut Vec<Matrix>, &mut Vec<Vec<f64>>) {
        (&mut self.weights, &mut self.biases)
    }

    /// self <- keep * self + (1 - keep) * other, parameter-wise.
    pub(crate) fn blend_from(&mut self, other: &Mlp, keep: f64) {
        debug_assert_eq!(self.dims, other.dims);
        for (w, o) in self.weights.iter_mut().zip(&other.weights) {
            for (p, &q) in w.data_mut().iter_mut().zip(o.data()) {
                *p = keep * *p + (1.0 - keep) * q;
            }
        }
        for (b, o) in self.biases.iter_mut().zip(&other.biases) {
            for (p, &q) in b.iter_mut().zip(o) {
                *p = keep * *p + (1.0 - keep) * q;
            }
        }
    }
}

/// RMSprop with a per-parameter running mean of squared gradients:
/// cache <- rho * cache + (1 - rho) * g^2; p <- p - lr * g / (sqrt(cache) + eps).
#[derive(Debug, Clone)]
pub struct RmsProp {
    pub lr: f64,
    pub rho: f64,
    pub eps: f64,
    cache_w: Vec<Matrix>,
    cache_b: Vec<Vec<f64>>,
}

impl RmsProp {
    pub fn new(mlp: &Mlp, lr: f64, rho: f64, eps: f64) -> Self {
        Self {
            lr,
            rho,
            eps,
            cache_w: mlp
                .weights()
                .iter()
                .map(|w| Matrix::zeros(w.rows(), w.cols()))
                .collect(),
            cache_b: mlp.biases().iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    pub fn step(&mut self, mlp: &mut Mlp, grads: &Gradients) {
        let (lr, rho, eps) = (self.lr, self.rho, self.eps);
        let update = |p: &mut f64, c: &mut f64, g: f64| {
            *c = rho * *c + (1.0 - rho) * g * g;
            *p -= lr * g / (c.sqrt() + eps);
        };
        let (weights, biases) = mlp.params_mut();
        for ((w, cw), gw) in weights.iter_mut().zip(&mut self.cache_w).zip(&grads.weights) {
            for ((p, c), &g) in w.data_mut().iter_mut().zip(cw.data_mut()).zip(gw.data()) {
                update(p, c, g);
            }
        }
        for ((b, cb), gb) in biases.iter_mut().zip(&mut self.cache_b).zip(&grads.biases) {
            for ((p, c), &g) in b.iter_mut().zip(cb.iter_mut()).zip(gb) {
                update(p, c, g);
            }
        }
    }

    pub fn cache_nonnegative(&self) -> bool {
        self.cache_w
            .iter()
            .flat_map(|m| m.data())
            .chain(self.cache_b.iter().flatten())
            .all(|&c| c >= 0.0)
    }
}
