//! Small dense networks with hand-written backpropagation and Adam.
//! Everything runs in f64 so analytic gradients can be checked against
//! central finite differences to tight tolerances.

use ndarray::{Array1, Array2, Axis};
use rand::Rng;

/// Fully connected layer, row-major batches: `y = x w^T + b`.
#[derive(Debug, Clone)]
pub struct Linear {
    /// (out, in)
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

impl Linear {
    fn new(input: usize, output: usize, scale: f64, rng: &mut impl Rng) -> Self {
        // Xavier-uniform, optionally shrunk for near-zero output heads.
        let bound = scale * (6.0 / (input + output) as f64).sqrt();
        let w = Array2::from_shape_fn((output, input), |_| rng.random_range(-bound..bound));
        Linear { w, b: Array1::zeros(output) }
    }
}

/// Multi-layer perceptron with tanh hidden activations and a linear head.
#[derive(Debug, Clone)]
pub struct Mlp {
    pub layers: Vec<Linear>,
}

/// Forward-pass activations kept for the backward pass.
pub struct MlpCache {
    /// Layer inputs: `inputs[0]` is the network input, then post-tanh
    /// activations of each hidden layer.
    inputs: Vec<Array2<f64>>,
}

/// Per-layer gradients, same shapes as the parameters.
#[derive(Debug, Clone)]
pub struct MlpGrads {
    pub layers: Vec<(Array2<f64>, Array1<f64>)>,
}

impl MlpGrads {
    pub fn zeros_like(mlp: &Mlp) -> Self {
        MlpGrads {
            layers: mlp
                .layers
                .iter()
                .map(|l| (Array2::zeros(l.w.dim()), Array1::zeros(l.b.len())))
                .collect(),
        }
    }

    pub fn accumulate(&mut self, other: &MlpGrads) {
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            a.0 += &b.0;
            a.1 += &b.1;
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for (w, b) in self.layers.iter_mut() {
            *w *= factor;
            *b *= factor;
        }
    }
}

impl Mlp {
    /// `sizes` lists layer widths input-first; `head_scale` shrinks the
    /// final layer's init (small initial policy output).
    pub fn new(sizes: &[usize], head_scale: f64, rng: &mut impl Rng) -> Self {
        assert!(sizes.len() >= 2);
        let mut layers = Vec::with_capacity(sizes.len() - 1);
        for k in 0..sizes.len() - 1 {
            let scale = if k == sizes.len() - 2 { head_scale } else { 1.0 };
            layers.push(Linear::new(sizes[k], sizes[k + 1], scale, rng));
        }
        Mlp { layers }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].w.dim().1
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().unwrap().w.dim().0
    }

    /// Batch forward: `x` is (batch, in).
    pub fn forward(&self, x: &Array2<f64>) -> (Array2<f64>, MlpCache) {
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut h = x.clone();
        for (k, layer) in self.layers.iter().enumerate() {
            inputs.push(h.clone());
            let mut y = h.dot(&layer.w.t());
            y += &layer.b;
            h = if k + 1 < self.layers.len() { y.mapv(f64::tanh) } else { y };
        }
        (h, MlpCache { inputs })
    }

    /// Single-sample forward without cache allocation churn.
    pub fn infer_one(&self, x: &[f64]) -> Vec<f64> {
        let mut h = Array1::from_iter(x.iter().copied());
        for (k, layer) in self.layers.iter().enumerate() {
            let mut y = layer.w.dot(&h);
            y += &layer.b;
            h = if k + 1 < self.layers.len() { y.mapv(f64::tanh) } else { y };
        }
        h.to_vec()
    }

    /// Backward pass for `d loss / d output`; returns parameter gradients.
    pub fn backward(&self, cache: &MlpCache, grad_output: &Array2<f64>) -> MlpGrads {
        let mut grads = MlpGrads::zeros_like(self);
        let mut delta = grad_output.clone();
        for k in (0..self.layers.len()).rev() {
            let input = &cache.inputs[k];
            grads.layers[k].0 = delta.t().dot(input);
            grads.layers[k].1 = delta.sum_axis(Axis(0));
            if k > 0 {
                // Through the preceding tanh: input holds tanh(z) already.
                let upstream = delta.dot(&self.layers[k].w);
                delta = upstream * input.mapv(|t| 1.0 - t * t);
            }
        }
        grads
    }

    /// Flat parameter vector (layer order, weights then bias).
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for l in &self.layers {
            out.extend(l.w.iter());
            out.extend(l.b.iter());
        }
        out
    }

    pub fn from_flat(&mut self, flat: &[f64]) {
        let mut it = flat.iter();
        for l in self.layers.iter_mut() {
            for v in l.w.iter_mut() {
                *v = *it.next().expect("flat vector too short");
            }
            for v in l.b.iter_mut() {
                *v = *it.next().expect("flat vector too short");
            }
        }
        assert!(it.next().is_none(), "flat vector too long");
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }
}

/// Adam optimizer over one MLP plus an optional extra flat tensor (the
/// policy's log-std vector).
#[derive(Debug, Clone)]
pub struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Adam {
    pub fn new(param_count: usize) -> Self {
        Adam { m: vec![0.0; param_count], v: vec![0.0; param_count], t: 0, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }

    /// One step on a flat parameter/gradient pair.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64], lr: f64) {
        assert_eq!(params.len(), self.m.len());
        assert_eq!(grads.len(), self.m.len());
        self.t += 1;
        let b1t = 1.0 - self.beta1.powi(self.t as i32);
        let b2t = 1.0 - self.beta2.powi(self.t as i32);
        for i in 0..params.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grads[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * grads[i] * grads[i];
            let m_hat = self.m[i] / b1t;
            let v_hat = self.v[i] / b2t;
            params[i] -= lr * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}

/// Flattens MLP gradients in the same order as [`Mlp::to_flat`].
pub fn grads_to_flat(grads: &MlpGrads) -> Vec<f64> {
    let mut out = Vec::new();
    for (w, b) in &grads.layers {
        out.extend(w.iter());
        out.extend(b.iter());
    }
    out
}
