//! Gated recurrent unit layers with exact backpropagation through time.
//!
//! Cell per step, with h0 = 0:
//!   z = sigmoid(W_z x + U_z h + b_z)
//!   r = sigmoid(W_r x + U_r h + b_r)
//!   c = tanh(W_h x + U_h (r ⊙ h) + b_h)
//!   h' = (1 - z) ⊙ h + z ⊙ c
//!
//! Layers stack: layer l consumes layer l-1's per-step outputs.

use ndarray::{Array1, Array2};
use rand::Rng;

use crate::error::{Error, Result};

use super::math::sigmoid;
use super::params::{init_matrix, tensor_mut, tensor_mut1, tensor_ref, tensor_ref1, TensorMut, TensorRef};

#[derive(Debug, Clone, PartialEq)]
pub struct GruLayer {
    pub w_z: Array2<f64>,
    pub u_z: Array2<f64>,
    pub b_z: Array1<f64>,
    pub w_r: Array2<f64>,
    pub u_r: Array2<f64>,
    pub b_r: Array1<f64>,
    pub w_h: Array2<f64>,
    pub u_h: Array2<f64>,
    pub b_h: Array1<f64>,
}

impl GruLayer {
    pub fn zeros(input_dim: usize, hidden_dim: usize) -> Self {
        GruLayer {
            w_z: Array2::zeros((hidden_dim, input_dim)),
            u_z: Array2::zeros((hidden_dim, hidden_dim)),
            b_z: Array1::zeros(hidden_dim),
            w_r: Array2::zeros((hidden_dim, input_dim)),
            u_r: Array2::zeros((hidden_dim, hidden_dim)),
            b_r: Array1::zeros(hidden_dim),
            w_h: Array2::zeros((hidden_dim, input_dim)),
            u_h: Array2::zeros((hidden_dim, hidden_dim)),
            b_h: Array1::zeros(hidden_dim),
        }
    }

    pub fn init<R: Rng>(input_dim: usize, hidden_dim: usize, rng: &mut R) -> Self {
        GruLayer {
            w_z: init_matrix(hidden_dim, input_dim, input_dim, rng),
            u_z: init_matrix(hidden_dim, hidden_dim, hidden_dim, rng),
            b_z: Array1::zeros(hidden_dim),
            w_r: init_matrix(hidden_dim, input_dim, input_dim, rng),
            u_r: init_matrix(hidden_dim, hidden_dim, hidden_dim, rng),
            b_r: Array1::zeros(hidden_dim),
            w_h: init_matrix(hidden_dim, input_dim, input_dim, rng),
            u_h: init_matrix(hidden_dim, hidden_dim, hidden_dim, rng),
            b_h: Array1::zeros(hidden_dim),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.w_z.shape()[1]
    }

    pub fn hidden_dim(&self) -> usize {
        self.b_z.len()
    }
}

/// Everything the backward pass needs about one step.
#[derive(Debug, Clone)]
pub struct GruStepCache {
    x: Array1<f64>,
    h_prev: Array1<f64>,
    z: Array1<f64>,
    r: Array1<f64>,
    cand: Array1<f64>,
    pub h: Array1<f64>,
}

fn outer_add(acc: &mut Array2<f64>, a: &Array1<f64>, b: &Array1<f64>) {
    for (i, &ai) in a.iter().enumerate() {
        if ai != 0.0 {
            acc.row_mut(i).scaled_add(ai, b);
        }
    }
}

impl GruLayer {
    fn step(&self, x: &Array1<f64>, h_prev: &Array1<f64>) -> GruStepCache {
        let z = (self.w_z.dot(x) + self.u_z.dot(h_prev) + &self.b_z).mapv(sigmoid);
        let r = (self.w_r.dot(x) + self.u_r.dot(h_prev) + &self.b_r).mapv(sigmoid);
        let gated = &r * h_prev;
        let cand = (self.w_h.dot(x) + self.u_h.dot(&gated) + &self.b_h).mapv(f64::tanh);
        let h = (1.0 - &z) * h_prev + &z * &cand;
        GruStepCache {
            x: x.clone(),
            h_prev: h_prev.clone(),
            z,
            r,
            cand,
            h,
        }
    }

    fn forward(&self, inputs: &[Array1<f64>]) -> Vec<GruStepCache> {
        let mut h = Array1::zeros(self.hidden_dim());
        let mut steps = Vec::with_capacity(inputs.len());
        for x in inputs {
            let cache = self.step(x, &h);
            h = cache.h.clone();
            steps.push(cache);
        }
        steps
    }

    /// Backprop through time for one layer. `d_states[t]` is the external
    /// gradient arriving at this layer's hidden state at step t. Parameter
    /// gradients accumulate into `grads`; the return value is the gradient
    /// with respect to this layer's inputs, step by step.
    fn backward(
        &self,
        steps: &[GruStepCache],
        d_states: &[Array1<f64>],
        grads: &mut GruLayer,
    ) -> Vec<Array1<f64>> {
        let hidden = self.hidden_dim();
        let mut d_inputs = vec![Array1::zeros(self.input_dim()); steps.len()];
        let mut carry: Array1<f64> = Array1::zeros(hidden);
        for t in (0..steps.len()).rev() {
            let cache = &steps[t];
            let dh = &d_states[t] + &carry;

            let dz = &dh * &(&cache.cand - &cache.h_prev);
            let dcand = &dh * &cache.z;
            let mut dh_prev = &dh * &(1.0 - &cache.z);

            let da_c = &dcand * &cache.cand.mapv(|c| 1.0 - c * c);
            let gated = &cache.r * &cache.h_prev;
            outer_add(&mut grads.w_h, &da_c, &cache.x);
            outer_add(&mut grads.u_h, &da_c, &gated);
            grads.b_h += &da_c;

            let through_cand = self.u_h.t().dot(&da_c);
            let dr = &through_cand * &cache.h_prev;
            dh_prev += &(&through_cand * &cache.r);

            let da_z = &dz * &(&cache.z * &cache.z.mapv(|z| 1.0 - z));
            let da_r = &dr * &(&cache.r * &cache.r.mapv(|r| 1.0 - r));

            outer_add(&mut grads.w_z, &da_z, &cache.x);
            outer_add(&mut grads.u_z, &da_z, &cache.h_prev);
            grads.b_z += &da_z;
            outer_add(&mut grads.w_r, &da_r, &cache.x);
            outer_add(&mut grads.u_r, &da_r, &cache.h_prev);
            grads.b_r += &da_r;

            dh_prev += &self.u_z.t().dot(&da_z);
            dh_prev += &self.u_r.t().dot(&da_r);

            d_inputs[t] = self.w_z.t().dot(&da_z) + self.w_r.t().dot(&da_r) + self.w_h.t().dot(&da_c);
            carry = dh_prev;
        }
        d_inputs
    }
}

/// A stack of GRU layers applied to one variable-length sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct GruStack {
    pub layers: Vec<GruLayer>,
    name: String,
}

/// Forward pass result: per-step hidden states of the last layer, the
/// final hidden state (the fingerprint source), and the caches backward
/// needs.
pub struct GruForward {
    layer_steps: Vec<Vec<GruStepCache>>,
}

impl GruForward {
    /// Per-step last-layer hidden states.
    pub fn states(&self) -> Vec<&Array1<f64>> {
        self.layer_steps
            .last()
            .expect("at least one layer")
            .iter()
            .map(|s| &s.h)
            .collect()
    }

    /// Final time step's last-layer hidden state.
    pub fn final_hidden(&self) -> &Array1<f64> {
        &self
            .layer_steps
            .last()
            .expect("at least one layer")
            .last()
            .expect("non-empty sequence")
            .h
    }

    pub fn len(&self) -> usize {
        self.layer_steps[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl GruStack {
    pub fn zeros(name: &str, input_dim: usize, hidden_dim: usize, num_layers: usize) -> Self {
        assert!((1..=2).contains(&num_layers));
        let layers = (0..num_layers)
            .map(|l| {
                let in_dim = if l == 0 { input_dim } else { hidden_dim };
                GruLayer::zeros(in_dim, hidden_dim)
            })
            .collect();
        GruStack {
            layers,
            name: name.to_string(),
        }
    }

    pub fn init<R: Rng>(
        name: &str,
        input_dim: usize,
        hidden_dim: usize,
        num_layers: usize,
        rng: &mut R,
    ) -> Self {
        assert!((1..=2).contains(&num_layers));
        let layers = (0..num_layers)
            .map(|l| {
                let in_dim = if l == 0 { input_dim } else { hidden_dim };
                GruLayer::init(in_dim, hidden_dim, rng)
            })
            .collect();
        GruStack {
            layers,
            name: name.to_string(),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].input_dim()
    }

    pub fn hidden_dim(&self) -> usize {
        self.layers[0].hidden_dim()
    }

    pub fn forward(&self, inputs: &[Array1<f64>]) -> Result<GruForward> {
        if inputs.is_empty() {
            return Err(Error::EmptySequence);
        }
        if inputs[0].len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                got: inputs[0].len(),
            });
        }
        let mut layer_steps = Vec::with_capacity(self.layers.len());
        let mut current: Vec<Array1<f64>> = inputs.to_vec();
        for layer in &self.layers {
            let steps = layer.forward(&current);
            current = steps.iter().map(|s| s.h.clone()).collect();
            layer_steps.push(steps);
        }
        Ok(GruForward { layer_steps })
    }

    /// Backprop the whole stack. `d_states[t]` is the external gradient on
    /// the last layer's hidden state at step t. Returns gradients with
    /// respect to the stack inputs.
    pub fn backward(
        &self,
        forward: &GruForward,
        d_states: Vec<Array1<f64>>,
        grads: &mut GruStack,
    ) -> Vec<Array1<f64>> {
        debug_assert_eq!(d_states.len(), forward.len());
        let mut d_current = d_states;
        for (layer, (params, steps)) in self
            .layers
            .iter()
            .zip(&forward.layer_steps)
            .enumerate()
            .rev()
            .map(|(l, pair)| (l, pair))
        {
            d_current = params.backward(steps, &d_current, &mut grads.layers[layer]);
        }
        d_current
    }

    pub fn tensors(&self) -> Vec<TensorRef<'_>> {
        let mut out = Vec::new();
        for (l, layer) in self.layers.iter().enumerate() {
            let p = |suffix: &str| format!("{}.l{l}.{suffix}", self.name);
            out.push(tensor_ref(p("w_z"), &layer.w_z));
            out.push(tensor_ref(p("u_z"), &layer.u_z));
            out.push(tensor_ref1(p("b_z"), &layer.b_z));
            out.push(tensor_ref(p("w_r"), &layer.w_r));
            out.push(tensor_ref(p("u_r"), &layer.u_r));
            out.push(tensor_ref1(p("b_r"), &layer.b_r));
            out.push(tensor_ref(p("w_h"), &layer.w_h));
            out.push(tensor_ref(p("u_h"), &layer.u_h));
            out.push(tensor_ref1(p("b_h"), &layer.b_h));
        }
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<TensorMut<'_>> {
        let name = self.name.clone();
        let mut out = Vec::new();
        for (l, layer) in self.layers.iter_mut().enumerate() {
            let p = |suffix: &str| format!("{name}.l{l}.{suffix}");
            out.push(tensor_mut(p("w_z"), &mut layer.w_z));
            out.push(tensor_mut(p("u_z"), &mut layer.u_z));
            out.push(tensor_mut1(p("b_z"), &mut layer.b_z));
            out.push(tensor_mut(p("w_r"), &mut layer.w_r));
            out.push(tensor_mut(p("u_r"), &mut layer.u_r));
            out.push(tensor_mut1(p("b_r"), &mut layer.b_r));
            out.push(tensor_mut(p("w_h"), &mut layer.w_h));
            out.push(tensor_mut(p("u_h"), &mut layer.u_h));
            out.push(tensor_mut1(p("b_h"), &mut layer.b_h));
        }
        out
    }
}

/// Affine map used by the step-supervision and prediction heads.
#[derive(Debug, Clone, PartialEq)]
pub struct Affine {
    pub w: Array2<f64>,
    pub b: Array1<f64>,
    name: String,
}

impl Affine {
    pub fn zeros(name: &str, input_dim: usize, output_dim: usize) -> Self {
        Affine {
            w: Array2::zeros((output_dim, input_dim)),
            b: Array1::zeros(output_dim),
            name: name.to_string(),
        }
    }

    pub fn init<R: Rng>(name: &str, input_dim: usize, output_dim: usize, rng: &mut R) -> Self {
        Affine {
            w: init_matrix(output_dim, input_dim, input_dim, rng),
            b: Array1::zeros(output_dim),
            name: name.to_string(),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.w.shape()[1]
    }

    pub fn forward(&self, x: &Array1<f64>) -> Array1<f64> {
        self.w.dot(x) + &self.b
    }

    pub fn backward(&self, x: &Array1<f64>, d_out: &Array1<f64>, grads: &mut Affine) -> Array1<f64> {
        outer_add(&mut grads.w, d_out, x);
        grads.b += d_out;
        self.w.t().dot(d_out)
    }

    pub fn tensors(&self) -> Vec<TensorRef<'_>> {
        vec![
            tensor_ref(format!("{}.w", self.name), &self.w),
            tensor_ref1(format!("{}.b", self.name), &self.b),
        ]
    }

    pub fn tensors_mut(&mut self) -> Vec<TensorMut<'_>> {
        let name = self.name.clone();
        vec![
            tensor_mut(format!("{name}.w"), &mut self.w),
            tensor_mut1(format!("{name}.b"), &mut self.b),
        ]
    }
}
