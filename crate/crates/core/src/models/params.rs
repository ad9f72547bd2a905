//! Named-tensor access to model parameters, shared by the optimizer, the
//! checkpoint container, and the gradient checker. Tensor order is fixed
//! by construction order, so paired visits over a model and its gradient
//! holder line up one to one.

use ndarray::{Array1, Array2};
use rand::distributions::{Distribution, Uniform};
use rand::Rng;

pub struct TensorRef<'a> {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: &'a [f64],
}

pub struct TensorMut<'a> {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: &'a mut [f64],
}

pub trait Parameterized {
    fn tensors(&self) -> Vec<TensorRef<'_>>;
    fn tensors_mut(&mut self) -> Vec<TensorMut<'_>>;

    fn param_count(&self) -> usize {
        self.tensors().iter().map(|t| t.data.len()).sum()
    }
}

pub(crate) fn tensor_ref<'a>(name: impl Into<String>, m: &'a Array2<f64>) -> TensorRef<'a> {
    TensorRef {
        name: name.into(),
        shape: m.shape().to_vec(),
        data: m.as_slice().expect("contiguous"),
    }
}

pub(crate) fn tensor_ref1<'a>(name: impl Into<String>, v: &'a Array1<f64>) -> TensorRef<'a> {
    TensorRef {
        name: name.into(),
        shape: vec![v.len()],
        data: v.as_slice().expect("contiguous"),
    }
}

pub(crate) fn tensor_mut<'a>(name: impl Into<String>, m: &'a mut Array2<f64>) -> TensorMut<'a> {
    let shape = m.shape().to_vec();
    TensorMut {
        name: name.into(),
        shape,
        data: m.as_slice_mut().expect("contiguous"),
    }
}

pub(crate) fn tensor_mut1<'a>(name: impl Into<String>, v: &'a mut Array1<f64>) -> TensorMut<'a> {
    let shape = vec![v.len()];
    TensorMut {
        name: name.into(),
        shape,
        data: v.as_slice_mut().expect("contiguous"),
    }
}

/// Uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) weight matrix.
pub(crate) fn init_matrix<R: Rng>(rows: usize, cols: usize, fan_in: usize, rng: &mut R) -> Array2<f64> {
    let bound = 1.0 / (fan_in as f64).sqrt();
    let dist = Uniform::new_inclusive(-bound, bound);
    Array2::from_shape_fn((rows, cols), |_| dist.sample(rng))
}
