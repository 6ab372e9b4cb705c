//! Named, trainable parameters. A `ParamStore` owns every parameter of one
//! model; the tape borrows it immutably during a forward/backward pass and
//! hands back gradient updates to accumulate.

use rand::Rng;

use super::tensor::{Scalar, Shape, Tensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ParamId(pub(crate) usize);

#[derive(Debug, Clone)]
pub struct Parameter<T> {
    pub name: String,
    pub value: Tensor<T>,
    pub grad: Tensor<T>,
}

#[derive(Debug, Clone, Default)]
pub struct ParamStore<T> {
    params: Vec<Parameter<T>>,
}

impl<T: Scalar> ParamStore<T> {
    pub fn new() -> Self {
        ParamStore { params: Vec::new() }
    }

    pub fn add(&mut self, name: impl Into<String>, value: Tensor<T>) -> ParamId {
        let id = ParamId(self.params.len());
        let grad = Tensor::zeros(value.shape());
        self.params.push(Parameter { name: name.into(), value, grad });
        id
    }

    /// New parameter initialized uniformly on (-1/sqrt(fan_in), 1/sqrt(fan_in)).
    /// Draws happen in f64 so f32 and f64 stores see the same stream.
    pub fn add_uniform<R: Rng>(
        &mut self,
        name: impl Into<String>,
        shape: Shape,
        fan_in: usize,
        rng: &mut R,
    ) -> ParamId {
        let bound = 1.0 / (fan_in as f64).sqrt();
        let data = (0..shape.len())
            .map(|_| T::from_f64_lossy(rng.random::<f64>() * 2.0 * bound - bound))
            .collect();
        self.add(name, Tensor::new(shape, data))
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn get(&self, id: ParamId) -> &Parameter<T> {
        &self.params[id.0]
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Parameter<T> {
        &mut self.params[id.0]
    }

    pub fn value(&self, id: ParamId) -> &Tensor<T> {
        &self.params[id.0].value
    }

    pub fn iter(&self) -> impl Iterator<Item = (ParamId, &Parameter<T>)> {
        self.params.iter().enumerate().map(|(i, p)| (ParamId(i), p))
    }

    pub fn ids(&self) -> impl Iterator<Item = ParamId> {
        (0..self.params.len()).map(ParamId)
    }

    /// Fold gradient updates from a backward pass into the parameters'
    /// gradient buffers.
    pub fn accumulate(&mut self, updates: Vec<(ParamId, Tensor<T>)>) {
        for (id, update) in updates {
            let grad = &mut self.params[id.0].grad;
            debug_assert_eq!(grad.shape(), update.shape());
            for (g, u) in grad.data_mut().iter_mut().zip(update.data()) {
                *g += *u;
            }
        }
    }

    /// Plain SGD: theta <- theta - lr * grad, then zero the gradients.
    pub fn sgd_step(&mut self, lr: T) {
        for p in &mut self.params {
            for (v, g) in p.value.data_mut().iter_mut().zip(p.grad.data()) {
                *v = *v - lr * *g;
            }
            p.grad.fill(T::zero());
        }
    }

    pub fn zero_grads(&mut self) {
        for p in &mut self.params {
            p.grad.fill(T::zero());
        }
    }

    pub fn all_finite(&self) -> bool {
        self.params.iter().all(|p| p.value.is_finite())
    }

    /// Total number of scalar parameters.
    pub fn scalar_count(&self) -> usize {
        self.params.iter().map(|p| p.value.len()).sum()
    }
}
