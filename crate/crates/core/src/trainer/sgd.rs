//! Model parameters and the negative-sampling update.
//!
//! For one positive pair `(w, c)` and negatives `c'_1..c'_k` the local
//! objective is
//!
//! ```text
//! L = log σ(w·c) + Σ_j log σ(-w·c'_j)
//! ```
//!
//! with gradients `∂L/∂c = (1 - σ(w·c)) w`, `∂L/∂c'_j = -σ(w·c'_j) w` and
//! `∂L/∂w = (1 - σ(w·c)) c - Σ_j σ(w·c'_j) c'_j`. [`sgd_step`] ascends `L`
//! with every gradient taken at the pre-update parameters.

use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::sampling::{exact_sigmoid, Sigmoid};

/// Pivot and context embedding matrices, row-major, one row per vocabulary
/// entry.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams<T = f32> {
    rows: usize,
    dim: usize,
    pub pivot: Vec<T>,
    pub context: Vec<T>,
}

impl<T: Float> ModelParams<T> {
    pub fn zeros(rows: usize, dim: usize) -> Self {
        ModelParams {
            rows,
            dim,
            pivot: vec![T::zero(); rows * dim],
            context: vec![T::zero(); rows * dim],
        }
    }

    /// Pivot rows uniform in `[-0.5/d, 0.5/d]`, context rows zero.
    pub fn init(rows: usize, dim: usize, seed: u64) -> Self {
        let mut params = Self::zeros(rows, dim);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(u64::MAX);
        let half = 0.5 / dim as f64;
        for v in &mut params.pivot {
            *v = T::from(rng.random_range(-half..=half)).unwrap();
        }
        params
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pivot_row(&self, i: usize) -> &[T] {
        &self.pivot[i * self.dim..(i + 1) * self.dim]
    }

    pub fn context_row(&self, i: usize) -> &[T] {
        &self.context[i * self.dim..(i + 1) * self.dim]
    }

    pub fn is_finite(&self) -> bool {
        self.pivot.iter().chain(&self.context).all(|v| v.is_finite())
    }

    /// The local objective of one positive pair and its negatives, evaluated
    /// with the exact sigmoid.
    pub fn local_objective(&self, pivot: usize, context: usize, negatives: &[usize]) -> f64 {
        let w = self.pivot_row(pivot);
        let score = |c: usize| dot_f64(w, self.context_row(c));
        let mut obj = exact_sigmoid(score(context)).ln();
        for &n in negatives {
            obj += exact_sigmoid(-score(n)).ln();
        }
        obj
    }

    /// Analytic gradient of [`local_objective`](Self::local_objective),
    /// returned as (pivot gradient, context gradient per touched row).
    /// Repeated rows accumulate.
    pub fn local_gradient(
        &self,
        pivot: usize,
        context: usize,
        negatives: &[usize],
    ) -> (Vec<f64>, Vec<(usize, Vec<f64>)>) {
        let w = self.pivot_row(pivot);
        let mut grad_w = vec![0.0; self.dim];
        let mut grad_c: Vec<(usize, Vec<f64>)> = Vec::new();
        let targets = std::iter::once((context, 1.0)).chain(negatives.iter().map(|&n| (n, 0.0)));
        for (c, label) in targets {
            let crow = self.context_row(c);
            let g = label - exact_sigmoid(dot_f64(w, crow));
            for (gw, &cv) in grad_w.iter_mut().zip(crow) {
                *gw += g * cv.to_f64().unwrap();
            }
            let slot = match grad_c.iter().position(|(r, _)| *r == c) {
                Some(p) => p,
                None => {
                    grad_c.push((c, vec![0.0; self.dim]));
                    grad_c.len() - 1
                }
            };
            for (gc, &wv) in grad_c[slot].1.iter_mut().zip(w) {
                *gc += g * wv.to_f64().unwrap();
            }
        }
        (grad_w, grad_c)
    }

    /// One stochastic ascent step on the local objective.
    pub fn sgd_step(
        &mut self,
        pivot: usize,
        context: usize,
        negatives: &[usize],
        lr: T,
        sigmoid: &Sigmoid,
    ) {
        let dim = self.dim;
        let mut scratch = Scratch::new(dim, negatives.len());
        let pivot_row = &mut self.pivot[pivot * dim..(pivot + 1) * dim];
        sgd_update(pivot_row, &mut self.context, dim, context, negatives, lr, sigmoid, &mut scratch);
    }
}

fn dot_f64<T: Float>(a: &[T], b: &[T]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| x.to_f64().unwrap() * y.to_f64().unwrap())
        .sum()
}

#[inline]
fn dot<T: Float>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

/// Reusable buffers for [`sgd_update`].
pub struct Scratch<T> {
    pivot_grad: Vec<T>,
    coefficients: Vec<T>,
}

impl<T: Float> Scratch<T> {
    pub fn new(dim: usize, negatives: usize) -> Self {
        Scratch {
            pivot_grad: vec![T::zero(); dim],
            coefficients: Vec::with_capacity(negatives + 1),
        }
    }
}

/// The update behind [`ModelParams::sgd_step`], on raw rows so the trainer can
/// drive it over shared matrices.
#[allow(clippy::too_many_arguments)]
#[inline]
pub(crate) fn sgd_update<T: Float>(
    pivot_row: &mut [T],
    context: &mut [T],
    dim: usize,
    positive: usize,
    negatives: &[usize],
    lr: T,
    sigmoid: &Sigmoid,
    scratch: &mut Scratch<T>,
) {
    let row = |i: usize| i * dim..(i + 1) * dim;
    let target = |j: usize| if j == 0 { positive } else { negatives[j - 1] };
    let count = negatives.len() + 1;

    scratch.coefficients.clear();
    for j in 0..count {
        let label = if j == 0 { 1.0 } else { 0.0 };
        let score = dot(pivot_row, &context[row(target(j))]).to_f64().unwrap();
        let g = (label - sigmoid.eval(score)) * lr.to_f64().unwrap();
        scratch.coefficients.push(T::from(g).unwrap());
    }

    let grad = &mut scratch.pivot_grad;
    grad.iter_mut().for_each(|v| *v = T::zero());
    for j in 0..count {
        let g = scratch.coefficients[j];
        for (acc, &c) in grad.iter_mut().zip(&context[row(target(j))]) {
            *acc = *acc + g * c;
        }
    }
    for j in 0..count {
        let g = scratch.coefficients[j];
        for (c, &w) in context[row(target(j))].iter_mut().zip(pivot_row.iter()) {
            *c = *c + g * w;
        }
    }
    for (w, &d) in pivot_row.iter_mut().zip(grad.iter()) {
        *w = *w + d;
    }
}
