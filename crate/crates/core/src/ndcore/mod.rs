//! Dense linear algebra, activations and seeded random numbers.
//!
//! Everything is `f64` and row-major. Matrices here stay small (a few hundred
//! rows and columns at most), so the kernels are plain loops.

mod matrix;
mod rng;

pub use matrix::{apply_activation, sigmoid, Activation, Matrix};
pub use rng::{seeded_uniform, Rng};

/// An ordered collection of parameter tensors.
///
/// Optimizers, gradient checks and checkpointing walk the tensors in the order
/// returned here; implementations must keep `tensors` and `tensors_mut`
/// consistent.
pub trait Parameters {
    fn tensors(&self) -> Vec<&Matrix>;
    fn tensors_mut(&mut self) -> Vec<&mut Matrix>;

    fn param_count(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for t in self.tensors() {
            out.extend_from_slice(t.data());
        }
        out
    }

    /// Sets every tensor entry to zero.
    fn zero(&mut self) {
        for t in self.tensors_mut() {
            t.data_mut().iter_mut().for_each(|v| *v = 0.0);
        }
    }

    /// Checks that `other` has the same tensor count and shapes.
    fn same_shape(&self, other: &dyn Parameters) -> bool {
        let a = self.tensors();
        let b = other.tensors();
        a.len() == b.len() && a.iter().zip(&b).all(|(x, y)| x.shape() == y.shape())
    }

    /// `self += scale * other`, tensor by tensor.
    fn add_scaled(&mut self, other: &dyn Parameters, scale: f64) {
        let src = other.tensors();
        for (dst, src) in self.tensors_mut().into_iter().zip(src) {
            for (d, s) in dst.data_mut().iter_mut().zip(src.data()) {
                *d += scale * s;
            }
        }
    }

    fn l2_norm(&self) -> f64 {
        self.tensors()
            .iter()
            .flat_map(|t| t.data().iter())
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }
}

impl Parameters for Matrix {
    fn tensors(&self) -> Vec<&Matrix> {
        vec![self]
    }

    fn tensors_mut(&mut self) -> Vec<&mut Matrix> {
        vec![self]
    }
}
