//! Dense tensors (vectors and matrices) and the hot matrix-vector kernels.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FromPrimitive};

/// Element type for all numerical work. Training runs in `f32`; gradient
/// checking instantiates the same code at `f64`.
pub trait Scalar:
    Float
    + FromPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum<Self>
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).expect("f64 converts to scalar")
    }
    fn to_f64_lossy(self) -> f64;
}

impl Scalar for f32 {
    fn to_f64_lossy(self) -> f64 {
        self as f64
    }
}

impl Scalar for f64 {
    fn to_f64_lossy(self) -> f64 {
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Vector(usize),
    Matrix(usize, usize),
}

impl Shape {
    pub fn len(&self) -> usize {
        match *self {
            Shape::Vector(n) => n,
            Shape::Matrix(r, c) => r * c,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dims(&self) -> Vec<usize> {
        match *self {
            Shape::Vector(n) => vec![n],
            Shape::Matrix(r, c) => vec![r, c],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<T> {
    shape: Shape,
    data: Vec<T>,
}

impl<T: Scalar> Tensor<T> {
    pub fn new(shape: Shape, data: Vec<T>) -> Self {
        assert_eq!(shape.len(), data.len(), "shape/data length mismatch");
        Tensor { shape, data }
    }

    pub fn zeros(shape: Shape) -> Self {
        Tensor { shape, data: vec![T::zero(); shape.len()] }
    }

    pub fn vector(data: Vec<T>) -> Self {
        Tensor { shape: Shape::Vector(data.len()), data }
    }

    pub fn matrix(rows: usize, cols: usize, data: Vec<T>) -> Self {
        Tensor::new(Shape::Matrix(rows, cols), data)
    }

    pub fn scalar(v: T) -> Self {
        Tensor::vector(vec![v])
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    /// Value of a one-element tensor.
    pub fn item(&self) -> T {
        assert_eq!(self.data.len(), 1, "item() on a non-scalar tensor");
        self.data[0]
    }

    pub fn fill(&mut self, v: T) {
        self.data.iter_mut().for_each(|x| *x = v);
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn assert_finite(&self, context: &str) {
        assert!(self.is_finite(), "non-finite value after {context}");
    }
}

/// out = W x, with W row-major (rows x cols) and |x| = cols.
pub fn matvec_into<T: Scalar>(w: &[T], rows: usize, cols: usize, x: &[T], out: &mut [T]) {
    debug_assert_eq!(w.len(), rows * cols);
    debug_assert_eq!(x.len(), cols);
    debug_assert_eq!(out.len(), rows);
    for (row, o) in w.chunks_exact(cols).zip(out.iter_mut()) {
        // Four accumulators keep the FP dependency chain short; the summation
        // order is fixed, so results stay bit-reproducible.
        let mut acc = [T::zero(); 4];
        let mut rc = row.chunks_exact(4);
        let mut xc = x.chunks_exact(4);
        for (r4, x4) in (&mut rc).zip(&mut xc) {
            acc[0] = acc[0] + r4[0] * x4[0];
            acc[1] = acc[1] + r4[1] * x4[1];
            acc[2] = acc[2] + r4[2] * x4[2];
            acc[3] = acc[3] + r4[3] * x4[3];
        }
        let mut tail = T::zero();
        for (r, xv) in rc.remainder().iter().zip(xc.remainder()) {
            tail = tail + *r * *xv;
        }
        *o = ((acc[0] + acc[1]) + (acc[2] + acc[3])) + tail;
    }
}

/// dx += W^T g.
pub fn matvec_transpose_accum<T: Scalar>(w: &[T], rows: usize, cols: usize, g: &[T], dx: &mut [T]) {
    debug_assert_eq!(w.len(), rows * cols);
    debug_assert_eq!(g.len(), rows);
    debug_assert_eq!(dx.len(), cols);
    for (row, &gi) in w.chunks_exact(cols).zip(g.iter()) {
        if gi != T::zero() {
            for (d, &wv) in dx.iter_mut().zip(row.iter()) {
                *d += gi * wv;
            }
        }
    }
}

/// dW += g x^T.
pub fn outer_accum<T: Scalar>(g: &[T], x: &[T], dw: &mut [T]) {
    debug_assert_eq!(dw.len(), g.len() * x.len());
    for (dw_row, &gi) in dw.chunks_exact_mut(x.len()).zip(g.iter()) {
        if gi != T::zero() {
            for (d, &xv) in dw_row.iter_mut().zip(x.iter()) {
                *d += gi * xv;
            }
        }
    }
}
