//! Scalar, vector, and matrix fields on a regular H×W pixel grid.
//!
//! All fields store `f64` samples in row-major order. A `ScalarField` holds
//! one value per pixel (an image, a residual, a Lagrange multiplier), a
//! `VectorField2` holds a 2-vector per pixel (gradients, tangent fields), and
//! a `MatrixField2x2` holds a 2×2 matrix per pixel (the gradient of a vector
//! field, or the dual variable of the vector TV problem).
//!
//! Norms and inner products are plain discrete sums with unit grid spacing:
//! `‖u‖² = Σ u_ij²`, `⟨u, v⟩ = Σ u_ij v_ij`, extended componentwise to the
//! vector and matrix types.

use crate::error::{Error, Result};

#[inline]
fn check_dims(height: usize, width: usize) {
    assert!(
        height >= 2 && width >= 2,
        "grid must be at least 2x2, got {height}x{width}"
    );
}

/// One real value per pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    height: usize,
    width: usize,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(height: usize, width: usize) -> Self {
        check_dims(height, width);
        Self {
            height,
            width,
            values: vec![0.0; height * width],
        }
    }

    pub fn filled(height: usize, width: usize, value: f64) -> Self {
        check_dims(height, width);
        Self {
            height,
            width,
            values: vec![value; height * width],
        }
    }

    /// Builds a field from a function of the (row, column) index.
    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        check_dims(height, width);
        let mut values = Vec::with_capacity(height * width);
        for i in 0..height {
            for j in 0..width {
                values.push(f(i, j));
            }
        }
        Self {
            height,
            width,
            values,
        }
    }

    /// Wraps row-major data, validating length and finiteness.
    pub fn from_vec(height: usize, width: usize, values: Vec<f64>) -> Result<Self> {
        if height < 2 || width < 2 {
            return Err(Error::InvalidParameter(format!(
                "grid must be at least 2x2, got {height}x{width}"
            )));
        }
        if values.len() != height * width {
            return Err(Error::InvalidParameter(format!(
                "expected {} values for a {height}x{width} field, got {}",
                height * width,
                values.len()
            )));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("field data"));
        }
        Ok(Self {
            height,
            width,
            values,
        })
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.width + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.values[i * self.width + j] = v;
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.shape() == other.shape()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            height: self.height,
            width: self.width,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert!(self.same_shape(other));
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert!(self.same_shape(other));
        self.zip(other, |a, b| a - b)
    }

    pub fn scale(&self, a: f64) -> Self {
        self.map(|v| a * v)
    }

    fn zip(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        Self {
            height: self.height,
            width: self.width,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// `self += a * x`.
    pub fn axpy(&mut self, a: f64, x: &Self) {
        assert!(self.same_shape(x));
        for (s, &v) in self.values.iter_mut().zip(&x.values) {
            *s += a * v;
        }
    }

    pub fn l2_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn linf_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn inner(&self, other: &Self) -> f64 {
        assert!(self.same_shape(other));
        self.values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| a * b)
            .sum()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// One real 2-vector per pixel, stored as two component planes.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField2 {
    height: usize,
    width: usize,
    c1: Vec<f64>,
    c2: Vec<f64>,
}

impl VectorField2 {
    pub fn zeros(height: usize, width: usize) -> Self {
        check_dims(height, width);
        Self {
            height,
            width,
            c1: vec![0.0; height * width],
            c2: vec![0.0; height * width],
        }
    }

    pub fn from_fn(
        height: usize,
        width: usize,
        mut f: impl FnMut(usize, usize) -> (f64, f64),
    ) -> Self {
        check_dims(height, width);
        let mut c1 = Vec::with_capacity(height * width);
        let mut c2 = Vec::with_capacity(height * width);
        for i in 0..height {
            for j in 0..width {
                let (a, b) = f(i, j);
                c1.push(a);
                c2.push(b);
            }
        }
        Self {
            height,
            width,
            c1,
            c2,
        }
    }

    pub fn from_components(c1: ScalarField, c2: ScalarField) -> Self {
        assert!(c1.same_shape(&c2));
        Self {
            height: c1.height,
            width: c1.width,
            c1: c1.values,
            c2: c2.values,
        }
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.c1.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.c1.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> (f64, f64) {
        let q = i * self.width + j;
        (self.c1[q], self.c2[q])
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: (f64, f64)) {
        let q = i * self.width + j;
        self.c1[q] = v.0;
        self.c2[q] = v.1;
    }

    #[inline]
    pub fn c1(&self) -> &[f64] {
        &self.c1
    }

    #[inline]
    pub fn c2(&self) -> &[f64] {
        &self.c2
    }

    #[inline]
    pub fn components_mut(&mut self) -> (&mut [f64], &mut [f64]) {
        (&mut self.c1, &mut self.c2)
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.shape() == other.shape()
    }

    pub fn is_finite(&self) -> bool {
        self.c1.iter().chain(&self.c2).all(|v| v.is_finite())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert!(self.same_shape(other));
        let mut out = self.clone();
        out.axpy(1.0, other);
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert!(self.same_shape(other));
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    pub fn scale(&self, a: f64) -> Self {
        Self {
            height: self.height,
            width: self.width,
            c1: self.c1.iter().map(|v| a * v).collect(),
            c2: self.c2.iter().map(|v| a * v).collect(),
        }
    }

    /// `self += a * x`.
    pub fn axpy(&mut self, a: f64, x: &Self) {
        assert!(self.same_shape(x));
        for (s, &v) in self.c1.iter_mut().zip(&x.c1) {
            *s += a * v;
        }
        for (s, &v) in self.c2.iter_mut().zip(&x.c2) {
            *s += a * v;
        }
    }

    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.c1.iter().map(|v| v * v).sum::<f64>()
            + self.c2.iter().map(|v| v * v).sum::<f64>();
        s.sqrt()
    }

    /// Largest per-pixel Euclidean magnitude.
    pub fn max_magnitude(&self) -> f64 {
        self.c1
            .iter()
            .zip(&self.c2)
            .fold(0.0, |m, (&a, &b)| m.max((a * a + b * b).sqrt()))
    }

    pub fn inner(&self, other: &Self) -> f64 {
        assert!(self.same_shape(other));
        let s1: f64 = self
            .c1
            .iter()
            .zip(&other.c1)
            .map(|(&a, &b)| a * b)
            .sum::<f64>();
        let s2: f64 = self
            .c2
            .iter()
            .zip(&other.c2)
            .map(|(&a, &b)| a * b)
            .sum::<f64>();
        s1 + s2
    }
}

/// One real 2×2 matrix per pixel; row r holds the gradient of component r.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixField2x2 {
    height: usize,
    width: usize,
    // entries [row][col], each a full plane
    a11: Vec<f64>,
    a12: Vec<f64>,
    a21: Vec<f64>,
    a22: Vec<f64>,
}

impl MatrixField2x2 {
    pub fn zeros(height: usize, width: usize) -> Self {
        check_dims(height, width);
        let n = height * width;
        Self {
            height,
            width,
            a11: vec![0.0; n],
            a12: vec![0.0; n],
            a21: vec![0.0; n],
            a22: vec![0.0; n],
        }
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.a11.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.a11.is_empty()
    }

    /// Entries at one pixel as ((a11, a12), (a21, a22)).
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> ((f64, f64), (f64, f64)) {
        let q = i * self.width + j;
        ((self.a11[q], self.a12[q]), (self.a21[q], self.a22[q]))
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, m: ((f64, f64), (f64, f64))) {
        let q = i * self.width + j;
        self.a11[q] = m.0 .0;
        self.a12[q] = m.0 .1;
        self.a21[q] = m.1 .0;
        self.a22[q] = m.1 .1;
    }

    #[inline]
    pub fn planes(&self) -> [&[f64]; 4] {
        [&self.a11, &self.a12, &self.a21, &self.a22]
    }

    #[inline]
    pub fn planes_mut(&mut self) -> [&mut Vec<f64>; 4] {
        [&mut self.a11, &mut self.a12, &mut self.a21, &mut self.a22]
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.shape() == other.shape()
    }

    /// Frobenius norm at one pixel.
    #[inline]
    pub fn frobenius_at(&self, q: usize) -> f64 {
        (self.a11[q] * self.a11[q]
            + self.a12[q] * self.a12[q]
            + self.a21[q] * self.a21[q]
            + self.a22[q] * self.a22[q])
            .sqrt()
    }

    /// Largest per-pixel Frobenius norm.
    pub fn max_frobenius(&self) -> f64 {
        (0..self.len()).fold(0.0, |m, q| m.max(self.frobenius_at(q)))
    }

    pub fn l2_norm(&self) -> f64 {
        self.planes()
            .iter()
            .map(|p| p.iter().map(|v| v * v).sum::<f64>())
            .sum::<f64>()
            .sqrt()
    }

    pub fn inner(&self, other: &Self) -> f64 {
        assert!(self.same_shape(other));
        self.planes()
            .iter()
            .zip(other.planes().iter())
            .map(|(a, b)| a.iter().zip(b.iter()).map(|(&x, &y)| x * y).sum::<f64>())
            .sum()
    }
}
