//! Neumann Poisson solver and the divergence-free projection Π.
//!
//! The discrete Laplacian `∇·∇` assembled from [`crate::grid_ops`] is the
//! five-point stencil with replicated boundary samples. That operator is
//! diagonalized exactly by the type-II cosine basis, with per-axis eigenvalues
//! `2cos(πk/N) - 2`, so `Δ†` is realized spectrally: transform, divide by the
//! eigenvalue sum, transform back. The constant mode has eigenvalue 0 and its
//! inverse is set to 0 (Moore–Penrose pseudoinverse), which makes the returned
//! potential zero-mean and annihilates the mean of the right-hand side.
//!
//! On top of `Δ†` sits the projection
//!
//! ```text
//! Π = I - ∇ Δ† ∇·
//! ```
//!
//! which is the orthogonal projection onto the kernel of the discrete
//! divergence: idempotent, self-adjoint, and linear, with `∇·(Πv) = 0` up to
//! rounding.

use std::sync::Arc;

use rustdct::{DctPlanner, TransformType2And3};

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField2};
use crate::grid_ops::{divergence, gradient};

/// Spectral pseudoinverse of the discrete Neumann Laplacian on a fixed grid.
///
/// Construction precomputes the cosine-transform plans and the eigenvalue
/// tables; the solver is immutable afterwards and can be shared across
/// threads.
pub struct PoissonSolver {
    height: usize,
    width: usize,
    dct_w: Arc<dyn TransformType2And3<f64>>,
    dct_h: Arc<dyn TransformType2And3<f64>>,
    // eigenvalues 2cos(πk/N) - 2 of the 1-D reflective second difference
    eig_h: Vec<f64>,
    eig_w: Vec<f64>,
}

impl PoissonSolver {
    pub fn new(height: usize, width: usize) -> Self {
        assert!(height >= 2 && width >= 2, "grid must be at least 2x2");
        let mut planner = DctPlanner::new();
        let dct_w = planner.plan_dct2(width);
        let dct_h = planner.plan_dct2(height);
        let eigenvalues = |n: usize| -> Vec<f64> {
            (0..n)
                .map(|k| 2.0 * (std::f64::consts::PI * k as f64 / n as f64).cos() - 2.0)
                .collect()
        };
        Self {
            height,
            width,
            dct_w,
            dct_h,
            eig_h: eigenvalues(height),
            eig_w: eigenvalues(width),
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

    fn check_shape(&self, shape: (usize, usize)) -> Result<()> {
        if shape != self.shape() {
            return Err(Error::DimensionMismatch {
                expected: self.shape(),
                found: shape,
            });
        }
        Ok(())
    }

    /// Solves `∇·∇ λ = rhs - mean(rhs)` with `mean(λ) = 0`.
    ///
    /// `∇·∇` is exactly `divergence(gradient(·))` from [`crate::grid_ops`];
    /// the constant mode of `rhs` is annihilated by the pseudoinverse.
    pub fn solve(&self, rhs: &ScalarField) -> Result<ScalarField> {
        self.check_shape(rhs.shape())?;
        let (h, w) = (self.height, self.width);
        let mut buf = rhs.as_slice().to_vec();
        let mut tr = vec![0.0; h * w];
        let mut scratch =
            vec![0.0; self.dct_w.get_scratch_len().max(self.dct_h.get_scratch_len())];

        // forward DCT-II along rows, then along columns (via transpose)
        for row in buf.chunks_exact_mut(w) {
            self.dct_w.process_dct2_with_scratch(row, &mut scratch);
        }
        transpose(&buf, &mut tr, h, w);
        for col in tr.chunks_exact_mut(h) {
            self.dct_h.process_dct2_with_scratch(col, &mut scratch);
        }

        // tr is (w x h): tr[k2*h + k1] holds mode (k1, k2)
        for k2 in 0..w {
            for k1 in 0..h {
                let q = k2 * h + k1;
                if k1 == 0 && k2 == 0 {
                    tr[q] = 0.0;
                } else {
                    tr[q] /= self.eig_h[k1] + self.eig_w[k2];
                }
            }
        }

        // inverse: DCT-III both axes, then undo the (H/2)(W/2) round-trip gain
        for col in tr.chunks_exact_mut(h) {
            self.dct_h.process_dct3_with_scratch(col, &mut scratch);
        }
        transpose(&tr, &mut buf, w, h);
        for row in buf.chunks_exact_mut(w) {
            self.dct_w.process_dct3_with_scratch(row, &mut scratch);
        }
        let norm = 4.0 / (h as f64 * w as f64);
        for v in &mut buf {
            *v *= norm;
        }

        ScalarField::from_vec(h, w, buf)
    }

    /// Orthogonal projection `Πv = v - ∇ Δ† (∇·v)` onto divergence-free fields.
    pub fn project_div_free(&self, v: &VectorField2) -> Result<VectorField2> {
        self.check_shape(v.shape())?;
        let potential = self.solve(&divergence(v))?;
        let mut out = v.clone();
        out.axpy(-1.0, &gradient(&potential));
        Ok(out)
    }
}

impl std::fmt::Debug for PoissonSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PoissonSolver")
            .field("height", &self.height)
            .field("width", &self.width)
            .finish()
    }
}

fn transpose(src: &[f64], dst: &mut [f64], rows: usize, cols: usize) {
    debug_assert_eq!(src.len(), rows * cols);
    debug_assert_eq!(dst.len(), rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            dst[j * rows + i] = src[i * cols + j];
        }
    }
}
