//! TV-Stokes image denoising with Richardson-like iterative regularization.
//!
//! The crate implements the two-step TV-Stokes model for grayscale image
//! denoising — smooth a divergence-free tangent field of the image, then
//! reconstruct an image whose gradient aligns with the rotated field — plus a
//! family of outer iterative-regularization drivers that repeatedly denoise
//! the residual and accumulate the pieces, in the style of the modified
//! Richardson iteration.
//!
//! The building blocks are usable on their own:
//!
//! * [`field`] — scalar/vector/matrix fields on a pixel grid,
//! * [`grid_ops`] — discrete gradient, divergence and friends (exact adjoint
//!   pairs),
//! * [`poisson`] — a DCT-based Neumann Poisson solver and the orthogonal
//!   projection onto discretely divergence-free vector fields,
//! * [`rof`] — scalar and projected-vector ROF solves via the semi-implicit
//!   dual fixed point with step 1/4,
//! * [`model`] — the two-step TV-Stokes pipeline,
//! * [`iterreg`] — outer iterative-regularization drivers, the adaptive
//!   fidelity schedule `η = max(β/γ, η_prev)`, and per-iteration diagnostics,
//! * [`metrics`] — PSNR, noise level, and reproducible Gaussian noise,
//! * [`imgio`] — PGM/PNG image reading and writing.
//!
//! ```
//! use tvstokes::prelude::*;
//!
//! let clean = tvstokes::metrics::ramp_disk_image(32, 32);
//! let noisy = add_gaussian_noise(&clean, 10.0, 42, false, 255.0).unwrap();
//! let solver = PoissonSolver::new(32, 32);
//! let params = TvsParams::default();
//! let (restored, _tau) = tv_stokes_denoise(&noisy, &params, &solver).unwrap();
//! assert!(psnr(&restored, &clean, &MetricConfig::default()).unwrap()
//!     > psnr(&noisy, &clean, &MetricConfig::default()).unwrap());
//! ```

pub mod error;
pub mod field;
pub mod grid_ops;
pub mod imgio;
pub mod iterreg;
pub mod metrics;
pub mod model;
pub mod poisson;
pub mod report;
pub mod rof;

pub use error::{Error, Result};
pub use field::{MatrixField2x2, ScalarField, VectorField2};

/// The commonly used surface in one import.
pub mod prelude {
    pub use crate::error::{Error, Result};
    pub use crate::field::{MatrixField2x2, ScalarField, VectorField2};
    pub use crate::grid_ops::{
        divergence, grad_perp, gradient, mat_divergence, normalized_perp, perp, tv_energy,
        tv_energy_vec, vec_gradient,
    };
    pub use crate::iterreg::{
        osher_iterate, richardson_both, richardson_step1, richardson_step2, OuterConfig, StopRule,
    };
    pub use crate::metrics::{add_gaussian_noise, noise_level, psnr, MetricConfig};
    pub use crate::model::{match_surface, smooth_tangent_field, tv_stokes_denoise, TvsParams};
    pub use crate::poisson::PoissonSolver;
    pub use crate::report::SolveReport;
    pub use crate::rof::{rof_denoise, rof_vector_projected, InnerSolveConfig, InnerSolveStats};
}

// The guide chapters double as doc-tests so their snippets stay compilable.
#[cfg(doctest)]
mod book {
    macro_rules! chapter {
        ($name:ident, $path:literal) => {
            #[doc = include_str!($path)]
            pub mod $name {}
        };
    }

    chapter!(introduction, "../../../book/src/introduction.md");
    chapter!(fields, "../../../book/src/fields-and-operators.md");
    chapter!(rof, "../../../book/src/rof-denoising.md");
    chapter!(projection, "../../../book/src/divergence-free-projection.md");
    chapter!(tvs, "../../../book/src/tv-stokes.md");
    chapter!(iterreg, "../../../book/src/iterative-regularization.md");
    chapter!(metrics, "../../../book/src/metrics-and-noise.md");
    chapter!(cli, "../../../book/src/command-line.md");
}
