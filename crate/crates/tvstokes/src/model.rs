//! The two-step TV-Stokes model.
//!
//! Step 1 smooths the tangent field of the image: starting from
//! `τ⁰ = ∇⊥f`, it solves `min J(Πτ) + (η₁/2)‖τ - τ⁰‖²` over vector fields,
//! which keeps the result (essentially) divergence-free.
//!
//! Step 2 reconstructs an image whose gradient aligns with the smoothed
//! orientation: `min J(u) - α⟨∇u, n⟩ + (η₂/2)‖u - f‖²` with `n = τ⊥/|τ⊥|`.
//! Completing the square turns this into a plain ROF solve on shifted data,
//!
//! ```text
//! min J(u) + (η₂/2)‖u - (f - (α/η₂) ∇·n)‖²,
//! ```
//!
//! which is how [`match_surface`] computes it. With `α = 0` the model reduces
//! to ROF denoising of `f` exactly.

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField2};
use crate::grid_ops::{default_eps, divergence, grad_perp, gradient, normalized_perp, tv_energy};
use crate::poisson::PoissonSolver;
use crate::rof::{rof_denoise, rof_vector_projected, InnerSolveConfig};

/// Parameters of the single-pass two-step model.
#[derive(Debug, Clone)]
pub struct TvsParams {
    /// Step-1 fidelity; `None` derives `β₁/γ` from the initial tangent field.
    pub eta1: Option<f64>,
    /// Step-2 fidelity; `None` derives `β₂/γ` from the image.
    pub eta2: Option<f64>,
    /// Schedule constant backing the `eta1` default.
    pub beta1: f64,
    /// Schedule constant backing the `eta2` default.
    pub beta2: f64,
    /// Orientation-matching weight in `[0, 1]`; 0 reduces to ROF.
    pub alpha: f64,
    /// Normalization floor; `None` picks `1e-8·(1 + max|τ|)`.
    pub eps: Option<f64>,
    pub inner: InnerSolveConfig,
}

impl Default for TvsParams {
    fn default() -> Self {
        Self {
            eta1: None,
            eta2: None,
            beta1: 8.0,
            beta2: 2.5,
            alpha: 0.9,
            eps: None,
            inner: InnerSolveConfig::default(),
        }
    }
}

impl TvsParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in [0, 1], got {}",
                self.alpha
            )));
        }
        for (name, beta) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(beta > 1.0 && beta.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be finite and > 1, got {beta}"
                )));
            }
        }
        if let Some(eps) = self.eps {
            if !(eps > 0.0 && eps.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "eps must be positive and finite, got {eps}"
                )));
            }
        }
        Ok(())
    }
}

/// Step 1: smooth the tangent field `∇⊥f` under the divergence-free TV prior.
pub fn smooth_tangent_field(
    f: &ScalarField,
    eta1: f64,
    solver: &PoissonSolver,
    cfg: &InnerSolveConfig,
) -> Result<VectorField2> {
    let tau0 = grad_perp(f);
    let (tau, _) = rof_vector_projected(&tau0, eta1, solver, cfg)?;
    Ok(tau)
}

/// Step 2: reconstruct the image matched to the orientation of `τ`.
///
/// Solved through the completed-square ROF form on
/// `f - (α/η₂)·∇·(τ⊥/|τ⊥|)`; with `α = 0` this is byte-for-byte the plain
/// ROF solve on `f`.
pub fn match_surface(
    f: &ScalarField,
    tau: &VectorField2,
    alpha: f64,
    eta2: f64,
    eps: f64,
    cfg: &InnerSolveConfig,
) -> Result<ScalarField> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in [0, 1], got {alpha}"
        )));
    }
    assert_eq!(f.shape(), tau.shape(), "image and tangent field must match");
    if alpha == 0.0 {
        return Ok(rof_denoise(f, eta2, cfg)?.0);
    }
    let n = normalized_perp(tau, eps);
    let mut shifted = f.clone();
    shifted.axpy(-alpha / eta2, &divergence(&n));
    Ok(rof_denoise(&shifted, eta2, cfg)?.0)
}

/// The full two-step model; returns the restored image and the smoothed
/// tangent field.
pub fn tv_stokes_denoise(
    f: &ScalarField,
    params: &TvsParams,
    solver: &PoissonSolver,
) -> Result<(ScalarField, VectorField2)> {
    params.validate()?;
    if !f.is_finite() {
        return Err(Error::NonFinite("tv_stokes_denoise input"));
    }
    let tau0 = grad_perp(f);
    if tau0.max_magnitude() == 0.0 {
        // constant image: nothing to smooth, nothing to match
        return Ok((f.clone(), tau0));
    }
    let eta1 = match params.eta1 {
        Some(v) => v,
        None => params.beta1 / (tau0.max_magnitude() / 2.0),
    };
    let (tau, _) = rof_vector_projected(&tau0, eta1, solver, &params.inner)?;
    let eta2 = match params.eta2 {
        Some(v) => v,
        None => params.beta2 / (f.linf_norm() / 2.0),
    };
    let eps = params.eps.unwrap_or_else(|| default_eps(&tau));
    let u = match_surface(f, &tau, params.alpha, eta2, eps, &params.inner)?;
    Ok((u, tau))
}

/// The step-2 objective in its original (non-completed-square) form:
/// `J(u) - α⟨∇u, n⟩ + (η₂/2)‖u - f‖²`.
///
/// `n` must already be the normalized rotated field. Used to cross-check the
/// completed-square reduction.
pub fn orientation_objective(
    u: &ScalarField,
    f: &ScalarField,
    n: &VectorField2,
    alpha: f64,
    eta2: f64,
) -> f64 {
    let diff = u.sub(f);
    tv_energy(u) - alpha * gradient(u).inner(n) + 0.5 * eta2 * diff.inner(&diff)
}
